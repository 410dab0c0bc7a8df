#include "dss/spike_tensor.hpp"

#include <random>

namespace dss {

SpikeTensor pad(const SpikeTensor& in, PaddingMode mode, std::uint32_t k_h, std::uint32_t k_w) {
  if (mode == PaddingMode::kValid) return in;
  if (k_h == 0 || k_w == 0) throw DomainError("pad: zero kernel extent");
  const std::uint32_t top = (k_h - 1) / 2;
  const std::uint32_t bottom = (k_h - 1) - top;
  const std::uint32_t left = (k_w - 1) / 2;
  const std::uint32_t right = (k_w - 1) - left;
  SpikeTensor out(in.h + top + bottom, in.w + left + right, in.c, in.t);
  for (std::uint32_t y = 0; y < in.h; ++y)
    for (std::uint32_t x = 0; x < in.w; ++x)
      for (std::uint32_t ch = 0; ch < in.c; ++ch)
        for (std::uint32_t s = 0; s < in.t; ++s)
          out.set(y + top, x + left, ch, s, in.at(y, x, ch, s));
  return out;
}

SpikeTensor maxpool2x2(const SpikeTensor& in) {
  const std::uint32_t oh = in.h / 2;
  const std::uint32_t ow = in.w / 2;
  if (oh == 0 || ow == 0) throw ShapeError("maxpool2x2: input smaller than window");
  SpikeTensor out(oh, ow, in.c, in.t);
  for (std::uint32_t y = 0; y < oh; ++y)
    for (std::uint32_t x = 0; x < ow; ++x)
      for (std::uint32_t ch = 0; ch < in.c; ++ch)
        for (std::uint32_t s = 0; s < in.t; ++s) {
          const std::uint8_t v = in.at(2 * y, 2 * x, ch, s) | in.at(2 * y, 2 * x + 1, ch, s) |
                                 in.at(2 * y + 1, 2 * x, ch, s) |
                                 in.at(2 * y + 1, 2 * x + 1, ch, s);
          out.set(y, x, ch, s, v);
        }
  return out;
}

SpikeTensor random_spikes(std::uint32_t h, std::uint32_t w, std::uint32_t c, std::uint32_t t,
                          double density, std::uint64_t seed) {
  if (density < 0.0 || density > 1.0) throw DomainError("random_spikes: density outside [0,1]");
  SpikeTensor out(h, w, c, t);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& b : out.bits) b = u(rng) < density ? 1 : 0;
  return out;
}

}  // namespace dss
