#pragma once

#include <cstdint>
#include <vector>

#include "dss/error.hpp"

namespace dss {

enum class PaddingMode : std::uint8_t { kValid = 0, kSame = 1 };

// Binary activation volume. Canonical flat order matches the stream a
// layer receives: row, column, channel, timestep (timestep innermost),
// i.e. flat = ((y*w + x)*c + ch)*t + step.
struct SpikeTensor {
  std::uint32_t h = 0, w = 0, c = 0, t = 0;
  std::vector<std::uint8_t> bits;

  SpikeTensor() = default;
  SpikeTensor(std::uint32_t h_, std::uint32_t w_, std::uint32_t c_, std::uint32_t t_)
      : h(h_), w(w_), c(c_), t(t_) {
    if (h == 0 || w == 0 || c == 0 || t == 0)
      throw EmptyError("SpikeTensor: zero extent");
    bits.assign(static_cast<std::size_t>(h) * w * c * t, 0);
  }

  std::size_t size() const { return bits.size(); }

  std::size_t flat(std::uint32_t y, std::uint32_t x, std::uint32_t ch, std::uint32_t step) const {
    if (y >= h || x >= w || ch >= c || step >= t)
      throw ShapeError("SpikeTensor: index out of range");
    return ((static_cast<std::size_t>(y) * w + x) * c + ch) * t + step;
  }

  std::uint8_t at(std::uint32_t y, std::uint32_t x, std::uint32_t ch, std::uint32_t step) const {
    return bits[flat(y, x, ch, step)];
  }

  void set(std::uint32_t y, std::uint32_t x, std::uint32_t ch, std::uint32_t step, std::uint8_t v) {
    bits[flat(y, x, ch, step)] = v ? 1 : 0;
  }

  double density() const {
    if (bits.empty()) return 0.0;
    std::size_t n = 0;
    for (std::uint8_t b : bits) n += b;
    return static_cast<double>(n) / static_cast<double>(bits.size());
  }

  bool operator==(const SpikeTensor& o) const {
    return h == o.h && w == o.w && c == o.c && t == o.t && bits == o.bits;
  }
};

// Zero ring for 'same' output extents. The split is floor on the
// top/left and the remainder on the bottom/right, so even kernels put
// the extra zero row/column after the data.
SpikeTensor pad(const SpikeTensor& in, PaddingMode mode, std::uint32_t k_h, std::uint32_t k_w);

// 2x2 stride-2 OR-pooling per channel and timestep; a trailing odd row
// or column is dropped.
SpikeTensor maxpool2x2(const SpikeTensor& in);

SpikeTensor random_spikes(std::uint32_t h, std::uint32_t w, std::uint32_t c, std::uint32_t t,
                          double density, std::uint64_t seed);

}  // namespace dss
