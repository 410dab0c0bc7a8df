#include "dss/random_nets.hpp"

#include <algorithm>
#include <random>

namespace dss {

QuantizedNetwork make_random_network(const RandomNetSpec& spec) {
  if (spec.weight_sparsity < 0.0 || spec.weight_sparsity >= 1.0)
    throw DomainError("make_random_network: sparsity must lie in [0, 1)");
  if (spec.max_layers == 0) throw DomainError("make_random_network: need a layer");

  std::mt19937_64 geom(spec.seed * 0x9E3779B97F4A7C15ull + 1);
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(geom);
  };

  QuantizedNetwork net;
  net.t = static_cast<std::uint16_t>(1 << pick(0, 2));  // 1, 2 or 4
  net.in_h = static_cast<std::uint16_t>(pick(4, 9));
  net.in_w = static_cast<std::uint16_t>(pick(4, 9));
  net.in_c = static_cast<std::uint16_t>(pick(1, 4));

  const int nlayers = pick(1, static_cast<int>(spec.max_layers));
  std::uint32_t h = net.in_h, w = net.in_w;
  std::uint16_t c_i = net.in_c;
  for (int li = 0; li < nlayers; ++li) {
    QuantizedLayer l;
    l.c_i = c_i;
    l.t = net.t;
    l.model = pick(0, 1) ? NeuronModel::kLIF : NeuronModel::kIF;
    const bool can_conv = h >= 2 && w >= 2;
    if (can_conv && pick(0, 2) != 0) {
      l.kind = LayerKind::kConv;
      l.padding = pick(0, 1) ? PaddingMode::kSame : PaddingMode::kValid;
      if (l.padding == PaddingMode::kSame) {
        l.k_h = static_cast<std::uint16_t>(pick(0, 1) ? 3 : 1);
        l.k_w = static_cast<std::uint16_t>(pick(0, 1) ? 3 : 1);
      } else {
        l.k_h = static_cast<std::uint16_t>(pick(1, std::min<int>(3, h)));
        l.k_w = static_cast<std::uint16_t>(pick(1, std::min<int>(3, w)));
      }
      l.c_o = static_cast<std::uint16_t>(pick(1, 6));
    } else {
      l.kind = LayerKind::kFc;
      l.padding = PaddingMode::kValid;
      l.k_h = static_cast<std::uint16_t>(h);
      l.k_w = static_cast<std::uint16_t>(w);
      l.c_o = static_cast<std::uint16_t>(pick(2, 6));
    }
    const auto [oh, ow] = conv_output_extents(l, h, w);
    h = oh;
    w = ow;
    if (l.kind == LayerKind::kConv && h >= 2 && w >= 2 && pick(0, 3) == 0) {
      l.maxpool = true;
      h /= 2;
      w /= 2;
    }

    const std::size_t len = l.kernel_len();
    l.weights.assign(static_cast<std::size_t>(l.c_o) * len, 0);
    l.bias.resize(l.c_o);
    l.threshold.resize(l.c_o);
    // Weight draws come from a stream keyed by (seed, layer) alone so
    // every sparsity level sees the same priorities and magnitudes.
    std::mt19937_64 wrng(spec.seed * 0xD1B54A32D192ED03ull + 77 * (li + 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < l.weights.size(); ++i) {
      const double priority = unit(wrng);
      int v = std::uniform_int_distribution<int>(-8, 6)(wrng);
      if (v >= 0) ++v;  // skip zero: the mask alone decides sparsity
      if (priority >= spec.weight_sparsity) l.weights[i] = static_cast<std::int8_t>(v);
    }
    for (std::uint32_t ch = 0; ch < l.c_o; ++ch) {
      l.bias[ch] = static_cast<std::int16_t>(pick(-2, 2));
      l.threshold[ch] = static_cast<std::int16_t>(pick(0, 4));
    }

    c_i = l.c_o;
    net.layers.push_back(std::move(l));
  }
  validate(net);
  return net;
}

std::vector<LayerRuntime> random_runtimes(const QuantizedNetwork& net,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0xBF58476D1CE4E5B9ull + 3);
  std::vector<LayerRuntime> rts;
  for (const QuantizedLayer& l : net.layers) {
    LayerRuntime rt;
    rt.p_co = static_cast<std::uint16_t>(
        std::uniform_int_distribution<int>(1, l.c_o)(rng));
    const int len = static_cast<int>(l.kernel_len());
    const int hi = std::max(1, std::min(len, 8));
    rt.p_ci = static_cast<std::uint16_t>(std::uniform_int_distribution<int>(1, hi)(rng));
    if (std::uniform_int_distribution<int>(0, 7)(rng) == 0)
      rt.p_ci = static_cast<std::uint16_t>(len);  // whole window in one segment
    rts.push_back(rt);
  }
  return rts;
}

}  // namespace dss
