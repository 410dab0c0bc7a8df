#include "dss/quantized_network.hpp"

#include <string>

namespace dss {

std::pair<std::uint32_t, std::uint32_t> conv_output_extents(const QuantizedLayer& l,
                                                            std::uint32_t in_h,
                                                            std::uint32_t in_w) {
  std::uint32_t h = in_h, w = in_w;
  if (l.padding == PaddingMode::kSame) {
    h += l.k_h - 1;
    w += l.k_w - 1;
  }
  if (h < l.k_h || w < l.k_w)
    throw ShapeError("conv_output_extents: kernel larger than (padded) input");
  return {h - l.k_h + 1, w - l.k_w + 1};
}

void validate(const QuantizedNetwork& net, int weight_q_n, int weight_q_p) {
  if (net.layers.empty()) throw EmptyError("validate: network has no layers");
  if (net.in_h == 0 || net.in_w == 0 || net.in_c == 0 || net.t == 0)
    throw ShapeError("validate: zero input extent");
  std::uint32_t h = net.in_h, w = net.in_w, c = net.in_c;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const QuantizedLayer& l = net.layers[i];
    const std::string where = "layer " + std::to_string(i);
    if (l.c_i == 0 || l.c_o == 0 || l.k_h == 0 || l.k_w == 0 || l.t == 0)
      throw ShapeError("validate: zero extent in " + where);
    if (l.t != net.t) throw ShapeError("validate: timestep mismatch in " + where);
    if (l.c_i != c) throw ShapeError("validate: input channel mismatch in " + where);
    if (l.kind == LayerKind::kFc) {
      if (l.padding != PaddingMode::kValid)
        throw DomainError("validate: fc layer must use valid padding in " + where);
      if (l.k_h != h || l.k_w != w)
        throw ShapeError("validate: fc kernel must cover the input extent in " + where);
    }
    if (l.weights.size() != static_cast<std::size_t>(l.c_o) * l.kernel_len())
      throw ShapeError("validate: weight array size mismatch in " + where);
    if (l.bias.size() != l.c_o || l.threshold.size() != l.c_o)
      throw ShapeError("validate: bias/threshold size mismatch in " + where);
    for (std::int8_t v : l.weights)
      if (v < -weight_q_n || v > weight_q_p)
        throw DomainError("validate: weight outside quantized range in " + where);
    auto [oh, ow] = conv_output_extents(l, h, w);
    h = oh;
    w = ow;
    c = l.c_o;
    if (l.maxpool) {
      if (h < 2 || w < 2) throw ShapeError("validate: pooled extent underflow in " + where);
      h /= 2;
      w /= 2;
    }
  }
}

}  // namespace dss
