#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dss/error.hpp"
#include "dss/neuron.hpp"
#include "dss/spike_tensor.hpp"

namespace dss {

enum class LayerKind : std::uint8_t { kConv = 0, kFc = 1 };

// One integer layer as the accelerator stores it. Weights are kept per
// output channel as the flattened kernel in (k_h, k_w, c_i) order --
// channel innermost, matching the window stream -- with values in
// [-q_n, q_p]. A fully-connected layer is a convolution whose kernel
// covers the whole input extent (valid padding, 1x1 output).
struct QuantizedLayer {
  LayerKind kind = LayerKind::kConv;
  NeuronModel model = NeuronModel::kLIF;
  PaddingMode padding = PaddingMode::kValid;
  bool maxpool = false;
  std::uint16_t c_i = 0, c_o = 0, k_h = 0, k_w = 0, t = 0;
  std::vector<std::int8_t> weights;     // c_o * kernel_len()
  std::vector<std::int16_t> bias;       // c_o
  std::vector<std::int16_t> threshold;  // c_o

  std::size_t kernel_len() const {
    return static_cast<std::size_t>(k_h) * k_w * c_i;
  }
  const std::int8_t* channel_weights(std::uint32_t ch) const {
    return weights.data() + static_cast<std::size_t>(ch) * kernel_len();
  }
  std::int8_t* channel_weights(std::uint32_t ch) {
    return weights.data() + static_cast<std::size_t>(ch) * kernel_len();
  }
  std::size_t weight_index(std::uint32_t kh, std::uint32_t kw, std::uint32_t ci) const {
    return (static_cast<std::size_t>(kh) * k_w + kw) * c_i + ci;
  }
};

struct QuantizedNetwork {
  std::uint16_t in_h = 0, in_w = 0, in_c = 0, t = 0;
  std::vector<QuantizedLayer> layers;
};

// Spatial extents after the layer's padding + convolution (before any
// pooling).
std::pair<std::uint32_t, std::uint32_t> conv_output_extents(const QuantizedLayer& l,
                                                            std::uint32_t in_h,
                                                            std::uint32_t in_w);

// Geometry chain, weight range, and per-layer array sizes. Throws
// ShapeError/DomainError on the first violation.
void validate(const QuantizedNetwork& net, int weight_q_n = 8, int weight_q_p = 7);

}  // namespace dss
