#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "dss/error.hpp"
#include "dss/neuron.hpp"
#include "dss/quantized_network.hpp"

namespace dss {

// Symmetric-ish integer grid for b-bit weights: [-2^(b-1), 2^(b-1)-1].
struct QuantConfig {
  int bits = 4;
  int q_n = 8;  // magnitude of the lowest level
  int q_p = 7;  // highest level
};

QuantConfig quant_config(int bits);

// Range used for biases and thresholds, which share the channel's weight
// scale but are stored in 16 bits.
inline constexpr int kWideQn = 32768;
inline constexpr int kWideQp = 32767;

// Ties round away from zero: 0.5 -> 1, -0.5 -> -1.
double round_half_away(double x);

// r_q = round(clip(r/s, -q_n, q_p))
int lsq_quantize(double r, double s, int q_n, int q_p);

double lsq_dequantize(int q, double s);

// d(dequant(quant(r,s),s))/ds with the rounding decision held fixed:
// -r/s + round(r/s) in range, -q_n / q_p on the clipped branches.
double lsq_scale_gradient(double r, double s, int q_n, int q_p);

// Straight-through gradient to r: 1 in range, 0 once clipped.
double lsq_passthrough_gradient(double r, double s, int q_n, int q_p);

// Per-channel scale init, max|w| / q_p. A channel with no nonzero weight
// gets scale 1 so later gradients stay finite.
double lsq_weight_scale_init(const Eigen::ArrayXd& w, int q_p);

// --- gradient rewiring ------------------------------------------------
//
// A connection is a fixed sign and a trainable magnitude-like parameter:
// w = sign * max(theta, 0). Negative theta means pruned, and the theta
// gradient keeps a decay pull so pruned connections can drift back.

struct RewiredParam {
  Eigen::ArrayXd theta;
  Eigen::ArrayXd sign;  // entries in {-1, +1}, frozen after init
};

RewiredParam rewire_init(Eigen::Index n, double sigma, std::mt19937_64& rng);

Eigen::ArrayXd rewire_forward(const RewiredParam& p);

// grad_theta = sign * grad_w * [theta > 0] + lambda * theta
Eigen::ArrayXd rewire_backward(const RewiredParam& p, const Eigen::ArrayXd& grad_w,
                               double lambda);

// --- real-valued layers and their quantization ------------------------

struct RealLayer {
  LayerKind kind = LayerKind::kConv;
  NeuronModel model = NeuronModel::kLIF;
  PaddingMode padding = PaddingMode::kValid;
  bool maxpool = false;
  std::uint16_t c_i = 0, c_o = 0, k_h = 0, k_w = 0, t = 1;
  std::vector<double> weights;  // c_o rows of kernel_len(), row-major
  std::vector<double> bias;
  std::vector<double> threshold;

  std::size_t kernel_len() const {
    return static_cast<std::size_t>(k_h) * k_w * c_i;
  }
};

// Weights go to wq levels, bias and threshold to 16 bits, all three on the
// channel's shared scale. Scales land in *scales_out when asked for.
QuantizedLayer quantize_layer(const RealLayer& layer, const QuantConfig& wq,
                              std::vector<double>* scales_out = nullptr);

// Same, but on caller-provided per-channel scales (e.g. learned ones).
QuantizedLayer quantize_layer_scaled(const RealLayer& layer, const QuantConfig& wq,
                                     const std::vector<double>& scales);

// --- silent output channels -------------------------------------------

// Bias-only accumulation test: V starts at 0, gains bias each step, and the
// channel counts as active once V > threshold strictly within t steps.
bool channel_active_by_accumulation(std::int32_t bias, std::int32_t threshold,
                                    std::uint32_t t);

// Indices of channels the accumulation test marks active.
std::vector<std::uint16_t> accumulation_active_channels(
    const std::vector<std::int16_t>& bias, const std::vector<std::int16_t>& threshold,
    std::uint32_t t);

// Exact zero-input rollout of the real neuron. Removal guard: with a leaky
// membrane and a negative threshold the accumulation test can call a
// channel dead while the neuron still fires (bias -4, threshold -3 leaks
// to -2 on the first step and spikes).
bool channel_fires_zero_input(NeuronModel model, std::int32_t bias,
                              std::int32_t threshold, std::uint32_t t);

// One row per all-zero-weight channel examined.
struct ChannelAudit {
  std::size_t layer = 0;
  std::uint16_t channel = 0;
  bool accumulation_active = false;
  bool fires_zero_input = false;
  bool removed = false;
};

struct PruneResult {
  QuantizedNetwork net;
  std::vector<ChannelAudit> audit;
};

// Drops output channels that have all-zero weights, fail the accumulation
// test, and stay silent under the exact rollout, then strips the matching
// input slices from the next layer. The final layer keeps its channels,
// and a layer never loses its last one.
PruneResult prune_silent_channels(const QuantizedNetwork& net);

}  // namespace dss
