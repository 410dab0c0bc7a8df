#pragma once

#include <cstddef>
#include <cstdint>

#include "dss/error.hpp"

namespace dss {

enum class NeuronModel : std::uint8_t { kIF = 0, kLIF = 1 };

// Per-channel integer neuron constants. Reset potential is 0 and the
// LIF leak divisor is fixed at 2 (a right shift in hardware); neither
// is configurable.
struct NeuronParams {
  NeuronModel model = NeuronModel::kIF;
  std::int32_t v_threshold = 0;
  std::int32_t bias = 0;
};

struct NeuronState {
  std::int32_t v = 0;
};

std::int32_t checked_i32(std::int64_t v);

// Floor division by 2; >> is arithmetic for signed operands.
constexpr std::int64_t floor_div2(std::int64_t x) { return x >> 1; }

// Synaptic integration for one timestep: dot(weights, spikes) + bias.
// Spikes must be 0/1. The checked 32-bit result makes silent wraparound
// impossible.
std::int32_t integrate_current(const std::int8_t* weights, const std::uint8_t* spikes,
                               std::size_t n, std::int32_t bias);

// One membrane update. LIF: v' = v + floor((i - v)/2); IF: v' = v + i.
// Fires iff v' strictly exceeds the threshold, then resets to 0.
std::uint8_t neuron_step(NeuronState& state, std::int32_t current, const NeuronParams& p);

}  // namespace dss
