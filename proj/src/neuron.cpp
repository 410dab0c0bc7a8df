#include "dss/neuron.hpp"

#include <limits>

namespace dss {

std::int32_t checked_i32(std::int64_t v) {
  if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max())
    throw OverflowError("checked_i32: value outside 32-bit signed range");
  return static_cast<std::int32_t>(v);
}

std::int32_t integrate_current(const std::int8_t* weights, const std::uint8_t* spikes,
                               std::size_t n, std::int32_t bias) {
  std::int64_t acc = bias;
  for (std::size_t i = 0; i < n; ++i) {
    if (spikes[i] > 1) throw DomainError("integrate_current: spike value is not 0/1");
    if (spikes[i]) acc += weights[i];
  }
  return checked_i32(acc);
}

std::uint8_t neuron_step(NeuronState& state, std::int32_t current, const NeuronParams& p) {
  const std::int64_t v = state.v;
  std::int64_t next;
  if (p.model == NeuronModel::kLIF) {
    next = v + floor_div2(static_cast<std::int64_t>(current) - v);
  } else {
    next = v + current;
  }
  const std::int32_t v32 = checked_i32(next);
  const std::uint8_t spike = v32 > p.v_threshold ? 1 : 0;
  state.v = spike ? 0 : v32;
  return spike;
}

}  // namespace dss
