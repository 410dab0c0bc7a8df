#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dss/bits.hpp"
#include "dss/error.hpp"
#include "dss/neuron.hpp"

namespace dss {

// One output channel's compressed weights as a detector lane sees them:
// the kernel-vector occupancy mask padded to whole segments, nonzeros
// packed in mask order, and the channel's neuron constants.
struct DetectorSlice {
  std::uint32_t len = 0;          // unpadded kernel-vector length
  std::uint32_t segment_len = 0;  // input-channel parallelism
  BitVec mask;                    // segments()*segment_len bits
  std::vector<std::int8_t> weights;
  std::int32_t bias = 0;
  std::int32_t threshold = 0;
  NeuronModel model = NeuronModel::kLIF;

  std::uint32_t segments() const { return (len + segment_len - 1) / segment_len; }
  BitVec mask_segment(std::uint32_t s) const;
  void validate() const;
};

// Lowest set bit isolated as one-hot: y = x & ~(x - 1). Pre: x nonzero.
// Repeated extraction with x' = x & ~y enumerates set bits LSB to MSB.
BitVec extract_onehot(const BitVec& x);

// Storage index of the weight addressed by one-hot y under the segment
// mask: the exclusive-prefix popcount(mask & (y - 1)).
std::uint32_t prefix_index(const BitVec& y, const BitVec& mask);
// The inclusive count popcount(mask & (y | (y - 1))) -- what the
// running offset accumulator takes in.
std::uint32_t prefix_popcount_inclusive(const BitVec& y, const BitVec& mask);

enum class FetchKind : std::uint8_t { kWeight = 0, kBias = 1, kNone = 2 };

struct DetectorState {
  std::uint64_t base_reg = 0;   // packed-RAM address of the current segment's weights
  std::uint32_t offset_reg = 0; // exclusive-prefix index of the latest extraction
  std::int32_t pair_count = 0;  // matches left in the current vector pair
  bool bias_cycle = false;      // a dedicated bias cycle is pending
  NeuronState neuron;
};

// Bias scheduling at the closing cycle of a vector pair. On the final
// pair of a timestep: a match-bearing pair keeps its weight fetch and
// arms one extra bias cycle; a bubble absorbs the bias into the cycle
// it already burns. Non-final pairs never touch the bias.
FetchKind bias_absorb_step(DetectorState& st, bool is_bubble, bool last);

struct DetectorTraceRow {
  std::uint64_t cycle = 0;
  std::uint32_t detector = 0;
  // 'and' and 'extract' and 'fire' are stage markers sharing an issue
  // cycle; 'fetch_weight', 'fetch_bias', 'bubble' each denote the issue
  // cycle itself (an absorbed bias logs as fetch_bias, not bubble).
  const char* event = "";
  std::uint64_t address = 0;
};

void write_trace_csv(std::ostream& os, const std::vector<DetectorTraceRow>& rows);

struct DetectorResult {
  std::vector<std::uint8_t> spikes;  // window-major, timestep inner
  std::vector<DetectorTraceRow> trace;
  std::uint64_t issue_cycles = 0;
  std::uint64_t weight_fetches = 0;
  std::uint64_t bias_cycles = 0;
  std::uint64_t bubble_cycles = 0;  // zero-match pairs, absorbed ones included
};

// Fixed depth of the extraction micro-pipeline (input latch through
// spike-out); a latency constant, not an issue-rate term.
inline constexpr int kDetectorPipelineDepth = 7;

// Processes windows*t_steps*segments() spike vectors (each segment_len
// bits) for one output channel. The membrane register carries across
// the t_steps of a window and restarts at each new window.
DetectorResult detector_run(const std::vector<BitVec>& vectors, const DetectorSlice& slice,
                            std::uint32_t t_steps, std::uint32_t detector_id = 0,
                            bool keep_trace = true);

}  // namespace dss
