#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dss/error.hpp"
#include "dss/spike_tensor.hpp"

namespace dss {

// Geometry of one layer as the stream sorter sees it: f_hi/f_wi are the
// stored input extents (padding, if any, happened upstream), p_co/p_ci
// the output/input channel parallelism.
struct LayerGeometry {
  std::uint32_t f_hi = 0, f_wi = 0;
  std::uint32_t c_i = 0, c_o = 0;
  std::uint32_t k_h = 0, k_w = 0;
  std::uint32_t t = 0;
  std::uint32_t p_co = 1, p_ci = 1;

  std::uint32_t f_ho() const { return f_hi - k_h + 1; }
  std::uint32_t f_wo() const { return f_wi - k_w + 1; }
  // Window replay count: one pass per group of p_co output channels.
  std::uint32_t rounds() const { return (c_o + p_co - 1) / p_co; }
  std::uint64_t window_len() const { return static_cast<std::uint64_t>(k_h) * k_w * c_i; }
  std::uint64_t input_bits() const {
    return static_cast<std::uint64_t>(f_hi) * f_wi * c_i * t;
  }
  std::uint64_t output_bits() const {
    return static_cast<std::uint64_t>(f_ho()) * f_wo() * rounds() * t * window_len();
  }
  void validate() const;
};

// All address arithmetic the sorter needs, precomputed once; the
// running machine only ever adds these (or reloads a counter), never
// multiplies.
struct StrideSchedule {
  std::uint64_t base_window = 0;      // next window, same row
  std::uint64_t base_row = 0;         // next window row
  std::uint64_t base_map = 0;         // next feature map / sample
  std::uint64_t offset_element = 0;   // next channel or kernel column
  std::uint64_t offset_window_row = 0;  // next kernel row inside the window
  // Timestep switch reloads the offset counter with the temporal index;
  // a replica restart reloads it with 0. Both are loads, not adds.
  std::vector<std::pair<std::string, std::uint64_t>> entries() const;
};

StrideSchedule stride_schedule(const LayerGeometry& g);

struct BufferRequirements {
  std::uint64_t v_buf = 0;  // membrane registers: one per parallel output channel
  std::uint64_t s_buf = 0;  // reuse sector: ((k_h-1)*width + k_w)*t*c_i bits
};

BufferRequirements buffer_requirements(const LayerGeometry& g);

struct OrchestratorTraceEvent {
  std::uint64_t cycle = 0;
  char action = '?';  // 'P' push, 'O' pop, 'S' pop stalled on data
  std::uint64_t address = 0;
};

void write_trace_csv(std::ostream& os, const std::vector<OrchestratorTraceEvent>& trace);

// Stream sorter: accepts the input stream in arrival order (row, col,
// channel, timestep) into a ring RAM and replays convolution windows in
// (row, col, replica, timestep, k_h, k_w, channel) order. The pop
// address is base + offset at every cycle; both counters advance by
// schedule increments driven by a chain of status counters. Full/empty
// views are registered: a cycle sees the pointers latched at the
// previous tick.
class DataflowOrchestrator {
 public:
  DataflowOrchestrator(const LayerGeometry& g, std::uint64_t holding_bits, std::uint32_t samples);
  // Holding area defaults to one input row.
  explicit DataflowOrchestrator(const LayerGeometry& g)
      : DataflowOrchestrator(g, default_holding_bits(g), 1) {}

  static std::uint64_t default_holding_bits(const LayerGeometry& g) {
    return static_cast<std::uint64_t>(g.f_wi) * g.c_i * g.t;
  }

  void tick();  // latch registered pointers/flags
  bool can_push() const { return !full_reg_; }
  void push(std::uint8_t bit);
  bool pop_valid() const { return !done() && pop_address() < push_ptr_reg_; }
  std::uint8_t pop();
  bool done() const { return emitted_ == expected_; }

  std::uint64_t pop_address() const { return base_ + offset_; }
  std::uint64_t base_ctr() const { return base_; }
  std::uint64_t offset_ctr() const { return offset_; }
  std::uint64_t push_ptr() const { return push_ptr_; }
  std::uint64_t capacity_bits() const { return capacity_; }
  std::uint64_t reuse_occupancy() const;
  std::uint64_t peak_reuse_occupancy() const { return peak_reuse_; }
  std::uint64_t emitted() const { return emitted_; }
  std::uint64_t expected() const { return expected_; }

 private:
  void advance();

  LayerGeometry g_;
  StrideSchedule s_;
  std::uint64_t span_ = 0;      // reuse sector extent in bits
  std::uint64_t capacity_ = 0;  // span + holding area
  std::vector<std::uint8_t> ram_;

  // chained status counters, innermost first
  std::uint32_t ci_ = 0, kw_ = 0, kh_ = 0, tt_ = 0, rep_ = 0, wc_ = 0, wr_ = 0, sample_ = 0;
  std::uint64_t base_ = 0, offset_ = 0;
  std::uint64_t push_ptr_ = 0, push_ptr_reg_ = 0;
  bool full_reg_ = false;
  std::uint64_t emitted_ = 0, expected_ = 0;
  std::uint64_t total_input_ = 0;
  std::uint64_t peak_reuse_ = 0;
};

struct OrchestrateResult {
  std::vector<std::uint8_t> bits;
  std::vector<OrchestratorTraceEvent> trace;
  std::uint64_t cycles = 0;
  std::uint64_t stall_cycles = 0;
  std::uint64_t peak_reuse_occupancy = 0;
};

// Free-running drive: producer feeds the samples' canonical bit streams
// back to back, consumer always ready.
OrchestrateResult orchestrate(const std::vector<SpikeTensor>& samples, const LayerGeometry& g);
OrchestrateResult orchestrate(const std::vector<SpikeTensor>& samples, const LayerGeometry& g,
                              std::uint64_t holding_bits);
OrchestrateResult orchestrate(const std::vector<SpikeTensor>& samples, const LayerGeometry& g,
                              std::uint64_t holding_bits, bool keep_trace);

// Window-gather oracle: materializes every window by direct indexing.
std::vector<std::uint8_t> reference_reorder(const std::vector<SpikeTensor>& samples,
                                            const LayerGeometry& g);

}  // namespace dss
