#include "dss/orchestrator.hpp"

#include <algorithm>
#include <ostream>

namespace dss {

void LayerGeometry::validate() const {
  if (f_hi == 0 || f_wi == 0 || c_i == 0 || c_o == 0 || k_h == 0 || k_w == 0 || t == 0)
    throw ShapeError("LayerGeometry: zero extent");
  if (k_h > f_hi || k_w > f_wi)
    throw ShapeError("LayerGeometry: kernel larger than input");
  if (p_co == 0 || p_co > c_o)
    throw DomainError("LayerGeometry: p_co outside [1, c_o]");
  if (p_ci == 0) throw DomainError("LayerGeometry: p_ci must be positive");
}

StrideSchedule stride_schedule(const LayerGeometry& g) {
  g.validate();
  StrideSchedule s;
  const std::uint64_t ct = static_cast<std::uint64_t>(g.c_i) * g.t;
  s.base_window = ct;
  s.base_row = static_cast<std::uint64_t>(g.k_w) * ct;
  s.base_map = (static_cast<std::uint64_t>(g.k_h - 1) * g.f_wi + g.k_w) * ct;
  s.offset_element = g.t;
  s.offset_window_row =
      (static_cast<std::uint64_t>(g.f_wi - g.k_w) * g.c_i + 1) * g.t;
  return s;
}

std::vector<std::pair<std::string, std::uint64_t>> StrideSchedule::entries() const {
  return {{"base.window", base_window},
          {"base.row", base_row},
          {"base.map", base_map},
          {"offset.element", offset_element},
          {"offset.window_row", offset_window_row}};
}

BufferRequirements buffer_requirements(const LayerGeometry& g) {
  g.validate();
  BufferRequirements r;
  r.v_buf = g.p_co;
  r.s_buf = (static_cast<std::uint64_t>(g.k_h - 1) * g.f_wi + g.k_w) *
            static_cast<std::uint64_t>(g.t) * g.c_i;
  return r;
}

void write_trace_csv(std::ostream& os, const std::vector<OrchestratorTraceEvent>& trace) {
  os << "cycle,action,address\n";
  for (const auto& e : trace) os << e.cycle << ',' << e.action << ',' << e.address << '\n';
}

DataflowOrchestrator::DataflowOrchestrator(const LayerGeometry& g, std::uint64_t holding_bits,
                                           std::uint32_t samples)
    : g_(g), s_(stride_schedule(g)) {
  if (samples == 0) throw DomainError("DataflowOrchestrator: zero samples");
  span_ = buffer_requirements(g).s_buf;
  capacity_ = span_ + holding_bits;
  ram_.assign(capacity_, 0);
  expected_ = g.output_bits() * samples;
  total_input_ = g.input_bits() * samples;
}

void DataflowOrchestrator::tick() {
  push_ptr_reg_ = push_ptr_;
  // Dead below base: every future pop address is >= base_. At most one
  // push lands between latches, so allowing a push while occupancy is
  // capacity-1 still keeps every live address in a distinct ring slot.
  full_reg_ = push_ptr_ - base_ >= capacity_;
}

void DataflowOrchestrator::push(std::uint8_t bit) {
  if (!can_push()) throw LogicError("DataflowOrchestrator::push: RAM full");
  if (push_ptr_ >= total_input_) throw LogicError("DataflowOrchestrator::push: stream overrun");
  ram_[push_ptr_ % capacity_] = bit ? 1 : 0;
  ++push_ptr_;
  peak_reuse_ = std::max(peak_reuse_, reuse_occupancy());
}

std::uint64_t DataflowOrchestrator::reuse_occupancy() const {
  const std::uint64_t hi = std::min(push_ptr_, base_ + span_);
  return hi > base_ ? hi - base_ : 0;
}

std::uint8_t DataflowOrchestrator::pop() {
  if (!pop_valid()) throw LogicError("DataflowOrchestrator::pop: no data at pop address");
  const std::uint8_t bit = ram_[(base_ + offset_) % capacity_];
  advance();
  ++emitted_;
  return bit;
}

// Status-counter chain, innermost (channel) to outermost (sample).
// Each transition applies one schedule increment or reload; no
// multiplications happen here.
void DataflowOrchestrator::advance() {
  if (++ci_ < g_.c_i) {
    offset_ += s_.offset_element;
    return;
  }
  ci_ = 0;
  if (++kw_ < g_.k_w) {
    offset_ += s_.offset_element;  // pixels are adjacent in RAM: same stride
    return;
  }
  kw_ = 0;
  if (++kh_ < g_.k_h) {
    offset_ += s_.offset_window_row;
    return;
  }
  kh_ = 0;
  if (++tt_ < g_.t) {
    offset_ = tt_;  // reload from the temporal counter
    return;
  }
  tt_ = 0;
  if (++rep_ < g_.rounds()) {
    offset_ = 0;  // replay the window for the next output-channel group
    return;
  }
  rep_ = 0;
  offset_ = 0;
  if (++wc_ < g_.f_wo()) {
    base_ += s_.base_window;
    return;
  }
  wc_ = 0;
  if (++wr_ < g_.f_ho()) {
    base_ += s_.base_row;
    return;
  }
  wr_ = 0;
  ++sample_;
  base_ += s_.base_map;
}

namespace {

OrchestrateResult drive(const std::vector<SpikeTensor>& samples, const LayerGeometry& g,
                        std::uint64_t holding_bits, bool keep_trace) {
  if (samples.empty()) throw EmptyError("orchestrate: no input samples");
  for (const SpikeTensor& s : samples)
    if (s.h != g.f_hi || s.w != g.f_wi || s.c != g.c_i || s.t != g.t)
      throw ShapeError("orchestrate: sample extents disagree with geometry");

  DataflowOrchestrator m(g, holding_bits, static_cast<std::uint32_t>(samples.size()));
  OrchestrateResult r;
  r.bits.reserve(m.expected());

  std::size_t sample_i = 0, bit_i = 0;
  const std::uint64_t total_in = g.input_bits() * samples.size();
  const std::uint64_t watchdog = 4 * m.expected() + 2 * total_in + 64;
  std::uint64_t fed = 0;
  std::uint64_t cycle = 0;
  while (!m.done()) {
    ++cycle;
    if (cycle > watchdog) throw LogicError("orchestrate: no forward progress");
    m.tick();
    if (fed < total_in && m.can_push()) {
      if (keep_trace) r.trace.push_back({cycle, 'P', m.push_ptr()});
      m.push(samples[sample_i].bits[bit_i]);
      ++fed;
      if (++bit_i == samples[sample_i].bits.size()) {
        bit_i = 0;
        ++sample_i;
      }
    }
    if (m.pop_valid()) {
      if (keep_trace) r.trace.push_back({cycle, 'O', m.pop_address()});
      r.bits.push_back(m.pop());
    } else {
      if (keep_trace) r.trace.push_back({cycle, 'S', m.pop_address()});
      ++r.stall_cycles;
    }
  }
  r.cycles = cycle;
  r.peak_reuse_occupancy = m.peak_reuse_occupancy();
  return r;
}

}  // namespace

OrchestrateResult orchestrate(const std::vector<SpikeTensor>& samples, const LayerGeometry& g) {
  return drive(samples, g, DataflowOrchestrator::default_holding_bits(g), true);
}

OrchestrateResult orchestrate(const std::vector<SpikeTensor>& samples, const LayerGeometry& g,
                              std::uint64_t holding_bits) {
  return drive(samples, g, holding_bits, true);
}

OrchestrateResult orchestrate(const std::vector<SpikeTensor>& samples, const LayerGeometry& g,
                              std::uint64_t holding_bits, bool keep_trace) {
  return drive(samples, g, holding_bits, keep_trace);
}

std::vector<std::uint8_t> reference_reorder(const std::vector<SpikeTensor>& samples,
                                            const LayerGeometry& g) {
  g.validate();
  std::vector<std::uint8_t> out;
  out.reserve(g.output_bits() * samples.size());
  for (const SpikeTensor& s : samples) {
    if (s.h != g.f_hi || s.w != g.f_wi || s.c != g.c_i || s.t != g.t)
      throw ShapeError("reference_reorder: sample extents disagree with geometry");
    for (std::uint32_t oy = 0; oy < g.f_ho(); ++oy)
      for (std::uint32_t ox = 0; ox < g.f_wo(); ++ox)
        for (std::uint32_t rep = 0; rep < g.rounds(); ++rep)
          for (std::uint32_t step = 0; step < g.t; ++step)
            for (std::uint32_t kh = 0; kh < g.k_h; ++kh)
              for (std::uint32_t kw = 0; kw < g.k_w; ++kw)
                for (std::uint32_t ci = 0; ci < g.c_i; ++ci)
                  out.push_back(s.at(oy + kh, ox + kw, ci, step));
  }
  return out;
}

}  // namespace dss
