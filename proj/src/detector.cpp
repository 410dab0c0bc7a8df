#include "dss/detector.hpp"

#include <ostream>

namespace dss {

BitVec DetectorSlice::mask_segment(std::uint32_t s) const {
  if (s >= segments()) throw ShapeError("DetectorSlice::mask_segment: segment out of range");
  BitVec seg(segment_len);
  for (std::uint32_t i = 0; i < segment_len; ++i)
    seg.set(i, mask.get(static_cast<std::size_t>(s) * segment_len + i));
  return seg;
}

void DetectorSlice::validate() const {
  if (len == 0) throw EmptyError("DetectorSlice: empty kernel vector");
  if (segment_len == 0) throw DomainError("DetectorSlice: zero segment length");
  if (mask.size() != static_cast<std::size_t>(segments()) * segment_len)
    throw ShapeError("DetectorSlice: mask length disagrees with segmentation");
  for (std::size_t i = len; i < mask.size(); ++i)
    if (mask.get(i)) throw DomainError("DetectorSlice: padding bit is set");
  if (weights.size() != static_cast<std::size_t>(mask.popcount()))
    throw ShapeError("DetectorSlice: weight count disagrees with mask popcount");
}

BitVec extract_onehot(const BitVec& x) { return lowest_onehot(x); }

std::uint32_t prefix_index(const BitVec& y, const BitVec& mask) {
  if (y.popcount() != 1) throw DomainError("prefix_index: y is not one-hot");
  return static_cast<std::uint32_t>((mask & y.minus_one()).popcount());
}

std::uint32_t prefix_popcount_inclusive(const BitVec& y, const BitVec& mask) {
  if (y.popcount() != 1) throw DomainError("prefix_popcount_inclusive: y is not one-hot");
  // y | (y - 1): everything up to and including y's position.
  BitVec below = y.minus_one();
  BitVec upto(y.size());
  for (std::size_t i = 0; i < upto.words().size(); ++i)
    upto.words()[i] = y.words()[i] | below.words()[i];
  return static_cast<std::uint32_t>((mask & upto).popcount());
}

FetchKind bias_absorb_step(DetectorState& st, bool is_bubble, bool last) {
  if (!last) return is_bubble ? FetchKind::kNone : FetchKind::kWeight;
  if (is_bubble) {
    // The bubble's wasted cycle carries the bias instead.
    st.bias_cycle = false;
    return FetchKind::kBias;
  }
  st.bias_cycle = true;  // weight now, dedicated bias cycle next
  return FetchKind::kWeight;
}

void write_trace_csv(std::ostream& os, const std::vector<DetectorTraceRow>& rows) {
  os << "cycle,detector,event,address\n";
  for (const auto& r : rows)
    os << r.cycle << ',' << r.detector << ',' << r.event << ',' << r.address << '\n';
}

DetectorResult detector_run(const std::vector<BitVec>& vectors, const DetectorSlice& slice,
                            std::uint32_t t_steps, std::uint32_t detector_id, bool keep_trace) {
  slice.validate();
  if (t_steps == 0) throw DomainError("detector_run: zero timesteps");
  const std::uint32_t segs = slice.segments();
  const std::size_t per_window = static_cast<std::size_t>(t_steps) * segs;
  if (vectors.empty() || vectors.size() % per_window != 0)
    throw ShapeError("detector_run: vector stream is not whole windows");
  for (const BitVec& v : vectors)
    if (v.size() != slice.segment_len)
      throw ShapeError("detector_run: vector length disagrees with segment length");

  std::vector<BitVec> mask_segs;
  std::vector<std::uint32_t> seg_weights;  // nonzeros per segment
  mask_segs.reserve(segs);
  for (std::uint32_t s = 0; s < segs; ++s) {
    mask_segs.push_back(slice.mask_segment(s));
    seg_weights.push_back(static_cast<std::uint32_t>(mask_segs.back().popcount()));
  }

  const std::size_t windows = vectors.size() / per_window;
  const NeuronParams params{slice.model, slice.threshold, slice.bias};

  DetectorResult res;
  res.spikes.reserve(windows * t_steps);
  DetectorState st;
  std::uint64_t cycle = 0;
  std::size_t vi = 0;

  auto log = [&](const char* event, std::uint64_t address) {
    if (keep_trace) res.trace.push_back({cycle, detector_id, event, address});
  };

  for (std::size_t w = 0; w < windows; ++w) {
    st.neuron = NeuronState{};  // fresh membrane per output pixel
    for (std::uint32_t step = 0; step < t_steps; ++step) {
      st.base_reg = 0;
      std::int64_t acc = 0;
      for (std::uint32_t s = 0; s < segs; ++s) {
        const bool last = (s == segs - 1);
        BitVec x = vectors[vi++] & mask_segs[s];
        st.pair_count = x.popcount();
        if (st.pair_count == 0) {
          const FetchKind fk = bias_absorb_step(st, true, last);
          ++cycle;
          ++res.issue_cycles;
          ++res.bubble_cycles;
          if (fk == FetchKind::kBias) {
            acc += params.bias;
            log("fetch_bias", 0);
          } else {
            log("bubble", 0);
          }
        } else {
          bool first = true;
          while (!x.is_zero()) {
            const BitVec y = extract_onehot(x);
            st.offset_reg = prefix_index(y, mask_segs[s]);
            const std::uint64_t addr = st.base_reg + st.offset_reg;
            --st.pair_count;
            const bool pair_done = x.and_not(y).is_zero();
            if (last && pair_done) (void)bias_absorb_step(st, false, true);
            ++cycle;
            ++res.issue_cycles;
            ++res.weight_fetches;
            // One AND per vector pair; each survivor re-enters the
            // extract stage until the residue is zero.
            log(first ? "and" : "extract", 0);
            first = false;
            log("fetch_weight", addr);
            acc += slice.weights[addr];
            x = x.and_not(y);
          }
        }
        st.base_reg += seg_weights[s];
      }
      if (st.bias_cycle) {
        st.bias_cycle = false;
        ++cycle;
        ++res.issue_cycles;
        ++res.bias_cycles;
        acc += params.bias;
        log("fetch_bias", 0);
      }
      const std::uint8_t spike = neuron_step(st.neuron, checked_i32(acc), params);
      if (spike) log("fire", 0);
      res.spikes.push_back(spike);
    }
  }
  return res;
}

}  // namespace dss
