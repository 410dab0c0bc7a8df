#include "dss/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ostream>

#include "dss/compression.hpp"
#include "dss/dense_reference.hpp"

namespace dss {

namespace {

DetectorSlice make_slice(const QuantizedLayer& l, std::uint16_t channel,
                         std::uint32_t p_ci) {
  const std::size_t len = l.kernel_len();
  DetectorSlice s;
  s.len = static_cast<std::uint32_t>(len);
  s.segment_len = p_ci;
  const std::uint32_t segs = s.segments();
  s.mask = BitVec(static_cast<std::size_t>(segs) * p_ci);
  const std::int8_t* w = l.weights.data() + channel * len;
  for (std::size_t j = 0; j < len; ++j)
    if (w[j] != 0) {
      s.mask.set(j, true);
      s.weights.push_back(w[j]);
    }
  s.bias = l.bias[channel];
  s.threshold = l.threshold[channel];
  s.model = l.model;
  return s;
}

}  // namespace

SimulateResult simulate(const QuantizedNetwork& net, const SpikeTensor& input,
                        const PipelineConfig& cfg) {
  validate(net);
  if (cfg.layers.size() != net.layers.size())
    throw ShapeError("simulate: one runtime entry per layer required");
  if (input.h != net.in_h || input.w != net.in_w || input.c != net.in_c ||
      input.t != net.t)
    throw ShapeError("simulate: input extents disagree with the network");

  SimulateResult res;
  SpikeTensor cur = input;

  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const QuantizedLayer& l = net.layers[li];
    const LayerRuntime& rt = cfg.layers[li];
    if (rt.p_co < 1 || rt.p_co > l.c_o)
      throw DomainError("simulate: output parallelism outside [1, c_o]");
    if (rt.p_ci < 1) throw DomainError("simulate: input parallelism must be positive");

    StageStats st;
    st.layer = li;
    st.input_density = cur.density();

    const SpikeTensor padded = pad(cur, l.padding, l.k_h, l.k_w);
    LayerGeometry g;
    g.f_hi = padded.h;
    g.f_wi = padded.w;
    g.c_i = l.c_i;
    g.c_o = l.c_o;
    g.k_h = l.k_h;
    g.k_w = l.k_w;
    g.t = l.t;
    g.p_co = rt.p_co;
    g.p_ci = rt.p_ci;
    g.validate();

    const std::uint64_t holding =
        rt.holding_bits ? rt.holding_bits : DataflowOrchestrator::default_holding_bits(g);
    const OrchestrateResult orch = orchestrate({padded}, g, holding, false);

    const std::uint32_t L = static_cast<std::uint32_t>(g.window_len());
    const std::uint32_t segs = (L + rt.p_ci - 1) / rt.p_ci;
    const std::uint64_t windows = static_cast<std::uint64_t>(g.f_ho()) * g.f_wo();
    const std::uint32_t rounds = g.rounds();

    SpikeTensor out(g.f_ho(), g.f_wo(), l.c_o, l.t);

    std::vector<BitVec> vectors(windows * l.t * segs, BitVec(rt.p_ci));
    for (std::uint32_t r = 0; r < rounds; ++r) {
      // Re-slice this round's replay of the stream into detector vectors.
      for (std::uint64_t w = 0; w < windows; ++w)
        for (std::uint32_t tt = 0; tt < l.t; ++tt) {
          const std::uint64_t base = (((w * rounds) + r) * l.t + tt) * L;
          for (std::uint32_t s = 0; s < segs; ++s) {
            BitVec& v = vectors[(w * l.t + tt) * segs + s];
            v = BitVec(rt.p_ci);
            const std::uint32_t lo = s * rt.p_ci;
            const std::uint32_t hi = std::min(L, lo + rt.p_ci);
            for (std::uint32_t j = lo; j < hi; ++j)
              if (orch.bits[base + j]) v.set(j - lo, true);
          }
        }

      const std::uint32_t group =
          std::min<std::uint32_t>(rt.p_co, l.c_o - r * rt.p_co);
      std::vector<DetectorSlice> slices;
      std::vector<std::vector<BitVec>> mask_segs(group);
      slices.reserve(group);
      for (std::uint32_t d = 0; d < group; ++d) {
        slices.push_back(make_slice(l, static_cast<std::uint16_t>(r * rt.p_co + d), rt.p_ci));
        for (std::uint32_t s = 0; s < segs; ++s)
          mask_segs[d].push_back(slices[d].mask_segment(s));
      }

      // Functional result per detector.
      for (std::uint32_t d = 0; d < group; ++d) {
        const std::uint16_t ch = static_cast<std::uint16_t>(r * rt.p_co + d);
        const DetectorResult dr =
            detector_run(vectors, slices[d], l.t, ch, /*keep_trace=*/false);
        for (std::uint64_t w = 0; w < windows; ++w)
          for (std::uint32_t tt = 0; tt < l.t; ++tt)
            if (dr.spikes[w * l.t + tt]) {
              const std::uint32_t oy = static_cast<std::uint32_t>(w / g.f_wo());
              const std::uint32_t ox = static_cast<std::uint32_t>(w % g.f_wo());
              out.set(oy, ox, ch, tt, 1);
            }
        st.weight_fetches += dr.weight_fetches;
      }

      // Lockstep cycle account: the group advances at the slowest
      // detector's pace each vector-pair, and the trailing bias cycle is
      // armed when any of them matched on a timestep's final pair.
      for (std::uint64_t w = 0; w < windows; ++w)
        for (std::uint32_t tt = 0; tt < l.t; ++tt) {
          for (std::uint32_t s = 0; s < segs; ++s) {
            const BitVec& v = vectors[(w * l.t + tt) * segs + s];
            std::uint64_t worst = 1;
            bool any = false;
            for (std::uint32_t d = 0; d < group; ++d) {
              const std::uint64_t m = (v & mask_segs[d][s]).popcount();
              if (m) any = true;
              worst = std::max<std::uint64_t>(worst, m);
            }
            st.issue_cycles += worst;
            if (!any) ++st.bubble_cycles;
            if (s + 1 == segs && any) {
              ++st.issue_cycles;
              ++st.bias_cycles;
            }
          }
        }
    }

    st.stall_cycles = orch.stall_cycles;
    st.peak_reuse_occupancy = orch.peak_reuse_occupancy;
    const BufferRequirements br = buffer_requirements(g);
    st.s_buf_bits = br.s_buf;
    st.v_buf = br.v_buf;
    st.cycles = std::max<std::uint64_t>(orch.cycles,
                                        st.issue_cycles + kDetectorPipelineDepth);
    st.output_spikes = 0;
    for (std::uint8_t b : out.bits) st.output_spikes += b;
    st.output_density = out.density();
    res.stages.push_back(st);

    cur = l.maxpool ? maxpool2x2(out) : out;
  }

  res.output = cur;
  res.class_counts = spike_counts_per_channel(cur);
  res.predicted_class = classify(cur);
  for (const StageStats& st : res.stages)
    res.bottleneck_cycles = std::max(res.bottleneck_cycles, st.cycles);
  if (res.bottleneck_cycles > 0)
    res.projected_outputs_per_s = cfg.clock_hz / static_cast<double>(res.bottleneck_cycles);
  return res;
}

void write_stats_csv(std::ostream& os, const std::vector<StageStats>& stages) {
  os << "layer,cycles,issue_cycles,stalls,bubbles,bias_cycles,fetches,"
        "output_spikes,input_density,output_density,peak_reuse,s_buf_bits,v_buf\n";
  for (const auto& s : stages)
    os << s.layer << ',' << s.cycles << ',' << s.issue_cycles << ',' << s.stall_cycles
       << ',' << s.bubble_cycles << ',' << s.bias_cycles << ',' << s.weight_fetches << ','
       << s.output_spikes << ',' << s.input_density << ',' << s.output_density << ','
       << s.peak_reuse_occupancy << ',' << s.s_buf_bits << ',' << s.v_buf << '\n';
}

std::vector<double> estimate_spike_sparsity(const QuantizedNetwork& net,
                                            std::uint32_t batches, std::uint32_t batch_size,
                                            double input_density, std::uint64_t seed) {
  validate(net);
  if (batches == 0 || batch_size == 0)
    throw DomainError("estimate_spike_sparsity: need at least one batch");
  std::vector<double> density_sum(net.layers.size(), 0.0);
  std::uint64_t n = 0;
  for (std::uint32_t b = 0; b < batches; ++b)
    for (std::uint32_t i = 0; i < batch_size; ++i) {
      SpikeTensor cur = random_spikes(net.in_h, net.in_w, net.in_c, net.t, input_density,
                                      seed + b * 1000003ull + i);
      for (std::size_t li = 0; li < net.layers.size(); ++li) {
        density_sum[li] += cur.density();
        cur = run_layer_dense(net.layers[li], cur);
        if (net.layers[li].maxpool) cur = maxpool2x2(cur);
      }
      ++n;
    }
  for (double& d : density_sum) d /= static_cast<double>(n);
  return density_sum;
}

BalanceResult balance_parallelism(const std::vector<LayerWork>& works,
                                  const std::vector<std::uint32_t>& c_o_caps,
                                  const BalanceGoal& goal) {
  if (works.empty()) throw EmptyError("balance_parallelism: no layers");
  if (works.size() != c_o_caps.size())
    throw ShapeError("balance_parallelism: one channel cap per layer");

  std::vector<double> w(works.size());
  for (std::size_t i = 0; i < works.size(); ++i) {
    const LayerWork& lw = works[i];
    if (!(lw.mac > 0.0)) throw DomainError("balance_parallelism: nonpositive workload");
    if (!(lw.d1 > 0.0) || lw.d1 > 1.0 || !(lw.d2 > 0.0) || lw.d2 > 1.0)
      throw DomainError("balance_parallelism: densities must lie in (0, 1]");
    if (c_o_caps[i] == 0) throw DomainError("balance_parallelism: zero channel cap");
    w[i] = lw.mac * lw.d1 * lw.d2;
  }
  const double w_min = *std::min_element(w.begin(), w.end());

  auto levels = [&](double k) {
    std::vector<std::uint32_t> p(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double raw = round_half_away(k * w[i] / w_min);
      const double capped = std::min<double>(raw, c_o_caps[i]);
      p[i] = static_cast<std::uint32_t>(std::max(1.0, capped));
    }
    return p;
  };
  auto total = [](const std::vector<std::uint32_t>& p) {
    std::uint64_t t = 0;
    for (std::uint32_t x : p) t += x;
    return t;
  };

  std::vector<std::uint32_t> p = levels(1.0);
  if (goal.budget > 0) {
    if (goal.budget < works.size())
      throw BudgetError("balance_parallelism: budget below one unit per layer");
    if (total(p) > goal.budget)
      throw BudgetError("balance_parallelism: budget below the balanced allocation");
    // largest uniform scale-up the budget admits
    double lo = 1.0, hi = 1.0;
    while (total(levels(hi)) <= goal.budget && hi < 1e9) hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (total(levels(mid)) <= goal.budget)
        lo = mid;
      else
        hi = mid;
    }
    p = levels(lo);
  }

  BalanceResult res;
  res.p_co = p;
  res.unit_work.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    res.unit_work[i] = w[i] / static_cast<double>(p[i]);
  const auto [mn, mx] = std::minmax_element(res.unit_work.begin(), res.unit_work.end());
  res.max_min_ratio = *mx / *mn;
  return res;
}

namespace {

std::uint16_t parse_u16(const std::string& s, std::size_t& i, const char* what) {
  if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
    throw DomainError(std::string("parse_model_chain: expected number for ") + what);
  unsigned long v = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    v = v * 10 + (s[i] - '0');
    if (v > 0xFFFF) throw DomainError("parse_model_chain: number too large");
    ++i;
  }
  if (v == 0) throw DomainError(std::string("parse_model_chain: zero ") + what);
  return static_cast<std::uint16_t>(v);
}

}  // namespace

ParsedModel parse_model_chain(const std::string& text) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t dash = text.find('-', start);
    const std::size_t stop = dash == std::string::npos ? text.size() : dash;
    if (stop > start) tokens.push_back(text.substr(start, stop - start));
    if (dash == std::string::npos) break;
    start = dash + 1;
  }
  if (tokens.size() < 2)
    throw DomainError("parse_model_chain: need input extents and at least one layer");

  ParsedModel m;
  {
    const std::string& t0 = tokens[0];
    std::size_t i = 0;
    m.in_c = parse_u16(t0, i, "input channels");
    if (i >= t0.size() || t0[i] != 'x') throw DomainError("parse_model_chain: bad input extents");
    ++i;
    m.in_h = parse_u16(t0, i, "input height");
    if (i >= t0.size() || t0[i] != 'x') throw DomainError("parse_model_chain: bad input extents");
    ++i;
    m.in_w = parse_u16(t0, i, "input width");
    if (i != t0.size()) throw DomainError("parse_model_chain: trailing text in extents");
  }

  for (std::size_t ti = 1; ti < tokens.size(); ++ti) {
    const std::string& tk = tokens[ti];
    if (tk.size() >= 3 && tk[0] == 'm' && tk[1] == 'p') {
      std::size_t i = 2;
      const std::uint16_t stride = parse_u16(tk, i, "pool stride");
      if (i != tk.size() || stride != 2)
        throw UnsupportedError("parse_model_chain: only mp2 pooling is supported");
      if (m.layers.empty())
        throw DomainError("parse_model_chain: pooling before any layer");
      m.layers.back().maxpool_after = true;
      continue;
    }
    std::size_t i = 0;
    const std::uint16_t n = parse_u16(tk, i, "channel count");
    if (i == tk.size()) {
      ParsedLayer fc;
      fc.kind = LayerKind::kFc;
      fc.c_o = n;
      m.layers.push_back(fc);
      continue;
    }
    if (tk.compare(i, std::string::npos, "fc") == 0) {
      ParsedLayer fc;
      fc.kind = LayerKind::kFc;
      fc.c_o = n;
      m.layers.push_back(fc);
      continue;
    }
    if (tk[i] != 'c') throw DomainError("parse_model_chain: unrecognized token '" + tk + "'");
    ++i;
    ParsedLayer conv;
    conv.kind = LayerKind::kConv;
    conv.c_o = n;
    conv.k = parse_u16(tk, i, "kernel size");
    if (i < tk.size()) {
      if (tk[i] != 'p') throw DomainError("parse_model_chain: unrecognized token '" + tk + "'");
      ++i;
      if (i >= tk.size() || !std::isdigit(static_cast<unsigned char>(tk[i])))
        throw DomainError("parse_model_chain: missing padding amount");
      unsigned long v = 0;
      while (i < tk.size() && std::isdigit(static_cast<unsigned char>(tk[i]))) {
        v = v * 10 + (tk[i] - '0');
        ++i;
      }
      if (i != tk.size() || v > 0xFFFF)
        throw DomainError("parse_model_chain: unrecognized token '" + tk + "'");
      conv.pad = static_cast<std::uint16_t>(v);
    }
    m.layers.push_back(conv);
  }
  if (m.layers.empty()) throw DomainError("parse_model_chain: no layers");
  return m;
}

std::vector<ChainLayerWork> chain_workloads(const ParsedModel& m, std::uint32_t t) {
  if (t == 0) throw DomainError("chain_workloads: zero timesteps");
  std::vector<ChainLayerWork> out;
  double fh = m.in_h, fw = m.in_w;
  double ci = m.in_c;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const ParsedLayer& l = m.layers[i];
    ChainLayerWork w;
    w.c_o = l.c_o;
    if (l.kind == LayerKind::kConv) {
      const double oh = fh + 2.0 * l.pad - l.k + 1;
      const double ow = fw + 2.0 * l.pad - l.k + 1;
      if (oh < 1 || ow < 1) throw ShapeError("chain_workloads: kernel exceeds extent");
      w.mac = static_cast<double>(l.c_o) * ci * ow * oh * l.k * l.k * t;
      fh = oh;
      fw = ow;
    } else {
      if (fh < 1 || fw < 1) throw ShapeError("chain_workloads: empty extent before fc");
      w.mac = static_cast<double>(l.c_o) * ci * fh * fw * t;
      fh = 1;
      fw = 1;
    }
    ci = l.c_o;
    if (l.maxpool_after) {
      if (fh < 2 || fw < 2) throw ShapeError("chain_workloads: extent too small to pool");
      fh = std::floor(fh / 2.0);
      fw = std::floor(fw / 2.0);
    }
    out.push_back(w);
  }
  return out;
}

}  // namespace dss
