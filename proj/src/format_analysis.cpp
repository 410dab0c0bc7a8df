#include "dss/format_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace dss {

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  // splitmix64 finalizer over the combined stream
  std::uint64_t x = a + 0x9e3779b97f4a7c15ull * (b + 1) + 0xbf58476d1ce4e5b9ull * (c + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

BitVec random_bits(std::uint32_t len, double density, std::mt19937_64& rng) {
  BitVec v(len);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto& w = v.words();
  for (std::uint32_t i = 0; i < len; ++i)
    if (unit(rng) < density) w[i >> 6] |= std::uint64_t{1} << (i & 63);
  return v;
}

double median_of(std::vector<double>& xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n % 2 == 1) return xs[n / 2];
  return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// (word, mask) touches for every segment of every requested length.
struct SegmentPlan {
  std::vector<std::uint32_t> first;  // per seg_len: index into touches of each segment
  std::vector<std::uint32_t> seg_count;
  std::vector<std::pair<std::uint32_t, std::uint64_t>> touches;
  std::vector<std::uint32_t> touch_first;  // per segment: start index in touches
};

SegmentPlan plan_segments(std::uint32_t len, const std::vector<std::uint32_t>& seg_lens) {
  SegmentPlan p;
  for (std::uint32_t sl : seg_lens) {
    if (sl == 0) throw DomainError("segment length must be positive");
    const std::uint32_t nseg = (len + sl - 1) / sl;
    p.first.push_back(static_cast<std::uint32_t>(p.touch_first.size()));
    p.seg_count.push_back(nseg);
    for (std::uint32_t s = 0; s < nseg; ++s) {
      p.touch_first.push_back(static_cast<std::uint32_t>(p.touches.size()));
      const std::uint32_t lo = s * sl;
      const std::uint32_t hi = std::min(len, lo + sl);
      for (std::uint32_t w = lo >> 6; w <= (hi - 1) >> 6; ++w) {
        const std::uint32_t bit_lo = std::max(lo, w << 6);
        const std::uint32_t bit_hi = std::min(hi, (w + 1) << 6);
        std::uint64_t m = ~std::uint64_t{0};
        m >>= 64 - (bit_hi - bit_lo);
        m <<= bit_lo & 63;
        p.touches.emplace_back(w, m);
      }
    }
  }
  p.touch_first.push_back(static_cast<std::uint32_t>(p.touches.size()));
  return p;
}

}  // namespace

TrialData make_trial(const ConvCase& conv, double sparsity, std::uint64_t seed) {
  if (sparsity < 0.0 || sparsity >= 1.0)
    throw DomainError("make_trial: sparsity outside [0, 1)");
  const std::uint32_t len = conv.kernel_len();
  if (len == 0 || conv.c_o == 0 || conv.windows() == 0)
    throw EmptyError("make_trial: degenerate shape");
  std::mt19937_64 rng(seed);
  const double density = 1.0 - sparsity;
  TrialData d;
  d.len = len;
  d.weight_rows.reserve(conv.c_o);
  for (std::uint32_t r = 0; r < conv.c_o; ++r)
    d.weight_rows.push_back(random_bits(len, density, rng));
  d.spike_vecs.reserve(conv.windows());
  for (std::uint32_t v = 0; v < conv.windows(); ++v)
    d.spike_vecs.push_back(random_bits(len, density, rng));
  return d;
}

CycleTotals fast_cycle_totals(const TrialData& data,
                              const std::vector<std::uint32_t>& seg_lens) {
  const std::uint32_t len = data.len;
  const std::size_t nwords = (len + 63) / 64;
  const SegmentPlan plan = plan_segments(len, seg_lens);

  CycleTotals tot;
  tot.bitmap.assign(seg_lens.size(), 0);
  std::vector<std::uint64_t> zero_segs(seg_lens.size(), 0);

  std::uint64_t nnz_w_sum = 0, nnz_s_sum = 0;
  for (const BitVec& r : data.weight_rows) nnz_w_sum += r.popcount();
  for (const BitVec& v : data.spike_vecs) nnz_s_sum += v.popcount();

  std::vector<std::uint64_t> buf(nwords);
  for (const BitVec& row : data.weight_rows) {
    const auto& rw = row.words();
    for (const BitVec& vec : data.spike_vecs) {
      const auto& vw = vec.words();
      std::uint64_t matched = 0;
      for (std::size_t i = 0; i < nwords; ++i) {
        buf[i] = rw[i] & vw[i];
        matched += std::popcount(buf[i]);
      }
      tot.matched += matched;
      for (std::size_t si = 0; si < seg_lens.size(); ++si) {
        const std::uint32_t seg0 = plan.first[si];
        for (std::uint32_t s = 0; s < plan.seg_count[si]; ++s) {
          bool zero = true;
          for (std::uint32_t ti = plan.touch_first[seg0 + s];
               zero && ti < plan.touch_first[seg0 + s + 1]; ++ti)
            zero = (buf[plan.touches[ti].first] & plan.touches[ti].second) == 0;
          if (zero) ++zero_segs[si];
        }
      }
    }
  }

  const std::uint64_t pairs =
      static_cast<std::uint64_t>(data.weight_rows.size()) * data.spike_vecs.size();
  tot.dense = pairs * len;
  tot.merge = data.spike_vecs.size() * nnz_w_sum + data.weight_rows.size() * nnz_s_sum -
              tot.matched;
  for (std::size_t si = 0; si < seg_lens.size(); ++si)
    tot.bitmap[si] = tot.matched + zero_segs[si];
  return tot;
}

std::vector<double> default_sparsity_grid() {
  std::vector<double> g;
  for (int i = 0; i < 100; ++i) g.push_back(i * 0.01);
  return g;
}

std::vector<RatioPoint> analyze_ratio(const AnalysisConfig& cfg) {
  if (cfg.trials == 0) throw DomainError("analyze_ratio: zero trials");
  if (cfg.grid.empty()) throw EmptyError("analyze_ratio: empty sparsity grid");
  if (cfg.value_bits < 1) throw DomainError("analyze_ratio: value bits must be positive");

  const std::uint32_t len = cfg.conv.kernel_len();
  const std::uint64_t positions = static_cast<std::uint64_t>(cfg.conv.c_o) * len;
  const int row_bits = ceil_log2(cfg.conv.c_o);
  const int col_bits = ceil_log2(len);

  std::vector<RatioPoint> out;
  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    const double sparsity = cfg.grid[gi];
    // per trial, per format: throughput, storage, ratio
    const std::size_t nfmt = 3 + cfg.segment_lens.size();
    std::vector<std::vector<double>> thr(nfmt), sto(nfmt), rat(nfmt);

    for (std::uint32_t trial = 0; trial < cfg.trials; ++trial) {
      const TrialData data = make_trial(cfg.conv, sparsity, mix_seed(cfg.seed, gi, trial));
      const CycleTotals tot = fast_cycle_totals(data, cfg.segment_lens);
      std::uint64_t nnz = 0;
      for (const BitVec& r : data.weight_rows) nnz += r.popcount();

      const std::uint64_t sto_dense = positions * cfg.value_bits;
      const std::uint64_t sto_bitmap = positions + nnz * cfg.value_bits;
      const std::uint64_t sto_coo = nnz * (row_bits + col_bits + cfg.value_bits);
      const std::uint64_t sto_csr = nnz * (col_bits + cfg.value_bits) +
                                    (cfg.conv.c_o + 1) *
                                        static_cast<std::uint64_t>(ceil_log2(nnz + 1));

      auto record = [&](std::size_t slot, std::uint64_t cycles, std::uint64_t bits) {
        const double tp =
            cycles == 0 ? 0.0 : static_cast<double>(tot.matched) / static_cast<double>(cycles);
        thr[slot].push_back(tp);
        sto[slot].push_back(static_cast<double>(bits));
        rat[slot].push_back(bits == 0 ? 0.0 : tp / static_cast<double>(bits));
      };
      record(0, tot.dense, sto_dense);
      record(1, tot.merge, sto_coo);
      record(2, tot.merge, sto_csr);
      for (std::size_t si = 0; si < cfg.segment_lens.size(); ++si)
        record(3 + si, tot.bitmap[si], sto_bitmap);
    }

    auto emit = [&](std::size_t slot, SparseFormat f, std::uint32_t seg) {
      RatioPoint p;
      p.sparsity = sparsity;
      p.format = f;
      p.segment_len = seg;
      p.throughput = median_of(thr[slot]);
      p.storage_bits = median_of(sto[slot]);
      p.ratio = median_of(rat[slot]);
      out.push_back(p);
    };
    emit(0, SparseFormat::kDense, 0);
    emit(1, SparseFormat::kCoo, 0);
    emit(2, SparseFormat::kCsr, 0);
    for (std::size_t si = 0; si < cfg.segment_lens.size(); ++si)
      emit(3 + si, SparseFormat::kBitmap, cfg.segment_lens[si]);
  }
  return out;
}

const char* format_name(SparseFormat f) {
  switch (f) {
    case SparseFormat::kDense: return "dense";
    case SparseFormat::kBitmap: return "bitmap";
    case SparseFormat::kCoo: return "coo";
    case SparseFormat::kCsr: return "csr";
  }
  return "?";
}

void write_ratio_csv(std::ostream& os, const std::vector<RatioPoint>& rows) {
  os << "sparsity,format,segment_len,throughput,storage_bits,ratio\n";
  for (const auto& r : rows)
    os << r.sparsity << ',' << format_name(r.format) << ',' << r.segment_len << ','
       << r.throughput << ',' << r.storage_bits << ',' << r.ratio << '\n';
}

}  // namespace dss
