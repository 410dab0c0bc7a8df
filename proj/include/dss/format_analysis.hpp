#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dss/bits.hpp"
#include "dss/sparse_format.hpp"

namespace dss {

// Convolution shape driving the study: one weight row per output channel
// (kernel vector of length k_h*k_w*c_i) against one spike vector per
// output pixel per timestep.
struct ConvCase {
  std::uint32_t t = 4;
  std::uint32_t c_o = 64;
  std::uint32_t c_i = 32;
  std::uint32_t f_ho = 16;
  std::uint32_t f_wo = 16;
  std::uint32_t k_h = 3;
  std::uint32_t k_w = 3;

  std::uint32_t kernel_len() const { return k_h * k_w * c_i; }
  std::uint32_t windows() const { return f_ho * f_wo * t; }
};

struct AnalysisConfig {
  ConvCase conv;
  std::vector<double> grid;               // shared weight/spike sparsity levels
  std::vector<std::uint32_t> segment_lens = {16, 32, 64, 128};
  std::uint32_t trials = 100;
  std::uint64_t seed = 1;
  int value_bits = 4;
};

struct RatioPoint {
  double sparsity = 0.0;
  SparseFormat format = SparseFormat::kDense;
  std::uint32_t segment_len = 0;  // 0 for formats without segmentation
  double throughput = 0.0;        // matched pairs per cycle, median
  double storage_bits = 0.0;      // median
  double ratio = 0.0;             // median of per-trial throughput/storage
};

struct TrialData {
  std::uint32_t len = 0;
  std::vector<BitVec> weight_rows;
  std::vector<BitVec> spike_vecs;
};

TrialData make_trial(const ConvCase& conv, double sparsity, std::uint64_t seed);

// All cycle totals for one trial, every weight row against every spike
// vector: matched pair count, merge-walk cycles shared by COO/CSR, dense
// position walk, and bitmap cycles per requested segment length.
struct CycleTotals {
  std::uint64_t matched = 0;
  std::uint64_t merge = 0;
  std::uint64_t dense = 0;
  std::vector<std::uint64_t> bitmap;
};

// Word-level evaluation; agrees with decode_cycles on the same data.
CycleTotals fast_cycle_totals(const TrialData& data,
                              const std::vector<std::uint32_t>& seg_lens);

std::vector<RatioPoint> analyze_ratio(const AnalysisConfig& cfg);

const char* format_name(SparseFormat f);

void write_ratio_csv(std::ostream& os, const std::vector<RatioPoint>& rows);

std::vector<double> default_sparsity_grid();  // 0.00 .. 0.99 in 0.01 steps

}  // namespace dss
