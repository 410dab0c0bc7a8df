#pragma once

#include <cstdint>
#include <vector>

#include "dss/compression.hpp"
#include "dss/quantized_network.hpp"

namespace dss {

// Small rate-coded classification problem: each class is a random binary
// feature prototype, samples are prototypes with feature flips, and an
// active feature spikes on every timestep.
struct SyntheticTaskConfig {
  std::uint32_t features = 16;
  std::uint32_t classes = 4;
  std::uint32_t samples_per_class = 48;
  std::uint32_t t = 4;
  double flip_prob = 0.15;
  std::uint64_t seed = 7;
};

struct SyntheticTask {
  std::uint32_t features = 0;
  std::uint32_t classes = 0;
  std::uint32_t t = 0;
  std::size_t count = 0;
  std::vector<std::uint8_t> spikes;  // [sample][t][feature]
  std::vector<std::uint8_t> labels;  // [sample]

  std::uint8_t spike(std::size_t n, std::uint32_t step, std::uint32_t f) const {
    return spikes[(n * t + step) * features + f];
  }
};

SyntheticTask make_synthetic_task(const SyntheticTaskConfig& cfg);

struct ToyTrainConfig {
  std::uint32_t hidden = 24;
  std::uint32_t epochs = 400;
  std::uint32_t batch = 32;
  double lr = 0.01;
  double lambda = 0.05;  // decay on the rewiring parameter only
  double sigma = 0.5;    // init spread of theta
  int bits = 4;
  std::uint64_t seed = 1;
};

struct LayerReport {
  std::size_t layer = 0;
  double weight_sparsity = 0.0;          // zero fraction of exported weights
  double spike_sparsity_estimate = 0.0;  // 1 - mean output spike density
};

struct ToyTrainResult {
  QuantizedNetwork net;
  std::vector<LayerReport> report;
  double final_loss = 0.0;
  double baseline_gap = 0.0;              // filled by callers comparing runs
  double theta_nonpositive_fraction = 0.0;
  double weight_sparsity_total = 0.0;
};

// Two fully-connected spiking layers trained with surrogate gradients,
// magnitude-rewired weights, and fake-quantized forward passes. Loss going
// NaN raises TrainingError.
ToyTrainResult toy_train_prune(const SyntheticTask& task, const ToyTrainConfig& cfg);

void write_sparsity_csv(std::ostream& os, const std::vector<LayerReport>& rows);

}  // namespace dss
