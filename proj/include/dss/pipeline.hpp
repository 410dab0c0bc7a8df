#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dss/detector.hpp"
#include "dss/orchestrator.hpp"
#include "dss/quantized_network.hpp"
#include "dss/spike_tensor.hpp"

namespace dss {

struct LayerRuntime {
  std::uint16_t p_co = 1;
  std::uint16_t p_ci = 1;
  std::uint64_t holding_bits = 0;  // 0 picks the orchestrator default
};

struct PipelineConfig {
  std::vector<LayerRuntime> layers;
  double clock_hz = 333.0e6;
};

struct StageStats {
  std::size_t layer = 0;
  std::uint64_t cycles = 0;        // wall cycles: sorter vs detector group, whichever is longer
  std::uint64_t issue_cycles = 0;  // detector-group lockstep issue cycles
  std::uint64_t stall_cycles = 0;  // sorter pop-starved cycles
  std::uint64_t bubble_cycles = 0; // lockstep cycles where no detector matched
  std::uint64_t bias_cycles = 0;   // dedicated trailing bias cycles
  std::uint64_t weight_fetches = 0;
  std::uint64_t output_spikes = 0;
  double input_density = 0.0;
  double output_density = 0.0;
  std::uint64_t peak_reuse_occupancy = 0;
  std::uint64_t s_buf_bits = 0;
  std::uint64_t v_buf = 0;
};

struct SimulateResult {
  SpikeTensor output;
  std::vector<StageStats> stages;
  std::vector<std::uint64_t> class_counts;
  int predicted_class = -1;
  std::uint64_t bottleneck_cycles = 0;
  double projected_outputs_per_s = 0.0;
};

// Streams one sample through every layer: pad, reorder, detect per
// output-channel group, update membranes, pool. Output spikes are exactly
// the dense reference's.
SimulateResult simulate(const QuantizedNetwork& net, const SpikeTensor& input,
                        const PipelineConfig& cfg);

void write_stats_csv(std::ostream& os, const std::vector<StageStats>& stages);

// Mean input-spike density seen by each layer over a batch of random
// inputs pushed through the network.
std::vector<double> estimate_spike_sparsity(const QuantizedNetwork& net,
                                            std::uint32_t batches, std::uint32_t batch_size,
                                            double input_density, std::uint64_t seed);

// --- parallelism balancing ---------------------------------------------

struct LayerWork {
  double mac = 0.0;  // c_o*c_i*f_wo*f_ho*k_w*k_h*t
  double d1 = 1.0;   // spike density, fraction of positions occupied
  double d2 = 1.0;   // weight density
};

struct BalanceGoal {
  std::uint64_t budget = 0;  // total units available; 0 = proportion step only
};

struct BalanceResult {
  std::vector<std::uint32_t> p_co;
  std::vector<double> unit_work;  // per layer, work / p_co
  double max_min_ratio = 0.0;
};

// Step one equalizes work/unit across layers against the lightest layer;
// step two (with a budget) scales every level up proportionally as far
// as the budget allows. Levels stay in [1, c_o].
BalanceResult balance_parallelism(const std::vector<LayerWork>& works,
                                  const std::vector<std::uint32_t>& c_o_caps,
                                  const BalanceGoal& goal);

// --- model-chain notation ----------------------------------------------
//
// "3x32x32-16c3p1-mp2-10fc": input extents, then conv tokens NcKpP, pool
// tokens mpS (stride 2 only), and a trailing fully-connected layer as
// "Nfc" or a bare channel count.

struct ParsedLayer {
  LayerKind kind = LayerKind::kConv;
  std::uint16_t c_o = 0;
  std::uint16_t k = 1;
  std::uint16_t pad = 0;
  bool maxpool_after = false;
};

struct ParsedModel {
  std::uint16_t in_c = 0, in_h = 0, in_w = 0;
  std::vector<ParsedLayer> layers;
};

ParsedModel parse_model_chain(const std::string& text);

struct ChainLayerWork {
  double mac = 0.0;
  std::uint32_t c_o = 0;
};

std::vector<ChainLayerWork> chain_workloads(const ParsedModel& m, std::uint32_t t);

}  // namespace dss
