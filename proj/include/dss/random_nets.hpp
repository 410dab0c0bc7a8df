#pragma once

#include <cstdint>

#include "dss/pipeline.hpp"
#include "dss/quantized_network.hpp"

namespace dss {

// Random-but-valid test networks. Geometry (layer mix, extents, kernels,
// paddings, t) depends only on the seed; weight masks come from a
// per-position priority draw, a weight surviving when its priority is at
// least weight_sparsity. Raising the sparsity with the seed fixed can
// therefore only erase weights, never move or add them.
struct RandomNetSpec {
  std::uint64_t seed = 1;
  double weight_sparsity = 0.0;
  std::uint32_t max_layers = 3;
};

QuantizedNetwork make_random_network(const RandomNetSpec& spec);

// Random per-layer parallelism for the network, p_co in [1, c_o].
std::vector<LayerRuntime> random_runtimes(const QuantizedNetwork& net,
                                          std::uint64_t seed);

}  // namespace dss
