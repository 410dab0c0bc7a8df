#pragma once

#include <cstdint>
#include <vector>

#include "dss/quantized_network.hpp"
#include "dss/spike_tensor.hpp"

namespace dss {

// Bit-exact dense reference for one layer: pads per the layer's mode,
// then for each output neuron walks all T timesteps with a held
// membrane register before moving on. Pooling is not applied here.
SpikeTensor run_layer_dense(const QuantizedLayer& l, const SpikeTensor& in);

// Whole-network reference: layer, then pooling where flagged.
SpikeTensor run_network_dense(const QuantizedNetwork& net, const SpikeTensor& in);

std::vector<std::uint64_t> spike_counts_per_channel(const SpikeTensor& out);

// Argmax of per-channel spike counts; ties resolve to the lowest index.
int classify(const SpikeTensor& out);

}  // namespace dss
