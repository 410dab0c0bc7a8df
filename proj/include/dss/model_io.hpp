#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dss/pipeline.hpp"
#include "dss/quantized_network.hpp"
#include "dss/spike_tensor.hpp"

namespace dss {

// Model container ("FFLS"): header with input extents, then one record
// per layer holding geometry, the assigned parallelism, a nonzero-weight
// mask (one bit per kernel position, LSB first), the surviving weights
// as packed 4-bit two's-complement nibbles, and 16-bit bias/threshold
// rows. Everything little-endian; byte-for-byte reproducible.
inline constexpr std::uint16_t kModelFormatVersion = 1;
inline constexpr std::uint16_t kSpikeFormatVersion = 1;

struct StoredModel {
  QuantizedNetwork net;
  std::vector<LayerRuntime> runtimes;  // p_co/p_ci per layer, from the file
};

// One runtime entry per layer, p_co in [1, c_o], p_ci >= 1. Throws
// CompileError otherwise.
void validate_runtimes(const QuantizedNetwork& net,
                       const std::vector<LayerRuntime>& runtimes);

void save_model(std::ostream& os, const QuantizedNetwork& net,
                const std::vector<LayerRuntime>& runtimes);
StoredModel load_model(std::istream& is);

void save_model_file(const std::string& path, const QuantizedNetwork& net,
                     const std::vector<LayerRuntime>& runtimes);
StoredModel load_model_file(const std::string& path);

// Spike tensor container ("FFST"): extents then the canonical bit order
// packed LSB first.
void save_spikes(std::ostream& os, const SpikeTensor& t);
SpikeTensor load_spikes(std::istream& is);

void save_spikes_file(const std::string& path, const SpikeTensor& t);
SpikeTensor load_spikes_file(const std::string& path);

}  // namespace dss
