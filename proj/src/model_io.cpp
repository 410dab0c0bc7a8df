#include "dss/model_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace dss {

namespace {

void put_u16(std::ostream& os, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

void put_i16(std::ostream& os, std::int16_t v) {
  put_u16(os, static_cast<std::uint16_t>(v));
}

std::uint16_t get_u16(std::istream& is, const char* what) {
  unsigned char b[2];
  if (!is.read(reinterpret_cast<char*>(b), 2))
    throw FormatError(std::string("model file truncated in ") + what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::int16_t get_i16(std::istream& is, const char* what) {
  return static_cast<std::int16_t>(get_u16(is, what));
}

std::uint8_t get_u8(std::istream& is, const char* what) {
  char c;
  if (!is.get(c)) throw FormatError(std::string("model file truncated in ") + what);
  return static_cast<std::uint8_t>(c);
}

void expect_magic(std::istream& is, const char* magic, const char* what) {
  char b[4];
  if (!is.read(b, 4) || b[0] != magic[0] || b[1] != magic[1] || b[2] != magic[2] ||
      b[3] != magic[3])
    throw FormatError(std::string(what) + ": bad magic");
}

// Input extents each layer sees, walking the network from the top.
struct ExtentWalk {
  std::uint32_t h, w;
  void advance(const QuantizedLayer& l) {
    const auto [oh, ow] = conv_output_extents(l, h, w);
    h = oh;
    w = ow;
    if (l.maxpool) {
      h /= 2;
      w /= 2;
    }
  }
};

}  // namespace

void validate_runtimes(const QuantizedNetwork& net,
                       const std::vector<LayerRuntime>& runtimes) {
  if (runtimes.size() != net.layers.size())
    throw CompileError("one parallelism entry per layer required");
  for (std::size_t i = 0; i < runtimes.size(); ++i) {
    if (runtimes[i].p_co < 1 || runtimes[i].p_co > net.layers[i].c_o)
      throw CompileError("output parallelism outside [1, c_o]");
    if (runtimes[i].p_ci < 1) throw CompileError("input parallelism must be positive");
  }
}

void save_model(std::ostream& os, const QuantizedNetwork& net,
                const std::vector<LayerRuntime>& runtimes) {
  validate(net);
  validate_runtimes(net, runtimes);

  os.write("FFLS", 4);
  put_u16(os, kModelFormatVersion);
  put_u16(os, static_cast<std::uint16_t>(net.layers.size()));
  put_u16(os, net.in_h);
  put_u16(os, net.in_w);
  put_u16(os, net.in_c);
  put_u16(os, net.t);

  ExtentWalk e{net.in_h, net.in_w};
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const QuantizedLayer& l = net.layers[li];
    os.put(static_cast<char>(l.kind));
    os.put(static_cast<char>(l.model));
    os.put(static_cast<char>(l.padding));
    os.put(l.maxpool ? 1 : 0);
    put_u16(os, l.c_i);
    put_u16(os, l.c_o);
    put_u16(os, l.k_h);
    put_u16(os, l.k_w);
    put_u16(os, l.t);
    put_u16(os, runtimes[li].p_co);
    put_u16(os, runtimes[li].p_ci);
    put_u16(os, static_cast<std::uint16_t>(e.h));
    put_u16(os, static_cast<std::uint16_t>(e.w));

    const std::size_t len = l.kernel_len();
    const std::size_t mask_bytes = (len + 7) / 8;
    for (std::uint32_t ch = 0; ch < l.c_o; ++ch) {
      const std::int8_t* w = l.channel_weights(ch);
      std::vector<char> blob(mask_bytes, 0);
      for (std::size_t j = 0; j < len; ++j)
        if (w[j] != 0) blob[j >> 3] |= static_cast<char>(1 << (j & 7));
      os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    }
    for (std::uint32_t ch = 0; ch < l.c_o; ++ch) {
      const std::int8_t* w = l.channel_weights(ch);
      std::uint8_t pending = 0;
      bool half = false;
      for (std::size_t j = 0; j < len; ++j) {
        if (w[j] == 0) continue;
        const std::uint8_t nib = static_cast<std::uint8_t>(w[j]) & 0xF;
        if (!half) {
          pending = nib;
          half = true;
        } else {
          os.put(static_cast<char>(pending | (nib << 4)));
          half = false;
        }
      }
      if (half) os.put(static_cast<char>(pending));
    }
    for (std::uint32_t ch = 0; ch < l.c_o; ++ch) put_i16(os, l.bias[ch]);
    for (std::uint32_t ch = 0; ch < l.c_o; ++ch) put_i16(os, l.threshold[ch]);

    e.advance(l);
  }
  if (!os) throw FormatError("model write failed");
}

StoredModel load_model(std::istream& is) {
  expect_magic(is, "FFLS", "model file");
  const std::uint16_t version = get_u16(is, "version");
  if (version != kModelFormatVersion)
    throw FormatError("unsupported model file version");

  StoredModel m;
  const std::uint16_t layer_count = get_u16(is, "layer count");
  m.net.in_h = get_u16(is, "header");
  m.net.in_w = get_u16(is, "header");
  m.net.in_c = get_u16(is, "header");
  m.net.t = get_u16(is, "header");

  std::vector<std::pair<std::uint16_t, std::uint16_t>> stored_extents;
  for (std::uint16_t li = 0; li < layer_count; ++li) {
    QuantizedLayer l;
    LayerRuntime rt;
    const std::uint8_t kind = get_u8(is, "layer record");
    const std::uint8_t model = get_u8(is, "layer record");
    const std::uint8_t padding = get_u8(is, "layer record");
    const std::uint8_t maxpool = get_u8(is, "layer record");
    if (kind > 1 || model > 1 || padding > 1 || maxpool > 1)
      throw FormatError("layer record flag out of range");
    l.kind = static_cast<LayerKind>(kind);
    l.model = static_cast<NeuronModel>(model);
    l.padding = static_cast<PaddingMode>(padding);
    l.maxpool = maxpool != 0;
    l.c_i = get_u16(is, "layer record");
    l.c_o = get_u16(is, "layer record");
    l.k_h = get_u16(is, "layer record");
    l.k_w = get_u16(is, "layer record");
    l.t = get_u16(is, "layer record");
    rt.p_co = get_u16(is, "layer record");
    rt.p_ci = get_u16(is, "layer record");
    const std::uint16_t f_hi = get_u16(is, "layer record");
    const std::uint16_t f_wi = get_u16(is, "layer record");
    stored_extents.emplace_back(f_hi, f_wi);

    const std::size_t len = l.kernel_len();
    if (len == 0 || l.c_o == 0) throw FormatError("degenerate layer record");
    const std::size_t mask_bytes = (len + 7) / 8;
    std::vector<std::vector<std::uint8_t>> masks(l.c_o);
    for (std::uint32_t ch = 0; ch < l.c_o; ++ch) {
      masks[ch].resize(mask_bytes);
      if (!is.read(reinterpret_cast<char*>(masks[ch].data()),
                   static_cast<std::streamsize>(mask_bytes)))
        throw FormatError("model file truncated in mask blob");
      for (std::size_t j = len; j < mask_bytes * 8; ++j)
        if (masks[ch][j >> 3] & (1 << (j & 7)))
          throw FormatError("mask padding bit set");
    }
    l.weights.assign(static_cast<std::size_t>(l.c_o) * len, 0);
    for (std::uint32_t ch = 0; ch < l.c_o; ++ch) {
      std::size_t nnz = 0;
      for (std::size_t j = 0; j < len; ++j)
        if (masks[ch][j >> 3] & (1 << (j & 7))) ++nnz;
      std::vector<std::uint8_t> packed((nnz + 1) / 2);
      if (nnz &&
          !is.read(reinterpret_cast<char*>(packed.data()),
                   static_cast<std::streamsize>(packed.size())))
        throw FormatError("model file truncated in weight nibbles");
      if ((nnz & 1) && (packed.back() >> 4) != 0)
        throw FormatError("weight nibble padding not zero");
      std::size_t k = 0;
      std::int8_t* w = l.weights.data() + static_cast<std::size_t>(ch) * len;
      for (std::size_t j = 0; j < len; ++j) {
        if (!(masks[ch][j >> 3] & (1 << (j & 7)))) continue;
        std::uint8_t nib = packed[k >> 1];
        nib = (k & 1) ? (nib >> 4) : (nib & 0xF);
        ++k;
        if (nib == 0) throw FormatError("masked weight decodes to zero");
        w[j] = static_cast<std::int8_t>(nib >= 8 ? static_cast<int>(nib) - 16 : nib);
      }
    }
    l.bias.resize(l.c_o);
    l.threshold.resize(l.c_o);
    for (std::uint32_t ch = 0; ch < l.c_o; ++ch) l.bias[ch] = get_i16(is, "bias row");
    for (std::uint32_t ch = 0; ch < l.c_o; ++ch)
      l.threshold[ch] = get_i16(is, "threshold row");

    m.net.layers.push_back(std::move(l));
    m.runtimes.push_back(rt);
  }

  validate(m.net);
  validate_runtimes(m.net, m.runtimes);
  ExtentWalk e{m.net.in_h, m.net.in_w};
  for (std::size_t li = 0; li < m.net.layers.size(); ++li) {
    if (stored_extents[li].first != e.h || stored_extents[li].second != e.w)
      throw CompileError("stored layer extents disagree with the geometry chain");
    e.advance(m.net.layers[li]);
  }
  return m;
}

void save_model_file(const std::string& path, const QuantizedNetwork& net,
                     const std::vector<LayerRuntime>& runtimes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  save_model(os, net, runtimes);
}

StoredModel load_model_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");
  return load_model(is);
}

void save_spikes(std::ostream& os, const SpikeTensor& t) {
  os.write("FFST", 4);
  put_u16(os, kSpikeFormatVersion);
  put_u16(os, t.h);
  put_u16(os, t.w);
  put_u16(os, t.c);
  put_u16(os, t.t);
  std::vector<char> blob((t.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.bits[i]) blob[i >> 3] |= static_cast<char>(1 << (i & 7));
  os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!os) throw FormatError("spike write failed");
}

SpikeTensor load_spikes(std::istream& is) {
  expect_magic(is, "FFST", "spike file");
  if (get_u16(is, "version") != kSpikeFormatVersion)
    throw FormatError("unsupported spike file version");
  const std::uint16_t h = get_u16(is, "extents");
  const std::uint16_t w = get_u16(is, "extents");
  const std::uint16_t c = get_u16(is, "extents");
  const std::uint16_t t = get_u16(is, "extents");
  SpikeTensor out(h, w, c, t);
  std::vector<std::uint8_t> blob((out.size() + 7) / 8);
  if (!blob.empty() &&
      !is.read(reinterpret_cast<char*>(blob.data()),
               static_cast<std::streamsize>(blob.size())))
    throw FormatError("spike file truncated");
  for (std::size_t i = 0; i < out.size(); ++i)
    out.bits[i] = (blob[i >> 3] >> (i & 7)) & 1;
  for (std::size_t i = out.size(); i < blob.size() * 8; ++i)
    if ((blob[i >> 3] >> (i & 7)) & 1) throw FormatError("spike padding bit set");
  return out;
}

void save_spikes_file(const std::string& path, const SpikeTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  save_spikes(os, t);
}

SpikeTensor load_spikes_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");
  return load_spikes(is);
}

}  // namespace dss
