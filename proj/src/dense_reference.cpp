#include "dss/dense_reference.hpp"

#include "dss/neuron.hpp"

namespace dss {

SpikeTensor run_layer_dense(const QuantizedLayer& l, const SpikeTensor& in) {
  if (in.c != l.c_i) throw ShapeError("run_layer_dense: channel mismatch");
  if (in.t != l.t) throw ShapeError("run_layer_dense: timestep mismatch");
  const SpikeTensor x = pad(in, l.padding, l.k_h, l.k_w);
  if (x.h < l.k_h || x.w < l.k_w)
    throw ShapeError("run_layer_dense: kernel larger than padded input");
  const std::uint32_t oh = x.h - l.k_h + 1;
  const std::uint32_t ow = x.w - l.k_w + 1;
  SpikeTensor out(oh, ow, l.c_o, l.t);
  std::vector<std::uint8_t> window(l.kernel_len());
  for (std::uint32_t y = 0; y < oh; ++y)
    for (std::uint32_t xw = 0; xw < ow; ++xw) {
      for (std::uint32_t co = 0; co < l.c_o; ++co) {
        NeuronParams p{l.model, l.threshold[co], l.bias[co]};
        NeuronState st;
        for (std::uint32_t step = 0; step < l.t; ++step) {
          std::size_t wi = 0;
          for (std::uint32_t kh = 0; kh < l.k_h; ++kh)
            for (std::uint32_t kw = 0; kw < l.k_w; ++kw)
              for (std::uint32_t ci = 0; ci < l.c_i; ++ci)
                window[wi++] = x.at(y + kh, xw + kw, ci, step);
          const std::int32_t cur =
              integrate_current(l.channel_weights(co), window.data(), window.size(), p.bias);
          out.set(y, xw, co, step, neuron_step(st, cur, p));
        }
      }
    }
  return out;
}

SpikeTensor run_network_dense(const QuantizedNetwork& net, const SpikeTensor& in) {
  if (net.layers.empty()) throw EmptyError("run_network_dense: no layers");
  SpikeTensor x = in;
  for (const QuantizedLayer& l : net.layers) {
    x = run_layer_dense(l, x);
    if (l.maxpool) x = maxpool2x2(x);
  }
  return x;
}

std::vector<std::uint64_t> spike_counts_per_channel(const SpikeTensor& out) {
  std::vector<std::uint64_t> counts(out.c, 0);
  for (std::uint32_t y = 0; y < out.h; ++y)
    for (std::uint32_t x = 0; x < out.w; ++x)
      for (std::uint32_t ch = 0; ch < out.c; ++ch)
        for (std::uint32_t s = 0; s < out.t; ++s) counts[ch] += out.at(y, x, ch, s);
  return counts;
}

int classify(const SpikeTensor& out) {
  const auto counts = spike_counts_per_channel(out);
  int best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i)
    if (counts[i] > counts[best]) best = static_cast<int>(i);
  return best;
}

}  // namespace dss
