#include "dss/compression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace dss {

QuantConfig quant_config(int bits) {
  if (bits < 2 || bits > 8) throw DomainError("quant_config: bits outside [2, 8]");
  QuantConfig c;
  c.bits = bits;
  c.q_n = 1 << (bits - 1);
  c.q_p = (1 << (bits - 1)) - 1;
  return c;
}

double round_half_away(double x) { return std::round(x); }

int lsq_quantize(double r, double s, int q_n, int q_p) {
  if (!(s > 0.0)) throw DomainError("lsq_quantize: scale must be positive");
  const double lo = -static_cast<double>(q_n);
  const double hi = static_cast<double>(q_p);
  const double clipped = std::clamp(r / s, lo, hi);
  return static_cast<int>(round_half_away(clipped));
}

double lsq_dequantize(int q, double s) { return q * s; }

double lsq_scale_gradient(double r, double s, int q_n, int q_p) {
  if (!(s > 0.0)) throw DomainError("lsq_scale_gradient: scale must be positive");
  const double v = r / s;
  if (v <= -static_cast<double>(q_n)) return -static_cast<double>(q_n);
  if (v >= static_cast<double>(q_p)) return static_cast<double>(q_p);
  return -v + round_half_away(v);
}

double lsq_passthrough_gradient(double r, double s, int q_n, int q_p) {
  if (!(s > 0.0)) throw DomainError("lsq_passthrough_gradient: scale must be positive");
  const double v = r / s;
  if (v <= -static_cast<double>(q_n) || v >= static_cast<double>(q_p)) return 0.0;
  return 1.0;
}

double lsq_weight_scale_init(const Eigen::ArrayXd& w, int q_p) {
  if (w.size() == 0) throw EmptyError("lsq_weight_scale_init: empty weight set");
  const double m = w.abs().maxCoeff();
  if (m == 0.0) return 1.0;
  return m / static_cast<double>(q_p);
}

RewiredParam rewire_init(Eigen::Index n, double sigma, std::mt19937_64& rng) {
  if (n <= 0) throw EmptyError("rewire_init: empty parameter");
  if (!(sigma > 0.0)) throw DomainError("rewire_init: sigma must be positive");
  RewiredParam p;
  p.theta.resize(n);
  p.sign.resize(n);
  std::normal_distribution<double> gauss(0.0, sigma);
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.theta[i] = gauss(rng);
    p.sign[i] = coin(rng) ? 1.0 : -1.0;
  }
  return p;
}

Eigen::ArrayXd rewire_forward(const RewiredParam& p) {
  if (p.theta.size() != p.sign.size())
    throw ShapeError("rewire_forward: theta/sign size mismatch");
  return p.sign * p.theta.max(0.0);
}

Eigen::ArrayXd rewire_backward(const RewiredParam& p, const Eigen::ArrayXd& grad_w,
                               double lambda) {
  if (p.theta.size() != p.sign.size() || p.theta.size() != grad_w.size())
    throw ShapeError("rewire_backward: size mismatch");
  const Eigen::ArrayXd gate = (p.theta > 0.0).cast<double>();
  return p.sign * grad_w * gate + lambda * p.theta;
}

QuantizedLayer quantize_layer_scaled(const RealLayer& layer, const QuantConfig& wq,
                                     const std::vector<double>& scales) {
  const std::size_t klen = layer.kernel_len();
  if (layer.c_o == 0 || klen == 0) throw EmptyError("quantize_layer: empty layer");
  if (layer.weights.size() != static_cast<std::size_t>(layer.c_o) * klen ||
      layer.bias.size() != layer.c_o || layer.threshold.size() != layer.c_o)
    throw ShapeError("quantize_layer: array sizes disagree with geometry");
  if (scales.size() != layer.c_o)
    throw ShapeError("quantize_layer: one scale per output channel");

  QuantizedLayer q;
  q.kind = layer.kind;
  q.model = layer.model;
  q.padding = layer.padding;
  q.maxpool = layer.maxpool;
  q.c_i = layer.c_i;
  q.c_o = layer.c_o;
  q.k_h = layer.k_h;
  q.k_w = layer.k_w;
  q.t = layer.t;
  q.weights.resize(layer.weights.size());
  q.bias.resize(layer.c_o);
  q.threshold.resize(layer.c_o);

  for (std::uint16_t co = 0; co < layer.c_o; ++co) {
    const double s = scales[co];
    for (std::size_t i = 0; i < klen; ++i)
      q.weights[co * klen + i] =
          static_cast<std::int8_t>(lsq_quantize(layer.weights[co * klen + i], s, wq.q_n, wq.q_p));
    q.bias[co] = static_cast<std::int16_t>(lsq_quantize(layer.bias[co], s, kWideQn, kWideQp));
    q.threshold[co] =
        static_cast<std::int16_t>(lsq_quantize(layer.threshold[co], s, kWideQn, kWideQp));
  }
  return q;
}

QuantizedLayer quantize_layer(const RealLayer& layer, const QuantConfig& wq,
                              std::vector<double>* scales_out) {
  const std::size_t klen = layer.kernel_len();
  if (layer.c_o == 0 || klen == 0) throw EmptyError("quantize_layer: empty layer");
  if (layer.weights.size() != static_cast<std::size_t>(layer.c_o) * klen)
    throw ShapeError("quantize_layer: array sizes disagree with geometry");
  std::vector<double> scales(layer.c_o, 1.0);
  for (std::uint16_t co = 0; co < layer.c_o; ++co) {
    Eigen::ArrayXd w(static_cast<Eigen::Index>(klen));
    for (std::size_t i = 0; i < klen; ++i)
      w[static_cast<Eigen::Index>(i)] = layer.weights[co * klen + i];
    scales[co] = lsq_weight_scale_init(w, wq.q_p);
  }
  if (scales_out) *scales_out = scales;
  return quantize_layer_scaled(layer, wq, scales);
}

bool channel_active_by_accumulation(std::int32_t bias, std::int32_t threshold,
                                    std::uint32_t t) {
  if (t == 0) throw DomainError("channel_active_by_accumulation: zero timesteps");
  std::int64_t v = 0;
  for (std::uint32_t step = 0; step < t; ++step) {
    v += bias;
    if (v > threshold) return true;
  }
  return false;
}

std::vector<std::uint16_t> accumulation_active_channels(
    const std::vector<std::int16_t>& bias, const std::vector<std::int16_t>& threshold,
    std::uint32_t t) {
  if (t < 1) throw DomainError("accumulation_active_channels: t < 1");
  if (bias.size() != threshold.size())
    throw ShapeError("accumulation_active_channels: array length mismatch");
  std::vector<std::uint16_t> active;
  for (std::size_t c = 0; c < bias.size(); ++c)
    if (channel_active_by_accumulation(bias[c], threshold[c], t))
      active.push_back(static_cast<std::uint16_t>(c));
  return active;
}

bool channel_fires_zero_input(NeuronModel model, std::int32_t bias,
                              std::int32_t threshold, std::uint32_t t) {
  NeuronParams params{model, threshold, bias};
  NeuronState st;
  for (std::uint32_t step = 0; step < t; ++step)
    if (neuron_step(st, bias, params)) return true;
  return false;
}

PruneResult prune_silent_channels(const QuantizedNetwork& net) {
  PruneResult res;
  res.net = net;
  if (res.net.layers.size() < 2) return res;  // nothing internal to prune

  for (std::size_t l = 0; l + 1 < res.net.layers.size(); ++l) {
    QuantizedLayer& cur = res.net.layers[l];
    QuantizedLayer& next = res.net.layers[l + 1];
    const std::size_t klen = cur.kernel_len();

    std::vector<bool> keep(cur.c_o, true);
    std::size_t kept = cur.c_o;
    for (std::uint16_t co = 0; co < cur.c_o; ++co) {
      bool all_zero = true;
      for (std::size_t i = 0; i < klen && all_zero; ++i)
        if (cur.weights[co * klen + i] != 0) all_zero = false;
      if (!all_zero) continue;
      ChannelAudit row;
      row.layer = l;
      row.channel = co;
      row.accumulation_active =
          channel_active_by_accumulation(cur.bias[co], cur.threshold[co], cur.t);
      row.fires_zero_input =
          channel_fires_zero_input(cur.model, cur.bias[co], cur.threshold[co], cur.t);
      row.removed = !row.accumulation_active && !row.fires_zero_input && kept > 1;
      if (row.removed) {
        keep[co] = false;
        --kept;
      }
      res.audit.push_back(row);
    }
    if (kept == cur.c_o) continue;

    // Compact this layer's output channels.
    {
      std::vector<std::int8_t> w;
      std::vector<std::int16_t> b, th;
      w.reserve(kept * klen);
      for (std::uint16_t co = 0; co < cur.c_o; ++co) {
        if (!keep[co]) continue;
        w.insert(w.end(), cur.weights.begin() + co * klen,
                 cur.weights.begin() + (co + 1) * klen);
        b.push_back(cur.bias[co]);
        th.push_back(cur.threshold[co]);
      }
      cur.weights = std::move(w);
      cur.bias = std::move(b);
      cur.threshold = std::move(th);
      cur.c_o = static_cast<std::uint16_t>(kept);
    }

    // Strip the dead input slices from the consumer.
    {
      const std::size_t nk = static_cast<std::size_t>(next.k_h) * next.k_w;
      std::vector<std::int8_t> w;
      w.reserve(static_cast<std::size_t>(next.c_o) * nk * kept);
      for (std::uint16_t co = 0; co < next.c_o; ++co)
        for (std::size_t pos = 0; pos < nk; ++pos)
          for (std::uint16_t ci = 0; ci < next.c_i; ++ci) {
            if (!keep[ci]) continue;
            w.push_back(next.weights[(co * nk + pos) * next.c_i + ci]);
          }
      next.weights = std::move(w);
      next.c_i = static_cast<std::uint16_t>(kept);
    }
  }
  return res;
}

}  // namespace dss
