#include "dss/toy_train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>

namespace dss {

SyntheticTask make_synthetic_task(const SyntheticTaskConfig& cfg) {
  if (cfg.features == 0 || cfg.classes == 0 || cfg.samples_per_class == 0 || cfg.t == 0)
    throw EmptyError("make_synthetic_task: empty dimension");
  if (cfg.flip_prob < 0.0 || cfg.flip_prob >= 0.5)
    throw DomainError("make_synthetic_task: flip probability outside [0, 0.5)");

  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution half(0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::uint8_t> prototypes(cfg.classes * cfg.features);
  for (auto& b : prototypes) b = half(rng) ? 1 : 0;

  SyntheticTask task;
  task.features = cfg.features;
  task.classes = cfg.classes;
  task.t = cfg.t;
  task.count = static_cast<std::size_t>(cfg.classes) * cfg.samples_per_class;
  task.spikes.assign(task.count * cfg.t * cfg.features, 0);
  task.labels.resize(task.count);

  for (std::size_t n = 0; n < task.count; ++n) {
    const std::uint32_t cls = static_cast<std::uint32_t>(n % cfg.classes);
    task.labels[n] = static_cast<std::uint8_t>(cls);
    for (std::uint32_t f = 0; f < cfg.features; ++f) {
      std::uint8_t bit = prototypes[cls * cfg.features + f];
      if (unit(rng) < cfg.flip_prob) bit ^= 1;
      if (!bit) continue;
      for (std::uint32_t step = 0; step < cfg.t; ++step)
        task.spikes[(n * cfg.t + step) * cfg.features + f] = 1;
    }
  }
  return task;
}

namespace {

struct AdamState {
  Eigen::ArrayXd m, v;
  explicit AdamState(Eigen::Index n) : m(Eigen::ArrayXd::Zero(n)), v(Eigen::ArrayXd::Zero(n)) {}
};

void adam_step(Eigen::ArrayXd& param, const Eigen::ArrayXd& grad, AdamState& st,
               double lr, long step) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  st.m = b1 * st.m + (1.0 - b1) * grad;
  st.v = b2 * st.v + (1.0 - b2) * grad * grad;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  param -= lr * (st.m / c1) / ((st.v / c2).sqrt() + eps);
}

// One fully-connected spiking layer under training.
struct TrainLayer {
  Eigen::Index in = 0, out = 0;
  RewiredParam p;          // theta/sign, flattened row-major (out x in)
  Eigen::ArrayXd bias, thresh, scale;
  Eigen::MatrixXd w_fq;    // fake-quantized effective weights

  AdamState a_theta, a_bias, a_thresh, a_scale;

  TrainLayer(Eigen::Index in_, Eigen::Index out_, double sigma, std::mt19937_64& rng,
             const QuantConfig& qc)
      : in(in_),
        out(out_),
        p(rewire_init(in_ * out_, sigma, rng)),
        bias(Eigen::ArrayXd::Zero(out_)),
        thresh(Eigen::ArrayXd::Constant(out_, 0.5)),
        scale(Eigen::ArrayXd::Ones(out_)),
        w_fq(out_, in_),
        a_theta(in_ * out_),
        a_bias(out_),
        a_thresh(out_),
        a_scale(out_) {
    const Eigen::ArrayXd w = rewire_forward(p);
    for (Eigen::Index i = 0; i < out; ++i) {
      Eigen::ArrayXd row = w.segment(i * in, in);
      scale[i] = lsq_weight_scale_init(row, qc.q_p);
    }
    refresh(qc);
  }

  void refresh(const QuantConfig& qc) {
    const Eigen::ArrayXd w = rewire_forward(p);
    for (Eigen::Index i = 0; i < out; ++i)
      for (Eigen::Index j = 0; j < in; ++j)
        w_fq(i, j) = lsq_dequantize(lsq_quantize(w[i * in + j], scale[i], qc.q_n, qc.q_p),
                                    scale[i]);
  }
};

struct StepTape {
  Eigen::ArrayXd s1, g1, s2, g2;
};

}  // namespace

ToyTrainResult toy_train_prune(const SyntheticTask& task, const ToyTrainConfig& cfg) {
  if (task.count == 0) throw EmptyError("toy_train_prune: empty task");
  if (cfg.hidden == 0 || cfg.batch == 0) throw DomainError("toy_train_prune: empty config");
  const QuantConfig qc = quant_config(cfg.bits);
  const Eigen::Index nf = task.features, nh = cfg.hidden, nc = task.classes;
  const std::uint32_t T = task.t;

  std::mt19937_64 rng(cfg.seed);
  TrainLayer l1(nf, nh, cfg.sigma, rng, qc);
  TrainLayer l2(nh, nc, cfg.sigma, rng, qc);
  const double g_lsq1 = 1.0 / std::sqrt(static_cast<double>(nf) * qc.q_p);
  const double g_lsq2 = 1.0 / std::sqrt(static_cast<double>(nh) * qc.q_p);

  std::vector<Eigen::VectorXd> inputs(task.count * T, Eigen::VectorXd(nf));
  for (std::size_t n = 0; n < task.count; ++n)
    for (std::uint32_t t = 0; t < T; ++t)
      for (Eigen::Index f = 0; f < nf; ++f)
        inputs[n * T + t][f] = task.spike(n, t, static_cast<std::uint32_t>(f));

  // Rectangular surrogate of width 1 around the threshold.
  auto gate = [](const Eigen::ArrayXd& v, const Eigen::ArrayXd& th) {
    return ((v - th).abs() < 0.5).cast<double>().eval();
  };

  std::vector<StepTape> tape(T);
  std::vector<std::size_t> order(task.count);
  std::iota(order.begin(), order.end(), 0);

  long adam_t = 0;
  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < task.count; start += cfg.batch) {
      const std::size_t stop = std::min(task.count, start + cfg.batch);
      const double inv_b = 1.0 / static_cast<double>(stop - start);

      Eigen::MatrixXd dW1 = Eigen::MatrixXd::Zero(nh, nf);
      Eigen::MatrixXd dW2 = Eigen::MatrixXd::Zero(nc, nh);
      Eigen::ArrayXd db1 = Eigen::ArrayXd::Zero(nh), db2 = Eigen::ArrayXd::Zero(nc);
      Eigen::ArrayXd dth1 = Eigen::ArrayXd::Zero(nh), dth2 = Eigen::ArrayXd::Zero(nc);
      double batch_loss = 0.0;

      for (std::size_t bi = start; bi < stop; ++bi) {
        const std::size_t n = order[bi];
        Eigen::ArrayXd v1 = Eigen::ArrayXd::Zero(nh), v2 = Eigen::ArrayXd::Zero(nc);
        Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(nc);
        for (std::uint32_t t = 0; t < T; ++t) {
          const Eigen::VectorXd& x = inputs[n * T + t];
          const Eigen::ArrayXd i1 = (l1.w_fq * x).array() + l1.bias;
          const Eigen::ArrayXd vh1 = 0.5 * (v1 + i1);
          tape[t].g1 = gate(vh1, l1.thresh);
          tape[t].s1 = (vh1 > l1.thresh).cast<double>();
          v1 = vh1 * (1.0 - tape[t].s1);
          const Eigen::ArrayXd i2 = (l2.w_fq * tape[t].s1.matrix()).array() + l2.bias;
          const Eigen::ArrayXd vh2 = 0.5 * (v2 + i2);
          tape[t].g2 = gate(vh2, l2.thresh);
          tape[t].s2 = (vh2 > l2.thresh).cast<double>();
          v2 = vh2 * (1.0 - tape[t].s2);
          counts += tape[t].s2;
        }
        const Eigen::ArrayXd z = counts - counts.maxCoeff();
        const Eigen::ArrayXd ez = z.exp();
        const Eigen::ArrayXd prob = ez / ez.sum();
        batch_loss -= std::log(std::max(prob[task.labels[n]], 1e-300));
        Eigen::ArrayXd dz = prob;
        dz[task.labels[n]] -= 1.0;

        Eigen::ArrayXd dv1 = Eigen::ArrayXd::Zero(nh), dv2 = Eigen::ArrayXd::Zero(nc);
        for (std::uint32_t ti = T; ti-- > 0;) {
          const StepTape& tp = tape[ti];
          const Eigen::ArrayXd ds2 = dz;  // every step's spike adds one count
          const Eigen::ArrayXd dvh2 = dv2 * (1.0 - tp.s2) + ds2 * tp.g2;
          dth2 -= ds2 * tp.g2;
          const Eigen::ArrayXd di2 = 0.5 * dvh2;
          dv2 = 0.5 * dvh2;
          dW2 += di2.matrix() * tp.s1.matrix().transpose();
          db2 += di2;
          const Eigen::ArrayXd ds1 = (l2.w_fq.transpose() * di2.matrix()).array();
          const Eigen::ArrayXd dvh1 = dv1 * (1.0 - tp.s1) + ds1 * tp.g1;
          dth1 -= ds1 * tp.g1;
          const Eigen::ArrayXd di1 = 0.5 * dvh1;
          dv1 = 0.5 * dvh1;
          dW1 += di1.matrix() * inputs[n * T + ti].transpose();
          db1 += di1;
        }
      }

      if (!std::isfinite(batch_loss))
        throw TrainingError("toy_train_prune: loss diverged (NaN/Inf)");

      ++adam_t;
      auto apply = [&](TrainLayer& l, Eigen::MatrixXd& dWfq, Eigen::ArrayXd& db,
                       Eigen::ArrayXd& dth, double g_lsq) {
        const Eigen::ArrayXd w = rewire_forward(l.p);
        Eigen::ArrayXd grad_w(l.in * l.out);
        Eigen::ArrayXd grad_s = Eigen::ArrayXd::Zero(l.out);
        for (Eigen::Index i = 0; i < l.out; ++i)
          for (Eigen::Index j = 0; j < l.in; ++j) {
            const double g = dWfq(i, j) * inv_b;
            const double we = w[i * l.in + j];
            grad_w[i * l.in + j] =
                g * lsq_passthrough_gradient(we, l.scale[i], qc.q_n, qc.q_p);
            grad_s[i] += g * lsq_scale_gradient(we, l.scale[i], qc.q_n, qc.q_p) * g_lsq;
          }
        const Eigen::ArrayXd grad_theta = rewire_backward(l.p, grad_w, 0.0);
        adam_step(l.p.theta, grad_theta, l.a_theta, cfg.lr, adam_t);
        Eigen::ArrayXd gb = db * inv_b, gth = dth * inv_b;
        adam_step(l.bias, gb, l.a_bias, cfg.lr, adam_t);
        adam_step(l.thresh, gth, l.a_thresh, cfg.lr, adam_t);
        adam_step(l.scale, grad_s, l.a_scale, cfg.lr, adam_t);
        // decay pulls theta toward zero outside the adaptive step
        l.p.theta -= cfg.lr * cfg.lambda * l.p.theta;
        l.scale = l.scale.max(1e-6);
        l.refresh(qc);
      };
      apply(l1, dW1, db1, dth1, g_lsq1);
      apply(l2, dW2, db2, dth2, g_lsq2);
    }
  }

  // Evaluation pass: mean loss and spike densities with the final weights.
  double total_loss = 0.0;
  double spikes1 = 0.0, spikes2 = 0.0;
  for (std::size_t n = 0; n < task.count; ++n) {
    Eigen::ArrayXd v1 = Eigen::ArrayXd::Zero(nh), v2 = Eigen::ArrayXd::Zero(nc);
    Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(nc);
    for (std::uint32_t t = 0; t < T; ++t) {
      const Eigen::VectorXd& x = inputs[n * T + t];
      const Eigen::ArrayXd vh1 = 0.5 * (v1 + (l1.w_fq * x).array() + l1.bias);
      const Eigen::ArrayXd s1 = (vh1 > l1.thresh).cast<double>();
      v1 = vh1 * (1.0 - s1);
      const Eigen::ArrayXd vh2 = 0.5 * (v2 + (l2.w_fq * s1.matrix()).array() + l2.bias);
      const Eigen::ArrayXd s2 = (vh2 > l2.thresh).cast<double>();
      v2 = vh2 * (1.0 - s2);
      counts += s2;
      spikes1 += s1.sum();
      spikes2 += s2.sum();
    }
    const Eigen::ArrayXd z = counts - counts.maxCoeff();
    const Eigen::ArrayXd ez = z.exp();
    total_loss -= std::log(std::max(ez[task.labels[n]] / ez.sum(), 1e-300));
  }

  ToyTrainResult res;
  res.final_loss = total_loss / static_cast<double>(task.count);
  const double np1 = static_cast<double>((l1.p.theta <= 0.0).count());
  const double np2 = static_cast<double>((l2.p.theta <= 0.0).count());
  res.theta_nonpositive_fraction =
      (np1 + np2) / static_cast<double>(l1.p.theta.size() + l2.p.theta.size());

  auto export_layer = [&](const TrainLayer& l, bool last) {
    RealLayer rl;
    rl.kind = LayerKind::kFc;
    rl.model = NeuronModel::kLIF;
    rl.padding = PaddingMode::kValid;
    rl.maxpool = false;
    rl.c_i = static_cast<std::uint16_t>(l.in);
    rl.c_o = static_cast<std::uint16_t>(l.out);
    rl.k_h = 1;
    rl.k_w = 1;
    rl.t = static_cast<std::uint16_t>(T);
    const Eigen::ArrayXd w = rewire_forward(l.p);
    rl.weights.assign(w.data(), w.data() + w.size());
    rl.bias.assign(l.bias.data(), l.bias.data() + l.bias.size());
    rl.threshold.assign(l.thresh.data(), l.thresh.data() + l.thresh.size());
    (void)last;
    std::vector<double> scales(l.scale.data(), l.scale.data() + l.scale.size());
    return quantize_layer_scaled(rl, qc, scales);
  };

  res.net.in_h = 1;
  res.net.in_w = 1;
  res.net.in_c = static_cast<std::uint16_t>(nf);
  res.net.t = static_cast<std::uint16_t>(T);
  res.net.layers.push_back(export_layer(l1, false));
  res.net.layers.push_back(export_layer(l2, true));

  std::size_t zeros_total = 0, weights_total = 0;
  const double denom1 = static_cast<double>(task.count) * T * static_cast<double>(nh);
  const double denom2 = static_cast<double>(task.count) * T * static_cast<double>(nc);
  const double dens[2] = {spikes1 / denom1, spikes2 / denom2};
  for (std::size_t li = 0; li < res.net.layers.size(); ++li) {
    const auto& ql = res.net.layers[li];
    std::size_t zeros = 0;
    for (std::int8_t wq : ql.weights)
      if (wq == 0) ++zeros;
    zeros_total += zeros;
    weights_total += ql.weights.size();
    LayerReport row;
    row.layer = li;
    row.weight_sparsity = static_cast<double>(zeros) / static_cast<double>(ql.weights.size());
    row.spike_sparsity_estimate = 1.0 - dens[li];
    res.report.push_back(row);
  }
  res.weight_sparsity_total =
      static_cast<double>(zeros_total) / static_cast<double>(weights_total);
  return res;
}

void write_sparsity_csv(std::ostream& os, const std::vector<LayerReport>& rows) {
  os << "layer,weight_sparsity,spike_sparsity_estimate\n";
  for (const auto& r : rows)
    os << r.layer << ',' << r.weight_sparsity << ',' << r.spike_sparsity_estimate << '\n';
}

}  // namespace dss
