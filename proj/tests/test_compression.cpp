#include "doctest.h"

#include <random>

#include "dss/compression.hpp"
#include "dss/dense_reference.hpp"
#include "dss/random_nets.hpp"

using namespace dss;

TEST_CASE("rounding ties go away from zero") {
  CHECK(round_half_away(0.5) == 1.0);
  CHECK(round_half_away(-0.5) == -1.0);
  CHECK(round_half_away(1.5) == 2.0);
  CHECK(round_half_away(2.4) == 2.0);
  CHECK(round_half_away(-2.5) == -3.0);
  CHECK(round_half_away(0.0) == 0.0);
}

TEST_CASE("quantizer levels and clipping") {
  CHECK(lsq_quantize(0.0, 0.37, 8, 7) == 0);
  CHECK(lsq_quantize(100.0, 1.0, 8, 7) == 7);
  CHECK(lsq_quantize(-100.0, 1.0, 8, 7) == -8);
  CHECK(lsq_quantize(2.3, 0.5, 8, 7) == 5);  // round(4.6)
  CHECK(lsq_dequantize(5, 0.5) == doctest::Approx(2.5));
  CHECK_THROWS_AS(lsq_quantize(1.0, 0.0, 8, 7), DomainError);
  CHECK_THROWS_AS(lsq_quantize(1.0, -0.5, 8, 7), DomainError);
}

TEST_CASE("scale gradient: in-range rounding residue, clipped saturation") {
  CHECK(lsq_scale_gradient(2.3, 0.5, 8, 7) == doctest::Approx(0.4));  // -4.6 + 5
  CHECK(lsq_scale_gradient(100.0, 1.0, 8, 7) == doctest::Approx(7.0));
  CHECK(lsq_scale_gradient(-100.0, 1.0, 8, 7) == doctest::Approx(-8.0));
  // exactly at the clip boundary counts as clipped
  CHECK(lsq_scale_gradient(7.0, 1.0, 8, 7) == doctest::Approx(7.0));
  CHECK(lsq_scale_gradient(-8.0, 1.0, 8, 7) == doctest::Approx(-8.0));
}

TEST_CASE("pass-through gradient gates on the clip range") {
  CHECK(lsq_passthrough_gradient(2.3, 0.5, 8, 7) == 1.0);
  CHECK(lsq_passthrough_gradient(100.0, 1.0, 8, 7) == 0.0);
  CHECK(lsq_passthrough_gradient(-100.0, 1.0, 8, 7) == 0.0);
}

TEST_CASE("bit-width table") {
  const QuantConfig q4 = quant_config(4);
  CHECK(q4.q_n == 8);
  CHECK(q4.q_p == 7);
  const QuantConfig q2 = quant_config(2);
  CHECK(q2.q_n == 2);
  CHECK(q2.q_p == 1);
  const QuantConfig q8 = quant_config(8);
  CHECK(q8.q_n == 128);
  CHECK(q8.q_p == 127);
  CHECK_THROWS_AS(quant_config(1), DomainError);
  CHECK_THROWS_AS(quant_config(9), DomainError);
}

TEST_CASE("rewiring forward") {
  RewiredParam p;
  p.theta = Eigen::ArrayXd(3);
  p.sign = Eigen::ArrayXd(3);
  p.theta << 0.5, -0.3, 0.0;
  p.sign << -1, 1, 1;
  const Eigen::ArrayXd w = rewire_forward(p);
  CHECK(w(0) == doctest::Approx(-0.5));
  CHECK(w(1) == 0.0);
  CHECK(w(2) == 0.0);
}

TEST_CASE("rewiring backward") {
  RewiredParam p;
  p.theta = Eigen::ArrayXd(3);
  p.sign = Eigen::ArrayXd(3);
  p.theta << 0.5, -0.3, 1.0;
  p.sign << -1, 1, 1;
  Eigen::ArrayXd g(3);
  g << 2.0, 5.0, 0.0;

  const Eigen::ArrayXd no_decay = rewire_backward(p, g, 0.0);
  CHECK(no_decay(0) == doctest::Approx(-2.0));
  CHECK(no_decay(1) == 0.0);  // dead region passes nothing
  CHECK(no_decay(2) == 0.0);

  const Eigen::ArrayXd decayed = rewire_backward(p, g, 0.01);
  CHECK(decayed(2) == doctest::Approx(0.01));  // decay-only term
  CHECK(decayed(1) == doctest::Approx(-0.003));

  Eigen::ArrayXd wrong(2);
  CHECK_THROWS_AS(rewire_backward(p, wrong, 0.0), ShapeError);
}

TEST_CASE("init splits signs evenly and prunes about half") {
  std::mt19937_64 rng(5);
  const RewiredParam p = rewire_init(4000, 0.5, rng);
  const double frac_neg_theta = (p.theta <= 0.0).count() / 4000.0;
  CHECK(frac_neg_theta > 0.45);
  CHECK(frac_neg_theta < 0.55);
  for (Eigen::Index i = 0; i < p.sign.size(); ++i)
    CHECK((p.sign(i) == 1.0 || p.sign(i) == -1.0));
}

TEST_CASE("layer quantization with the max-magnitude scale") {
  RealLayer l;
  l.kind = LayerKind::kFc;
  l.c_i = 3;
  l.c_o = 1;
  l.k_h = 1;
  l.k_w = 1;
  l.t = 2;
  l.weights = {-0.5, 0.25, 0.0};
  l.bias = {0.0};
  l.threshold = {1.0};
  std::vector<double> scales;
  const QuantizedLayer q = quantize_layer(l, quant_config(4), &scales);
  REQUIRE(scales.size() == 1);
  CHECK(scales[0] == doctest::Approx(0.5 / 7));
  CHECK(q.weights[0] == -7);
  CHECK(q.weights[1] == 4);  // 0.25/(0.5/7) = 3.5 rounds away to 4
  CHECK(q.weights[2] == 0);
  CHECK(q.threshold[0] == 14);  // 1.0 on the same channel scale
  CHECK(q.bias[0] == 0);
}

TEST_CASE("an all-zero channel falls back to unit scale") {
  RealLayer l;
  l.kind = LayerKind::kFc;
  l.c_i = 2;
  l.c_o = 2;
  l.k_h = 1;
  l.k_w = 1;
  l.t = 1;
  l.weights = {0.0, 0.0, 0.3, -0.6};
  l.bias = {2.0, 0.0};
  l.threshold = {1.0, 1.0};
  std::vector<double> scales;
  const QuantizedLayer q = quantize_layer(l, quant_config(4), &scales);
  CHECK(scales[0] == doctest::Approx(1.0));
  CHECK(q.bias[0] == 2);
  CHECK(scales[1] == doctest::Approx(0.6 / 7));
}

TEST_CASE("accumulation activity test") {
  CHECK_FALSE(channel_active_by_accumulation(0, 1, 4));
  CHECK(channel_active_by_accumulation(2, 5, 3));       // 3*2 = 6 > 5
  CHECK_FALSE(channel_active_by_accumulation(1, 4, 4)); // 4*1 = 4, strict
  CHECK(channel_active_by_accumulation(5, 4, 1));
  CHECK_FALSE(channel_active_by_accumulation(-3, 2, 8));
  CHECK(channel_active_by_accumulation(1, 0, 1));       // 1 > 0
  CHECK_THROWS_AS(channel_active_by_accumulation(1, 1, 0), DomainError);

  const auto active = accumulation_active_channels({0, 2, 1}, {1, 5, 4}, 3);
  REQUIRE(active.size() == 1);
  CHECK(active[0] == 1);
  CHECK_THROWS_AS(accumulation_active_channels({1}, {1, 2}, 3), ShapeError);
}

TEST_CASE("exhaustive agreement between the closed form and a rollout") {
  for (int b = -4; b <= 4; ++b)
    for (int th = 0; th <= 8; ++th)
      for (std::uint32_t t = 1; t <= 8; ++t) {
        bool rolled = false;
        std::int64_t v = 0;
        for (std::uint32_t k = 0; k < t && !rolled; ++k) {
          v += b;
          if (v > th) rolled = true;
        }
        CHECK(channel_active_by_accumulation(b, th, t) == rolled);
      }
}

TEST_CASE("zero-input rollout covers leak dynamics the accumulation test misses") {
  // LIF with negative threshold: bias -4 leaks to -2, above -3
  CHECK(channel_fires_zero_input(NeuronModel::kLIF, -4, -3, 1));
  CHECK_FALSE(channel_active_by_accumulation(-4, 0, 1));
  // IF matches the accumulation test exactly on nonnegative thresholds
  for (int b = -4; b <= 4; ++b)
    for (int th = 0; th <= 6; ++th)
      for (std::uint32_t t = 1; t <= 6; ++t)
        CHECK(channel_fires_zero_input(NeuronModel::kIF, b, th, t) ==
              channel_active_by_accumulation(b, th, t));
}

namespace {

QuantizedNetwork with_silenced_channel(std::uint64_t seed, std::int16_t bias,
                                       std::int16_t threshold) {
  RandomNetSpec spec;
  spec.seed = seed;
  spec.max_layers = 2;
  QuantizedNetwork net = make_random_network(spec);
  if (net.layers.size() < 2 || net.layers.front().c_o < 2) {
    spec.seed = seed + 1000;
    return with_silenced_channel(spec.seed, bias, threshold);
  }
  QuantizedLayer& l = net.layers.front();
  const std::size_t len = l.kernel_len();
  for (std::size_t j = 0; j < len; ++j) l.weights[j] = 0;  // channel 0 goes dark
  l.bias[0] = bias;
  l.threshold[0] = threshold;
  return net;
}

}  // namespace

TEST_CASE("silent channels are removed without changing any output bit") {
  int removed_nets = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const QuantizedNetwork net = with_silenced_channel(seed, 0, 3);
    const PruneResult pr = prune_silent_channels(net);
    REQUIRE(pr.audit.size() >= 1);
    bool audited = false;
    for (const auto& a : pr.audit)
      if (a.layer == 0 && a.channel == 0) {
        audited = true;
        CHECK_FALSE(a.accumulation_active);
        CHECK_FALSE(a.fires_zero_input);
        CHECK(a.removed);
      }
    CHECK(audited);
    if (pr.net.layers.front().c_o < net.layers.front().c_o) ++removed_nets;

    for (int i = 0; i < 3; ++i) {
      const SpikeTensor in = random_spikes(net.in_h, net.in_w, net.in_c, net.t,
                                           0.1 + 0.2 * i, 900 + seed * 10 + i);
      CHECK(run_network_dense(pr.net, in) == run_network_dense(net, in));
    }
  }
  CHECK(removed_nets == 30);
}

TEST_CASE("an active-bias channel survives pruning") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    // bias 2 against threshold 1 fires immediately: not removable
    const QuantizedNetwork net = with_silenced_channel(seed, 2, 1);
    const PruneResult pr = prune_silent_channels(net);
    CHECK(pr.net.layers.front().c_o == net.layers.front().c_o);
    for (const auto& a : pr.audit)
      if (a.layer == 0 && a.channel == 0) CHECK_FALSE(a.removed);
    const SpikeTensor in =
        random_spikes(net.in_h, net.in_w, net.in_c, net.t, 0.3, 1234 + seed);
    CHECK(run_network_dense(pr.net, in) == run_network_dense(net, in));
  }
}

TEST_CASE("the last channel of a layer is never removed") {
  RandomNetSpec spec;
  spec.seed = 3;
  spec.max_layers = 2;
  QuantizedNetwork net = make_random_network(spec);
  while (net.layers.size() < 2) {
    ++spec.seed;
    net = make_random_network(spec);
  }
  QuantizedLayer& l = net.layers.front();
  std::fill(l.weights.begin(), l.weights.end(), static_cast<std::int8_t>(0));
  for (std::uint32_t ch = 0; ch < l.c_o; ++ch) {
    l.bias[ch] = 0;
    l.threshold[ch] = 5;
  }
  const PruneResult pr = prune_silent_channels(net);
  CHECK(pr.net.layers.front().c_o == 1);
  const SpikeTensor in = random_spikes(net.in_h, net.in_w, net.in_c, net.t, 0.4, 77);
  CHECK(run_network_dense(pr.net, in) == run_network_dense(net, in));
}

TEST_CASE("final-layer channels are exempt from removal") {
  RandomNetSpec spec;
  spec.seed = 8;
  spec.max_layers = 1;
  QuantizedNetwork net = make_random_network(spec);
  QuantizedLayer& l = net.layers.back();
  const std::size_t len = l.kernel_len();
  for (std::size_t j = 0; j < len; ++j) l.weights[j] = 0;
  l.bias[0] = 0;
  l.threshold[0] = 5;
  const PruneResult pr = prune_silent_channels(net);
  CHECK(pr.net.layers.back().c_o == net.layers.back().c_o);
}
