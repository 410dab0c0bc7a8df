#include "doctest.h"

#include <cstdint>
#include <limits>
#include <vector>

#include "dss/neuron.hpp"

using namespace dss;

TEST_CASE("current integration") {
  const std::int8_t w[] = {3, -2, 5};
  const std::uint8_t s[] = {1, 0, 1};
  CHECK(integrate_current(w, s, 3, 1) == 9);

  const std::uint8_t bad[] = {1, 2, 1};
  CHECK_THROWS_AS(integrate_current(w, bad, 3, 0), DomainError);
}

TEST_CASE("current integration overflow is caught") {
  const std::int32_t big = std::numeric_limits<std::int32_t>::max();
  const std::int8_t w[] = {1};
  const std::uint8_t s[] = {1};
  CHECK_THROWS_AS(integrate_current(w, s, 1, big), OverflowError);
}

TEST_CASE("IF step adds the full current") {
  NeuronParams p;
  p.model = NeuronModel::kIF;
  p.v_threshold = 4;
  NeuronState st;
  st.v = 3;
  CHECK(neuron_step(st, 2, p) == 1);  // 3 + 2 = 5 > 4
  CHECK(st.v == 0);                   // reset after firing
  CHECK(neuron_step(st, 4, p) == 0);  // v' = 4, strict comparison holds it
  CHECK(st.v == 4);
}

TEST_CASE("LIF step halves the gap with floor semantics") {
  NeuronParams p;
  p.model = NeuronModel::kLIF;
  p.v_threshold = 10;
  NeuronState st;
  st.v = 0;
  CHECK(neuron_step(st, 4, p) == 0);
  CHECK(st.v == 2);  // 0 + floor((4-0)/2)

  st.v = 0;
  CHECK(neuron_step(st, -3, p) == 0);
  CHECK(st.v == -2);  // floor(-3/2) = -2, not -1

  st.v = 5;
  CHECK(neuron_step(st, 2, p) == 0);
  CHECK(st.v == 3);  // 5 + floor((2-5)/2) = 5 - 2
}

TEST_CASE("floor_div2 is an arithmetic shift") {
  CHECK(floor_div2(7) == 3);
  CHECK(floor_div2(-7) == -4);
  CHECK(floor_div2(-1) == -1);
  CHECK(floor_div2(0) == 0);
}

TEST_CASE("threshold comparison is strict") {
  NeuronParams p;
  p.model = NeuronModel::kIF;
  p.v_threshold = 0;
  NeuronState st;
  st.v = 0;
  CHECK(neuron_step(st, 0, p) == 0);  // v' = 0 is not > 0
  CHECK(neuron_step(st, 1, p) == 1);
  CHECK(st.v == 0);
}

TEST_CASE("negative thresholds fire on equality-free crossing") {
  NeuronParams p;
  p.model = NeuronModel::kLIF;
  p.v_threshold = -3;
  NeuronState st;
  st.v = 0;
  // v' = floor(-4/2) = -2 > -3: fires even though the current is negative
  CHECK(neuron_step(st, -4, p) == 1);
  CHECK(st.v == 0);
}
