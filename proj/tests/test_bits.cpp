#include "doctest.h"

#include <cstdint>

#include "dss/bits.hpp"

using namespace dss;

namespace {

BitVec from_u32(std::uint32_t v, std::size_t nbits) {
  BitVec b(nbits);
  for (std::size_t i = 0; i < nbits; ++i)
    if ((v >> i) & 1) b.set(i, true);
  return b;
}

std::uint32_t to_u32(const BitVec& b) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b.get(i)) v |= (1u << i);
  return v;
}

}  // namespace

TEST_CASE("bit vector basics") {
  BitVec b(130);
  CHECK(b.size() == 130);
  CHECK(b.is_zero());
  b.set(0, true);
  b.set(64, true);
  b.set(129, true);
  CHECK(b.popcount() == 3);
  CHECK(b.get(64));
  CHECK_FALSE(b.get(63));
  b.set(64, false);
  CHECK(b.popcount() == 2);
  CHECK_THROWS_AS(b.get(130), ShapeError);
  CHECK_THROWS_AS(b.set(130, true), ShapeError);
}

TEST_CASE("word ops match bit-by-bit evaluation") {
  const BitVec a = from_u32(0b1011, 4);
  const BitVec m = from_u32(0b1101, 4);
  CHECK(to_u32(a & m) == 0b1001);
  CHECK(to_u32(a.and_not(m)) == 0b0010);
  CHECK(to_u32(m.minus_one()) == 0b1100);
  CHECK_THROWS_AS(BitVec(4).minus_one(), DomainError);
  CHECK_THROWS_AS(a & BitVec(5), ShapeError);
}

TEST_CASE("minus_one borrows across words") {
  BitVec b(70);
  b.set(68, true);
  const BitVec m = b.minus_one();
  CHECK(m.popcount() == 68);
  for (std::size_t i = 0; i < 68; ++i) CHECK(m.get(i));
  CHECK_FALSE(m.get(68));
}

TEST_CASE("one-hot extraction identities") {
  const BitVec x = from_u32(0b0110, 4);
  const BitVec y = lowest_onehot(x);
  CHECK(to_u32(y) == 0b0010);
  CHECK(to_u32(x.and_not(y)) == 0b0100);
  CHECK(onehot_index(y) == 1);
  CHECK_THROWS_AS(lowest_onehot(BitVec(4)), EmptyError);
  CHECK_THROWS_AS(onehot_index(x), DomainError);
  CHECK_THROWS_AS(onehot_index(BitVec(4)), DomainError);
}

TEST_CASE("extraction enumerates every set bit exactly once, ascending") {
  for (std::uint32_t v = 1; v < (1u << 16); ++v) {
    BitVec x = from_u32(v, 16);
    std::uint32_t rebuilt = 0;
    int last = -1;
    while (!x.is_zero()) {
      const BitVec y = lowest_onehot(x);
      CHECK(y.popcount() == 1);
      const std::size_t i = onehot_index(y);
      CHECK(static_cast<int>(i) > last);
      last = static_cast<int>(i);
      rebuilt |= (1u << i);
      x = x.and_not(y);
    }
    CHECK(rebuilt == v);
  }
}

TEST_CASE("ceil_log2") {
  CHECK_THROWS_AS(ceil_log2(0), DomainError);
  CHECK(ceil_log2(1) == 0);
  CHECK(ceil_log2(2) == 1);
  CHECK(ceil_log2(3) == 2);
  CHECK(ceil_log2(4) == 2);
  CHECK(ceil_log2(5) == 3);
  CHECK(ceil_log2(1024) == 10);
  CHECK(ceil_log2(1025) == 11);
}
