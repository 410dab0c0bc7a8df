#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dss/error.hpp"

namespace dss {

// Dynamic bit vector backed by 64-bit words, LSB-first: bit i lives in
// word i/64 at position i%64. Unused high bits of the last word are
// kept zero so word-level ops never see garbage.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t nbits) : nbits_(nbits), w_((nbits + 63) / 64, 0) {}

  std::size_t size() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }

  bool get(std::size_t i) const {
    if (i >= nbits_) throw ShapeError("BitVec::get: index out of range");
    return (w_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(std::size_t i, bool v) {
    if (i >= nbits_) throw ShapeError("BitVec::set: index out of range");
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }

  int popcount() const {
    int n = 0;
    for (std::uint64_t w : w_) n += std::popcount(w);
    return n;
  }

  bool is_zero() const {
    for (std::uint64_t w : w_)
      if (w != 0) return false;
    return true;
  }

  BitVec operator&(const BitVec& o) const {
    check_same_size(o, "operator&");
    BitVec r(nbits_);
    for (std::size_t i = 0; i < w_.size(); ++i) r.w_[i] = w_[i] & o.w_[i];
    return r;
  }

  // x & ~o
  BitVec and_not(const BitVec& o) const {
    check_same_size(o, "and_not");
    BitVec r(nbits_);
    for (std::size_t i = 0; i < w_.size(); ++i) r.w_[i] = w_[i] & ~o.w_[i];
    return r;
  }

  // Multiword decrement; pre: nonzero.
  BitVec minus_one() const {
    if (is_zero()) throw DomainError("BitVec::minus_one: vector is zero");
    BitVec r = *this;
    for (std::size_t i = 0; i < r.w_.size(); ++i) {
      if (r.w_[i] != 0) {
        r.w_[i] -= 1;
        break;
      }
      r.w_[i] = ~std::uint64_t{0};
    }
    r.mask_tail();
    return r;
  }

  bool operator==(const BitVec& o) const { return nbits_ == o.nbits_ && w_ == o.w_; }
  bool operator!=(const BitVec& o) const { return !(*this == o); }

  const std::vector<std::uint64_t>& words() const { return w_; }
  std::vector<std::uint64_t>& words() { return w_; }

  // Keeps the invariant after direct word writes.
  void mask_tail() {
    if (nbits_ % 64 != 0 && !w_.empty())
      w_.back() &= (~std::uint64_t{0}) >> (64 - nbits_ % 64);
  }

 private:
  void check_same_size(const BitVec& o, const char* who) const {
    if (nbits_ != o.nbits_) throw ShapeError(std::string("BitVec size mismatch in ") + who);
  }

  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> w_;
};

// Lowest set bit as a one-hot vector, via the subtract identity
// y = x & ~(x - 1). Pre: x nonzero.
inline BitVec lowest_onehot(const BitVec& x) {
  if (x.is_zero()) throw EmptyError("lowest_onehot: input has no set bits");
  return x.and_not(x.minus_one());
}

// Bit position of the single set bit of a one-hot vector.
inline std::size_t onehot_index(const BitVec& y) {
  if (y.popcount() != 1) throw DomainError("onehot_index: input is not one-hot");
  const auto& w = y.words();
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] != 0) return i * 64 + static_cast<std::size_t>(std::countr_zero(w[i]));
  throw LogicError("onehot_index: unreachable");
}

inline int ceil_log2(std::uint64_t extent) {
  if (extent == 0) throw DomainError("ceil_log2: zero extent");
  int b = 0;
  while ((std::uint64_t{1} << b) < extent) ++b;
  return b;
}

}  // namespace dss
