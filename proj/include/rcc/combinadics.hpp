// Exact binomial coefficients and lexicographic rank/unrank of M-subsets.
//
// Subsets of {0, ..., K-1} are ordered lexicographically as sorted sequences:
// for K = 8, M = 3 rank 0 is {0,1,2}, rank 32 is {1,4,7} and rank 55 is
// {5,6,7}. Ranks are serialized big-endian (MSB first) over exactly
// ceil(log2 C(K,M)) bits.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcc/bitstream.hpp"

namespace rcc {

using BigUint = boost::multiprecision::cpp_int;

/// Thrown by unrank when the index is not below C(K, M).
class InvalidIndex : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline BigUint binomial(std::uint32_t n, std::uint32_t k) {
  if (k > n) throw std::invalid_argument("binomial: k > n");
  const std::uint32_t m = std::min(k, n - k);
  BigUint r = 1;
  for (std::uint32_t i = 1; i <= m; ++i) {
    r *= n - m + i;
    r /= i;
  }
  return r;
}

/// ceil(log2 x) for x >= 1; 0 for x <= 1.
inline std::uint32_t ceil_log2(const BigUint& x) {
  if (x <= 1) return 0;
  return static_cast<std::uint32_t>(boost::multiprecision::msb(BigUint(x - 1))) + 1;
}

inline std::uint32_t ceil_log2(std::uint64_t x) {
  std::uint32_t bits = 0;
  while (bits < 64 && (std::uint64_t{1} << bits) < x) ++bits;
  return bits;
}

struct SubsetIndex {
  BigUint value;
  std::uint32_t K = 0;
  std::uint32_t M = 0;

  std::uint32_t bit_width() const { return ceil_log2(binomial(K, M)); }
  bool valid() const { return value < binomial(K, M); }
};

namespace detail {

// Walks C(n, r) along the lexicographic rank recursion, n = K-1-j and
// r = M-1-i at position j with i elements already placed.
class BinomialWalker {
 public:
  BinomialWalker(std::uint32_t n, std::uint32_t r) : n_(n), r_(r), value_(binomial(n, r)) {}

  const BigUint& value() const noexcept { return value_; }

  // (n, r) -> (n-1, r)
  void skip() {
    if (n_ == 0) {
      value_ = 0;
      return;
    }
    value_ *= n_ - r_;
    value_ /= n_;
    --n_;
  }

  // (n, r) -> (n-1, r-1); caller stops before r underflows
  void take() {
    if (n_ == 0 || r_ == 0) {
      value_ = 0;
      return;
    }
    value_ *= r_;
    value_ /= n_;
    --n_;
    --r_;
  }

 private:
  std::uint32_t n_;
  std::uint32_t r_;
  BigUint value_;
};

}  // namespace detail

/// 0-based lexicographic rank of a strictly increasing subset of {0..K-1}.
inline SubsetIndex rank_combination(std::span<const std::uint32_t> indices, std::uint32_t K) {
  const auto M = static_cast<std::uint32_t>(indices.size());
  if (M > K) throw std::invalid_argument("rank_combination: more indices than K");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= K) throw std::invalid_argument("rank_combination: index out of range");
    if (i > 0 && indices[i] <= indices[i - 1])
      throw std::invalid_argument("rank_combination: indices must be strictly increasing");
  }
  SubsetIndex out{0, K, M};
  if (M == 0) return out;

  detail::BinomialWalker walker(K - 1, M - 1);
  std::uint32_t placed = 0;
  for (std::uint32_t j = 0; placed < M; ++j) {
    if (j == indices[placed]) {
      ++placed;
      if (placed < M) walker.take();
    } else {
      out.value += walker.value();
      walker.skip();
    }
  }
  return out;
}

/// Inverse of rank_combination. Throws InvalidIndex when value >= C(K, M).
inline std::vector<std::uint32_t> unrank_combination(const SubsetIndex& index) {
  const std::uint32_t K = index.K;
  const std::uint32_t M = index.M;
  if (M > K) throw std::invalid_argument("unrank_combination: M > K");
  if (index.value >= binomial(K, M))
    throw InvalidIndex("unrank_combination: index is not below C(" + std::to_string(K) + ", " +
                       std::to_string(M) + ")");
  std::vector<std::uint32_t> out;
  out.reserve(M);
  if (M == 0) return out;

  BigUint remaining = index.value;
  detail::BinomialWalker walker(K - 1, M - 1);
  for (std::uint32_t j = 0; out.size() < M; ++j) {
    // walker.value() counts the subsets whose next element is j
    if (remaining >= walker.value()) {
      remaining -= walker.value();
      walker.skip();
    } else {
      out.push_back(j);
      if (out.size() < M) walker.take();
    }
  }
  return out;
}

/// Writes the index big-endian (MSB first) over exactly bit_width() bits.
inline void write_index(BitWriter& out, const SubsetIndex& index) {
  const std::uint32_t width = index.bit_width();
  if (index.value > 0 && boost::multiprecision::msb(index.value) >= width)
    throw std::invalid_argument("write_index: value does not fit in its bit width");
  for (std::uint32_t i = width; i-- > 0;) out.write_bit(boost::multiprecision::bit_test(index.value, i));
}

/// Reads bit_width(K, M) bits. The result may be >= C(K, M); see SubsetIndex::valid.
inline SubsetIndex read_index(BitReader& in, std::uint32_t K, std::uint32_t M) {
  SubsetIndex index{0, K, M};
  const std::uint32_t width = index.bit_width();
  for (std::uint32_t i = 0; i < width; ++i) {
    index.value <<= 1;
    if (in.read_bit()) index.value |= 1;
  }
  return index;
}

}  // namespace rcc
