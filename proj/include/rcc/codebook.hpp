// Per-timestep Gaussian codebooks shared by encoder and decoder.
#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcc/random.hpp"

namespace rcc {

/// Anything that can hand out atoms of a per-step dictionary: the lazily
/// generated Codebook below, or an explicit matrix (tests use orthonormal ones).
template <class A>
concept AtomSource = requires(const A& a, std::uint32_t step, std::uint32_t k, std::span<double> out) {
  { a.steps() } -> std::convertible_to<std::uint32_t>;
  { a.size() } -> std::convertible_to<std::uint32_t>;
  { a.dim() } -> std::convertible_to<std::size_t>;
  a.fill_atom(step, k, out);
};

/// Reproducible codebook of `steps` x `size` i.i.d. standard-normal atoms.
///
/// Atoms are never stored. Atom (step, k) is element-wise
///   normal_at(hash_words(seed, step, k), i),  i = 0 .. dim-1
/// i.e. a SplitMix64 stream keyed by (seed, step, k) pushed through the AS241
/// inverse normal CDF. `step` is 0-based in transmission order: step 0 is the
/// first coded reverse step (the noisiest one).
class Codebook {
 public:
  Codebook(std::uint64_t seed, std::uint32_t steps, std::uint32_t size, std::size_t dim)
      : seed_(seed), steps_(steps), size_(size), dim_(dim) {
    if (steps < 2) throw std::invalid_argument("codebook: need at least 2 timesteps");
    if (size == 0) throw std::invalid_argument("codebook: K must be positive");
    if (dim == 0) throw std::invalid_argument("codebook: dim must be positive");
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t steps() const noexcept { return steps_; }
  std::uint32_t size() const noexcept { return size_; }
  std::size_t dim() const noexcept { return dim_; }

  void fill_atom(std::uint32_t step, std::uint32_t k, std::span<double> out) const {
    check(step, k);
    if (out.size() != dim_) throw std::invalid_argument("codebook: output span has wrong length");
    fill_stream(hash_words(seed_, step, k), out);
  }

  std::vector<double> atom(std::uint32_t step, std::uint32_t k) const {
    std::vector<double> out(dim_);
    fill_atom(step, k, out);
    return out;
  }

  /// Starting point of every reverse trajectory. Drawn from a stream keyed
  /// outside the (step, k) range so it never aliases an atom.
  std::vector<double> initial_noise() const {
    std::vector<double> out(dim_);
    fill_stream(hash_words(seed_, kInitialNoiseTag, 0), out);
    return out;
  }

 private:
  static constexpr std::uint64_t kInitialNoiseTag = std::uint64_t{1} << 32;

  void check(std::uint32_t step, std::uint32_t k) const {
    if (step >= steps_ || k >= size_)
      throw std::out_of_range("codebook: atom (" + std::to_string(step) + ", " + std::to_string(k) +
                              ") out of range");
  }

  static void fill_stream(std::uint64_t key, std::span<double> out) noexcept {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = normal_at(key, i);
  }

  std::uint64_t seed_;
  std::uint32_t steps_;
  std::uint32_t size_;
  std::size_t dim_;
};

inline Codebook generate_codebook(std::uint64_t seed, std::uint32_t steps, std::uint32_t size,
                                  std::size_t dim) {
  return Codebook(seed, steps, size, dim);
}

/// Explicit atoms held in memory, atoms[step][k] of length dim.
class DenseCodebook {
 public:
  explicit DenseCodebook(std::vector<std::vector<std::vector<double>>> atoms)
      : atoms_(std::move(atoms)) {
    if (atoms_.empty() || atoms_.front().empty() || atoms_.front().front().empty())
      throw std::invalid_argument("dense codebook: empty");
    dim_ = atoms_.front().front().size();
    for (const auto& step : atoms_) {
      if (step.size() != atoms_.front().size())
        throw std::invalid_argument("dense codebook: ragged steps");
      for (const auto& a : step)
        if (a.size() != dim_) throw std::invalid_argument("dense codebook: ragged atoms");
    }
  }

  std::uint32_t steps() const noexcept { return static_cast<std::uint32_t>(atoms_.size()); }
  std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(atoms_.front().size()); }
  std::size_t dim() const noexcept { return dim_; }

  void fill_atom(std::uint32_t step, std::uint32_t k, std::span<double> out) const {
    const auto& a = atoms_.at(step).at(k);
    if (out.size() != dim_) throw std::invalid_argument("dense codebook: output span has wrong length");
    std::copy(a.begin(), a.end(), out.begin());
  }

  const std::vector<double>& atom(std::uint32_t step, std::uint32_t k) const { return atoms_.at(step).at(k); }

 private:
  std::vector<std::vector<std::vector<double>>> atoms_;
  std::size_t dim_ = 0;
};

}  // namespace rcc
