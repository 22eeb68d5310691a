// Closed-form thresholding solver for the M-sparse codebook approximation,
// coefficient quantization and noise synthesis.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "rcc/codebook.hpp"

namespace rcc {

/// Quantized coefficient alphabet: 2^C sorted nonzero levels.
struct ValueSet {
  std::uint32_t bits = 1;
  std::vector<double> values;

  /// C = 0: {+1}. C >= 1: {-2^(C-1), ..., -1, +1, ..., +2^(C-1)}.
  static ValueSet symmetric_levels(std::uint32_t bits) {
    if (bits > 16) throw std::invalid_argument("value set: at most 16 coefficient bits");
    ValueSet vs{bits, {}};
    if (bits == 0) {
      vs.values = {1.0};
      return vs;
    }
    const std::uint32_t half = 1U << (bits - 1);
    for (std::uint32_t i = half; i >= 1; --i) vs.values.push_back(-static_cast<double>(i));
    for (std::uint32_t i = 1; i <= half; ++i) vs.values.push_back(static_cast<double>(i));
    return vs;
  }

  /// Arbitrary alphabet; must have 2^bits sorted, distinct, nonzero entries.
  static ValueSet custom(std::uint32_t bits, std::vector<double> values) {
    ValueSet vs{bits, std::move(values)};
    vs.validate();
    return vs;
  }

  void validate() const {
    if (bits > 16 || values.size() != (std::size_t{1} << bits))
      throw std::invalid_argument("value set: need exactly 2^C values");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] == 0.0 || !std::isfinite(values[i]))
        throw std::invalid_argument("value set: values must be finite and nonzero");
      if (i > 0 && values[i] <= values[i - 1]) throw std::invalid_argument("value set: values must be ascending");
    }
  }

  bool has_negative() const noexcept { return !values.empty() && values.front() < 0.0; }
};

/// Nearest level, ties to the smaller code.
inline std::uint32_t encode_coefficient(double value, const ValueSet& vset) {
  std::uint32_t best = 0;
  double best_dist = std::fabs(value - vset.values[0]);
  for (std::uint32_t i = 1; i < vset.values.size(); ++i) {
    const double d = std::fabs(value - vset.values[i]);
    if (d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return best;
}

inline double decode_coefficient(std::uint32_t code, const ValueSet& vset) {
  if (code >= vset.values.size()) throw std::out_of_range("decode_coefficient: code outside value set");
  return vset.values[code];
}

struct SparseSelection {
  std::uint32_t step = 0;
  std::vector<std::uint32_t> indices;      // ascending
  std::vector<std::uint32_t> coeff_codes;  // parallel to indices

  friend bool operator==(const SparseSelection&, const SparseSelection&) = default;
};

/// Thrown when a synthesized combination has (numerically) zero spread.
class DegenerateCombination : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Correlations <atom(step, k), residual> for every k, plus squared atom norms.
template <AtomSource Atoms>
void correlate_all(std::span<const double> residual, const Atoms& atoms, std::uint32_t step,
                   std::vector<double>& corr, std::vector<double>& norm2) {
  if (residual.size() != atoms.dim()) throw std::invalid_argument("correlate: residual length != dim");
  const std::uint32_t K = atoms.size();
  corr.assign(K, 0.0);
  norm2.assign(K, 0.0);
  std::vector<double> buf(atoms.dim());
  for (std::uint32_t k = 0; k < K; ++k) {
    atoms.fill_atom(step, k, buf);
    double c = 0.0;
    double n = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) {
      c += buf[i] * residual[i];
      n += buf[i] * buf[i];
    }
    corr[k] = c;
    norm2[k] = n;
  }
}

/// Thresholding solution of
///   min_s || C_t s - residual ||^2  s.t. ||s||_0 = M, s_i in V u {0}.
///
/// Keeps the M atoms with the largest |<atom, residual>| (largest signed
/// correlation if V has no negative level), ties to the smaller index. Each
/// coefficient is the level nearest to <atom, residual> / ||atom||^2, the
/// per-atom least-squares weight. Exact when the atoms are orthogonal.
template <AtomSource Atoms>
SparseSelection select_atoms(std::span<const double> residual, const Atoms& atoms, std::uint32_t step,
                             std::uint32_t M, const ValueSet& vset) {
  if (M > atoms.size()) throw std::invalid_argument("select_atoms: M > K");
  std::vector<double> corr;
  std::vector<double> norm2;
  correlate_all(residual, atoms, step, corr, norm2);

  const bool signed_rank = !vset.has_negative();
  std::vector<std::uint32_t> order(atoms.size());
  std::iota(order.begin(), order.end(), 0U);
  auto score = [&](std::uint32_t k) { return signed_rank ? corr[k] : std::fabs(corr[k]); };
  std::partial_sort(order.begin(), order.begin() + M, order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double sa = score(a);
    const double sb = score(b);
    return sa > sb || (sa == sb && a < b);
  });
  order.resize(M);
  std::sort(order.begin(), order.end());

  SparseSelection sel{step, order, {}};
  sel.coeff_codes.reserve(M);
  for (std::uint32_t k : order) {
    const double weight = norm2[k] > 0.0 ? corr[k] / norm2[k] : 0.0;
    sel.coeff_codes.push_back(encode_coefficient(weight, vset));
  }
  return sel;
}

/// Linear combination sum_i v_i * atom(step, k_i) without normalization.
template <AtomSource Atoms>
std::vector<double> combine_atoms(std::span<const std::uint32_t> indices, std::span<const double> weights,
                                  const Atoms& atoms, std::uint32_t step) {
  if (indices.size() != weights.size()) throw std::invalid_argument("combine_atoms: size mismatch");
  std::vector<double> out(atoms.dim(), 0.0);
  std::vector<double> buf(atoms.dim());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    atoms.fill_atom(step, indices[j], buf);
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] += weights[j] * buf[i];
  }
  return out;
}

/// Population standard deviation (mean removed, divide by n).
inline double population_std(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

/// z = C_t s / std(C_t s).
template <AtomSource Atoms>
std::vector<double> synthesize_noise(const SparseSelection& sel, const Atoms& atoms, const ValueSet& vset) {
  if (sel.indices.size() != sel.coeff_codes.size())
    throw std::invalid_argument("synthesize_noise: indices and codes differ in length");
  std::vector<double> weights;
  weights.reserve(sel.coeff_codes.size());
  for (std::uint32_t code : sel.coeff_codes) weights.push_back(decode_coefficient(code, vset));
  std::vector<double> z = combine_atoms(sel.indices, weights, atoms, sel.step);
  const double sd = population_std(z);
  if (!(sd >= 1e-12)) throw DegenerateCombination("synthesize_noise: combination has zero spread");
  for (double& x : z) x /= sd;
  return z;
}

}  // namespace rcc
