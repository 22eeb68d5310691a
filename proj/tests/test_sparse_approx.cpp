#include <gtest/gtest.h>

#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <vector>

#include "rcc/codebook.hpp"
#include "rcc/random.hpp"
#include "rcc/sparse_approx.hpp"
#include "test_util.hpp"

namespace {

using rcc::test::orthonormal_codebook;

TEST(ValueSet, SymmetricLevels) {
  EXPECT_EQ(rcc::ValueSet::symmetric_levels(0).values, (std::vector<double>{1.0}));
  EXPECT_EQ(rcc::ValueSet::symmetric_levels(1).values, (std::vector<double>{-1.0, 1.0}));
  EXPECT_EQ(rcc::ValueSet::symmetric_levels(2).values, (std::vector<double>{-2.0, -1.0, 1.0, 2.0}));
  EXPECT_EQ(rcc::ValueSet::symmetric_levels(3).values.size(), 8U);
  EXPECT_THROW(rcc::ValueSet::symmetric_levels(17), std::invalid_argument);
}

TEST(ValueSet, CustomValidation) {
  EXPECT_NO_THROW(rcc::ValueSet::custom(1, {-0.5, 3.0}));
  EXPECT_THROW(rcc::ValueSet::custom(1, {-1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(rcc::ValueSet::custom(1, {1.0, -1.0}), std::invalid_argument);
  EXPECT_THROW(rcc::ValueSet::custom(2, {-1.0, 1.0}), std::invalid_argument);
}

TEST(Coefficient, NearestLevel) {
  const auto c1 = rcc::ValueSet::symmetric_levels(1);
  EXPECT_EQ(rcc::decode_coefficient(rcc::encode_coefficient(0.7, c1), c1), 1.0);
  EXPECT_EQ(rcc::decode_coefficient(rcc::encode_coefficient(-0.01, c1), c1), -1.0);
  const auto c2 = rcc::ValueSet::symmetric_levels(2);
  EXPECT_EQ(rcc::decode_coefficient(rcc::encode_coefficient(1.4, c2), c2), 1.0);
  EXPECT_EQ(rcc::decode_coefficient(rcc::encode_coefficient(1.6, c2), c2), 2.0);
  // Exact midpoint goes to the smaller code.
  EXPECT_EQ(rcc::encode_coefficient(0.0, c1), 0U);
  EXPECT_EQ(rcc::encode_coefficient(1.5, c2), 2U);
  for (std::uint32_t code = 0; code < 4; ++code)
    EXPECT_EQ(rcc::encode_coefficient(rcc::decode_coefficient(code, c2), c2), code);
  EXPECT_THROW(rcc::decode_coefficient(4, c2), std::out_of_range);
}

TEST(SelectAtoms, OneSparseSignal) {
  const auto cb = orthonormal_codebook(8, 32, 1);
  std::vector<double> r(32);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 3.0 * cb.atom(0, 5)[i];
  const auto vset = rcc::ValueSet::symmetric_levels(1);
  const auto sel = rcc::select_atoms(r, cb, 0, 1, vset);
  EXPECT_EQ(sel.indices, (std::vector<std::uint32_t>{5}));
  EXPECT_EQ(rcc::decode_coefficient(sel.coeff_codes[0], vset), 1.0);
}

TEST(SelectAtoms, TwoSparseSignedSignal) {
  const auto cb = orthonormal_codebook(8, 32, 2);
  std::vector<double> r(32);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 2.0 * cb.atom(0, 1)[i] - 2.0 * cb.atom(0, 6)[i];
  const auto vset = rcc::ValueSet::symmetric_levels(1);
  const auto sel = rcc::select_atoms(r, cb, 0, 2, vset);
  EXPECT_EQ(sel.indices, (std::vector<std::uint32_t>{1, 6}));
  EXPECT_EQ(rcc::decode_coefficient(sel.coeff_codes[0], vset), 1.0);
  EXPECT_EQ(rcc::decode_coefficient(sel.coeff_codes[1], vset), -1.0);
}

TEST(SelectAtoms, ZeroResidualBreaksTiesByIndex) {
  const auto cb = orthonormal_codebook(8, 32, 3);
  const std::vector<double> r(32, 0.0);
  const auto vset = rcc::ValueSet::symmetric_levels(1);
  const auto sel = rcc::select_atoms(r, cb, 0, 2, vset);
  EXPECT_EQ(sel.indices, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(sel.coeff_codes, (std::vector<std::uint32_t>{0, 0}));
}

TEST(SelectAtoms, WithoutNegativeLevelsRanksBySignedCorrelation) {
  const auto cb = orthonormal_codebook(4, 32, 4);
  std::vector<double> r(32);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = -5.0 * cb.atom(0, 0)[i] + 1.0 * cb.atom(0, 3)[i];
  const auto sel = rcc::select_atoms(r, cb, 0, 1, rcc::ValueSet::symmetric_levels(0));
  EXPECT_EQ(sel.indices, (std::vector<std::uint32_t>{3}));
}

TEST(SelectAtoms, MatchesBruteForceOnOrthonormalAtoms) {
  rcc::SplitMix64 rng(11);
  for (std::uint32_t C : {0U, 1U, 2U}) {
    const auto vset = rcc::ValueSet::symmetric_levels(C);
    for (std::uint32_t K : {4U, 7U}) {
      const auto cb = orthonormal_codebook(K, 32, 100 + K);
      for (std::uint32_t M = 1; M <= 3; ++M) {
        for (int trial = 0; trial < 10; ++trial) {
          std::vector<double> r(32);
          for (std::size_t i = 0; i < r.size(); ++i) r[i] = 1.5 * rcc::normal_at(rng(), 0);
          const auto sel = rcc::select_atoms(r, cb, 0, M, vset);
          const double got = rcc::test::objective(cb, r, sel, vset);
          const double best = rcc::test::brute_force_objective(cb, r, M, vset);
          EXPECT_NEAR(got, best, 1e-9 * (1.0 + best)) << "C=" << C << " K=" << K << " M=" << M;
        }
      }
    }
  }
}

TEST(SelectAtoms, RejectsBadInput) {
  const rcc::Codebook cb(0, 2, 4, 8);
  const std::vector<double> r(8, 1.0);
  const std::vector<double> short_r(7, 1.0);
  const auto vset = rcc::ValueSet::symmetric_levels(1);
  EXPECT_THROW(rcc::select_atoms(r, cb, 0, 5, vset), std::invalid_argument);
  EXPECT_THROW(rcc::select_atoms(short_r, cb, 0, 1, vset), std::invalid_argument);
}

TEST(SynthesizeNoise, UnitPopulationStd) {
  const rcc::Codebook cb(0, 3, 16, 4096);
  const auto vset = rcc::ValueSet::symmetric_levels(1);
  const rcc::SparseSelection sel{1, {2, 9}, {1, 0}};
  const auto z = rcc::synthesize_noise(sel, cb, vset);
  EXPECT_NEAR(rcc::population_std(z), 1.0, 1e-9);

  // Direct recomputation: (a2 - a9) / std(a2 - a9).
  const auto a = cb.atom(1, 2);
  const auto b = cb.atom(1, 9);
  std::vector<double> raw(a.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = a[i] - b[i];
  const double sd = rcc::population_std(raw);
  for (std::size_t i = 0; i < z.size(); i += 97) EXPECT_NEAR(z[i], raw[i] / sd, 1e-12);
  EXPECT_NEAR(rcc::dot(z, a) / rcc::dot(raw, a), 1.0 / sd, 1e-12);
}

TEST(SynthesizeNoise, SingleAtomIsSelfNormalized) {
  const rcc::Codebook cb(5, 2, 4, 64);
  const auto vset = rcc::ValueSet::symmetric_levels(0);
  const auto z = rcc::synthesize_noise({0, {3}, {0}}, cb, vset);
  const auto a = cb.atom(0, 3);
  const double sd = rcc::population_std(a);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(z[i], a[i] / sd, 1e-12);
}

TEST(SynthesizeNoise, ScaleInvariant) {
  const rcc::Codebook cb(5, 2, 8, 128);
  const auto small = rcc::ValueSet::custom(1, {-1.0, 1.0});
  const auto big = rcc::ValueSet::custom(1, {-2.0, 2.0});
  const rcc::SparseSelection sel{1, {0, 4, 7}, {1, 0, 1}};
  const auto a = rcc::synthesize_noise(sel, cb, small);
  const auto b = rcc::synthesize_noise(sel, cb, big);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(SynthesizeNoise, DegenerateCombinationThrows) {
  const rcc::DenseCodebook cb({{{1.0, 1.0, 1.0, 1.0}, {1.0, 2.0, 3.0, 4.0}}});
  const auto vset = rcc::ValueSet::symmetric_levels(1);
  EXPECT_THROW(rcc::synthesize_noise({0, {0}, {1}}, cb, vset), rcc::DegenerateCombination);
  EXPECT_NO_THROW(rcc::synthesize_noise({0, {1}, {1}}, cb, vset));
}

TEST(PopulationStd, DividesByN) {
  const std::vector<double> v{1.0, 3.0};
  EXPECT_DOUBLE_EQ(rcc::population_std(v), 1.0);
}

}  // namespace
