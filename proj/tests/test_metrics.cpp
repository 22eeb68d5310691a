#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "rcc/metrics.hpp"
#include "rcc/random.hpp"

namespace {

TEST(Mse, IdenticalAndConstantOffset) {
  const std::vector<double> a{0.1, 0.2, 0.3};
  EXPECT_EQ(rcc::mse(a, a), 0.0);
  EXPECT_TRUE(std::isinf(rcc::psnr(a, a)));
  const std::vector<double> b{1.1, 1.2, 1.3};
  EXPECT_NEAR(rcc::psnr(a, b), 0.0, 1e-12);
  EXPECT_NEAR(rcc::psnr(a, b, 2.0), 10.0 * std::log10(4.0), 1e-12);
}

TEST(Mse, RandomPairMatchesLongDoubleRecomputation) {
  std::vector<double> a(64), b(64);
  for (std::size_t i = 0; i < 64; ++i) {
    a[i] = rcc::normal_at(1, i);
    b[i] = rcc::normal_at(2, i);
  }
  long double s = 0.0L;
  for (std::size_t i = 0; i < 64; ++i) s += (static_cast<long double>(a[i]) - b[i]) * (static_cast<long double>(a[i]) - b[i]);
  const long double want = s / 64.0L;
  EXPECT_NEAR(rcc::mse(a, b), static_cast<double>(want), 1e-12 * static_cast<double>(want));
  const long double want_psnr = 10.0L * std::log10(1.0L / want);
  EXPECT_NEAR(rcc::psnr(a, b), static_cast<double>(want_psnr), 1e-12 * std::fabs(static_cast<double>(want_psnr)));
}

TEST(Mse, Errors) {
  const std::vector<double> a{1.0}, b{1.0, 2.0}, e;
  EXPECT_THROW(rcc::mse(a, b), std::invalid_argument);
  EXPECT_THROW(rcc::mse(e, e), std::invalid_argument);
  EXPECT_THROW(rcc::psnr(a, a, 0.0), std::invalid_argument);
}

rcc::TrialRecord ok(double m, std::uint32_t trial = 0) {
  return {"p", 0, 0.01, trial, rcc::Distortion{m, rcc::psnr_from_mse(m)}, 100, 100};
}
rcc::TrialRecord bad(std::uint32_t trial = 0) { return {"p", 0, 0.01, trial, std::nullopt, 100, 100}; }

TEST(Aggregate, NoCorruption) {
  std::vector<rcc::TrialRecord> r;
  for (std::uint32_t i = 0; i < 10; ++i) r.push_back(ok(0.01, i));
  const auto s = rcc::aggregate(r);
  ASSERT_EQ(s.size(), 1U);
  EXPECT_EQ(s[0].corrupted_fraction, 0.0);
  EXPECT_EQ(s[0].n_trials, 10U);
  EXPECT_NEAR(*s[0].mean_mse, 0.01, 1e-15);
  EXPECT_NEAR(*s[0].std_mse, 0.0, 1e-17);
  EXPECT_EQ(s[0].mean_bpp, 1.0);
}

TEST(Aggregate, AllCorrupted) {
  std::vector<rcc::TrialRecord> r;
  for (std::uint32_t i = 0; i < 10; ++i) r.push_back(bad(i));
  const auto s = rcc::aggregate(r);
  EXPECT_EQ(s[0].corrupted_fraction, 1.0);
  EXPECT_FALSE(s[0].mean_psnr.has_value());
  EXPECT_FALSE(s[0].std_psnr.has_value());
  EXPECT_FALSE(s[0].mean_mse.has_value());
  EXPECT_FALSE(s[0].std_mse.has_value());
}

TEST(Aggregate, MixedHandAuditedFixture) {
  // mse 0.01, 0.04, 0.1 plus two corrupted trials.
  const std::vector<rcc::TrialRecord> r{ok(0.01), bad(), ok(0.04), bad(), ok(0.1)};
  const auto s = rcc::aggregate(r);
  ASSERT_EQ(s.size(), 1U);
  EXPECT_EQ(s[0].n_trials, 5U);
  EXPECT_EQ(s[0].n_corrupted, 2U);
  EXPECT_DOUBLE_EQ(s[0].corrupted_fraction, 0.4);
  EXPECT_NEAR(*s[0].mean_mse, 0.05, 1e-15);
  // sample std: sqrt(((-.04)^2 + (-.01)^2 + .05^2) / 2) = sqrt(0.0021)
  EXPECT_NEAR(*s[0].std_mse, std::sqrt(0.0021), 1e-15);
  // psnr 20, 13.9794..., 10
  const double p2 = 10.0 * std::log10(25.0);
  const double mp = (20.0 + p2 + 10.0) / 3.0;
  EXPECT_NEAR(*s[0].mean_psnr, mp, 1e-12);
  const double vp = ((20 - mp) * (20 - mp) + (p2 - mp) * (p2 - mp) + (10 - mp) * (10 - mp)) / 2.0;
  EXPECT_NEAR(*s[0].std_psnr, std::sqrt(vp), 1e-12);
}

TEST(Aggregate, GroupsByProtocolAndBer) {
  std::vector<rcc::TrialRecord> r{ok(0.01), ok(0.02)};
  r[1].ber = 0.1;
  r.push_back(ok(0.03));
  r[2].protocol = "q";
  EXPECT_EQ(rcc::aggregate(r).size(), 3U);
  EXPECT_THROW(rcc::aggregate(std::vector<rcc::TrialRecord>{}), std::invalid_argument);
}

TEST(Aggregate, PermutationInvariantBitForBit) {
  std::vector<rcc::TrialRecord> r;
  for (std::uint32_t i = 0; i < 40; ++i) {
    if (i % 7 == 3)
      r.push_back(bad(i));
    else
      r.push_back(ok(1e-3 * (1.0 + rcc::normal_at(5, i) * rcc::normal_at(5, i)), i));
  }
  const auto a = rcc::aggregate(r);
  std::mt19937 g(1);
  for (int round = 0; round < 5; ++round) {
    std::shuffle(r.begin(), r.end(), g);
    const auto b = rcc::aggregate(r);
    EXPECT_EQ(*a[0].mean_mse, *b[0].mean_mse);
    EXPECT_EQ(*a[0].std_mse, *b[0].std_mse);
    EXPECT_EQ(*a[0].mean_psnr, *b[0].mean_psnr);
    EXPECT_EQ(*a[0].std_psnr, *b[0].std_psnr);
  }
}

}  // namespace
