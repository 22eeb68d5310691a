#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "rcc/random.hpp"

namespace {

TEST(Mix64, MatchesReferenceFinalizer) {
  // Values from an independent arbitrary-precision reimplementation.
  EXPECT_EQ(rcc::mix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rcc::hash_words(1, 2, 3, 4), 0xd55ccd4aeb3ccafbULL);
}

TEST(HashWords, OrderMatters) {
  EXPECT_NE(rcc::hash_words(1, 2), rcc::hash_words(2, 1));
  EXPECT_NE(rcc::hash_words(0, 0, 1), rcc::hash_words(0, 1, 0));
}

TEST(SplitMix64, SequentialMatchesRandomAccess) {
  rcc::SplitMix64 rng(77);
  for (std::uint64_t i = 0; i < 100; ++i) EXPECT_EQ(rng(), rcc::SplitMix64::at(77, i));
}

TEST(OpenUnit, StaysStrictlyInside) {
  EXPECT_GT(rcc::open_unit(0), 0.0);
  EXPECT_LT(rcc::open_unit(~std::uint64_t{0}), 1.0);
  EXPECT_EQ(rcc::open_unit(0), 0x1.0p-53);
  EXPECT_EQ(rcc::open_unit(~std::uint64_t{0}), 1.0 - 0x1.0p-53);
  EXPECT_EQ(rcc::open_unit(std::uint64_t{1} << 63), 0.5 + 0x1.0p-53);
}

TEST(PortableLog, AgreesWithLibm) {
  for (double x : {1e-300, 1e-20, 0.001, 0.25, 0.5, 0.5 + 0x1.0p-53, 0.9999, 1.0, 3.0, 1e10}) {
    const double want = std::log(x);
    EXPECT_NEAR(rcc::detail::portable_log(x), want, 4e-16 * std::max(1.0, std::fabs(want))) << x;
  }
}

struct PpfCase {
  double p;
  double z;
};

class InverseNormalCdf : public ::testing::TestWithParam<PpfCase> {};

TEST_P(InverseNormalCdf, MatchesHighPrecisionRoot) {
  const auto [p, z] = GetParam();
  EXPECT_NEAR(rcc::inverse_normal_cdf(p), z, 1e-14 * std::max(1.0, std::fabs(z))) << p;
}

// Roots of Phi(z) = p found at 40 significant digits.
INSTANTIATE_TEST_SUITE_P(
    Table, InverseNormalCdf,
    ::testing::Values(PpfCase{1e-300, -37.0470962993612}, PpfCase{1e-20, -9.262340089798407},
                      PpfCase{1e-10, -6.361340902404057}, PpfCase{0.001, -3.0902323061678136},
                      PpfCase{0.02425, -1.972961051311885}, PpfCase{0.1, -1.2815515655446004},
                      PpfCase{0.3, -0.5244005127080408}, PpfCase{0.5, 0.0}, PpfCase{0.7, 0.5244005127080407},
                      PpfCase{0.975, 1.9599639845400538}, PpfCase{0.999999, 4.753424308817087}));

TEST(InverseNormalCdf, IsOddAroundHalf) {
  // 1 - p is exact for these p.
  for (double p : {0x1.0p-40, 0.0078125, 0.25, 0.375})
    EXPECT_NEAR(rcc::inverse_normal_cdf(p), -rcc::inverse_normal_cdf(1.0 - p), 1e-14);
}

TEST(NormalAt, MomentsLookStandard) {
  constexpr int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rcc::normal_at(123, i);
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(var, 1.0, 4.0 * std::sqrt(2.0 / n));
}

}  // namespace
