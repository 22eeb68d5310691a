// Portable, platform-independent random streams.
//
// Everything in here uses only IEEE-754 +, -, *, / and sqrt, which are
// correctly rounded on every conforming platform. Transcendental functions
// from <cmath> are avoided on purpose: encoder and decoder regenerate the
// same codebook atoms and must agree bit-for-bit. Build with
// -ffp-contract=off so the compiler does not fuse multiply-adds.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace rcc {

/// SplitMix64 output finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds a list of words into one key. Order matters.
constexpr std::uint64_t hash_words(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(a) ^ b);
}
constexpr std::uint64_t hash_words(std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept {
  return mix64(hash_words(a, b) ^ c);
}
constexpr std::uint64_t hash_words(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                                   std::uint64_t d) noexcept {
  return mix64(hash_words(a, b, c) ^ d);
}

/// Counter-based SplitMix64 stream: draw i of the stream keyed by `key` is
/// mix64(key + i * golden). Random access via `at`.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t key) noexcept : state_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    const std::uint64_t out = mix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return out;
  }

  static constexpr result_type at(std::uint64_t key, std::uint64_t index) noexcept {
    return mix64(key + index * 0x9e3779b97f4a7c15ULL);
  }

 private:
  std::uint64_t state_;
};

/// Maps 64 random bits to a double strictly inside (0, 1): (top52 + 0.5) / 2^52.
/// Every result is an odd multiple of 2^-53, so none rounds to 0 or 1.
constexpr double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

namespace detail {

// Natural log for finite x > 0 using frexp and the atanh series. Accurate to
// about 1 ulp; exact reproducibility matters more than the last bit.
inline double portable_log(double x) noexcept {
  int exponent = 0;
  double m = std::frexp(x, &exponent);  // exact; m in [0.5, 1)
  if (m < 0.70710678118654752440) {
    m *= 2.0;
    exponent -= 1;
  }
  // m in [sqrt(1/2), sqrt(2)), s in (-0.1716, 0.1716)
  const double s = (m - 1.0) / (m + 1.0);
  const double s2 = s * s;
  double term = s2;
  double series = 0.0;
  // 2s(1 + s^2/3 + s^4/5 + ...); |s|^2 < 0.0295 so 12 terms reach 1e-19
  constexpr std::array<double, 12> inv_odd{1.0 / 3,  1.0 / 5,  1.0 / 7,  1.0 / 9,
                                           1.0 / 11, 1.0 / 13, 1.0 / 15, 1.0 / 17,
                                           1.0 / 19, 1.0 / 21, 1.0 / 23, 1.0 / 25};
  for (double c : inv_odd) {
    series += c * term;
    term *= s2;
  }
  const double log_m = 2.0 * s + 2.0 * s * series;
  constexpr double ln2_hi = 6.93147180369123816490e-01;  // upper bits of ln 2
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  const double e = static_cast<double>(exponent);
  return (e * ln2_hi + log_m) + e * ln2_lo;
}

template <std::size_t N>
inline double horner(const std::array<double, N>& c, double x) noexcept {
  double acc = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

}  // namespace detail

/// Inverse standard-normal CDF, Wichura's AS241 (PPND16), relative accuracy
/// about 1e-16. `p` must lie in (0, 1).
inline double inverse_normal_cdf(double p) noexcept {
  static constexpr std::array<double, 8> a{
      3.3871328727963666080e0,  1.3314166789178437745e+2, 1.9715909503065514427e+3,
      1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
      3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr std::array<double, 8> b{
      1.0,                      4.2313330701600911252e+1, 6.8718700749205790830e+2,
      5.3941960214247511077e+3, 2.1213794301586595867e+4, 3.9307895800092710610e+4,
      2.8729085735721942674e+4, 5.2264952788528545610e+3};
  static constexpr std::array<double, 8> c{
      1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr std::array<double, 8> d{
      1.0,                      2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr std::array<double, 8> e{
      6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr std::array<double, 8> f{
      1.0,                      5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * detail::horner(a, r) / detail::horner(b, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-detail::portable_log(r));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    z = detail::horner(c, r) / detail::horner(d, r);
  } else {
    r -= 5.0;
    z = detail::horner(e, r) / detail::horner(f, r);
  }
  return q < 0.0 ? -z : z;
}

/// Draw `index` of the standard-normal stream keyed by `key`.
inline double normal_at(std::uint64_t key, std::uint64_t index) noexcept {
  return inverse_normal_cdf(open_unit(SplitMix64::at(key, index)));
}

}  // namespace rcc
