// Distortion metrics and per-(protocol, BER) aggregation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace rcc {

inline double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("mse: length mismatch");
  if (a.empty()) throw std::invalid_argument("mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

/// 10 log10(peak^2 / mse); +infinity when the inputs are identical.
inline double psnr_from_mse(double mse_value, double peak = 1.0) {
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
  if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse_value);
}

inline double psnr(std::span<const double> a, std::span<const double> b, double peak = 1.0) {
  return psnr_from_mse(mse(a, b), peak);
}

struct Distortion {
  double mse = 0.0;
  double psnr = 0.0;
};

/// One corrupt-and-decode outcome. `distortion` is empty for corrupted files.
struct TrialRecord {
  std::string protocol;
  std::uint32_t image_id = 0;
  double ber = 0.0;
  std::uint32_t trial = 0;
  std::optional<Distortion> distortion;
  std::uint64_t payload_bits = 0;
  std::uint64_t pixels = 1;

  bool corrupted() const noexcept { return !distortion.has_value(); }
};

struct Summary {
  std::string protocol;
  double ber = 0.0;
  std::uint64_t n_trials = 0;
  std::uint64_t n_corrupted = 0;
  double corrupted_fraction = 0.0;
  // Absent when every trial in the group was corrupted.
  std::optional<double> mean_psnr, std_psnr, mean_mse, std_mse;
  double mean_bpp = 0.0;
};

namespace detail {

struct MeanStd {
  double mean;
  double sd;  // sample (n - 1) standard deviation; 0 for a single value
};

// Sorted summation so the result does not depend on record order.
inline MeanStd mean_std(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2 || !std::isfinite(mean)) return {mean, v.size() < 2 ? 0.0 : std::numeric_limits<double>::quiet_NaN()};
  std::vector<double> dev;
  dev.reserve(v.size());
  for (double x : v) dev.push_back((x - mean) * (x - mean));
  std::sort(dev.begin(), dev.end());
  double ss = 0.0;
  for (double d : dev) ss += d;
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

/// Groups by (protocol, ber). Corrupted trials count toward corrupted_fraction
/// and are excluded from every distortion statistic.
inline std::vector<Summary> aggregate(std::span<const TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  struct Group {
    std::vector<double> psnr, mse, bpp;
    std::uint64_t corrupted = 0;
  };
  std::map<std::tuple<std::string, double>, Group> groups;
  for (const auto& r : records) {
    auto& g = groups[{r.protocol, r.ber}];
    g.bpp.push_back(static_cast<double>(r.payload_bits) / static_cast<double>(r.pixels));
    if (r.corrupted()) {
      ++g.corrupted;
    } else {
      g.psnr.push_back(r.distortion->psnr);
      g.mse.push_back(r.distortion->mse);
    }
  }
  std::vector<Summary> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) {
    Summary s;
    s.protocol = std::get<0>(key);
    s.ber = std::get<1>(key);
    s.n_trials = g.bpp.size();
    s.n_corrupted = g.corrupted;
    s.corrupted_fraction = static_cast<double>(g.corrupted) / static_cast<double>(s.n_trials);
    s.mean_bpp = detail::mean_std(g.bpp).mean;
    if (!g.mse.empty()) {
      const auto p = detail::mean_std(g.psnr);
      const auto m = detail::mean_std(g.mse);
      s.mean_psnr = p.mean;
      s.std_psnr = p.sd;
      s.mean_mse = m.mean;
      s.std_mse = m.sd;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace rcc
