// BER sweep driver: sample toy images, encode once per (image, method),
// corrupt and decode repeatedly, aggregate.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcc/baseline.hpp"
#include "rcc/channel.hpp"
#include "rcc/container.hpp"
#include "rcc/diffusion.hpp"
#include "rcc/metrics.hpp"
#include "rcc/protocols.hpp"

namespace rcc {

class InfeasibleBudget : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Largest M in [1, K] whose payload fits in `target_bits`. Robust cost is
/// monotone in M, so a binary search suffices. Lex cost is not: the subset
/// index shrinks again past M = K/2. Lex scans down from M = K instead.
inline ProtocolConfig match_budget(std::uint64_t target_bits, ProtocolConfig cfg) {
  if (cfg.protocol == Protocol::ddcm) throw std::invalid_argument("match_budget: DDCM has no M to tune");
  cfg.M = 1;
  cfg.validate();
  if (cfg.protocol == Protocol::turbo_lex) {
    const std::uint64_t steps = cfg.coded_steps();
    BigUint count = 1;  // C(K, M), walked down from M = K
    for (std::uint32_t M = cfg.K; M >= 1; --M) {
      if (steps * (ceil_log2(count) + std::uint64_t{M} * cfg.C) <= target_bits) {
        cfg.M = M;
        return cfg;
      }
      count = count * M / (cfg.K - M + 1);
    }
    throw InfeasibleBudget("match_budget: no M fits the budget");
  }
  if (payload_bits(cfg) > target_bits) throw InfeasibleBudget("match_budget: even M = 1 exceeds the budget");
  std::uint32_t lo = 1, hi = cfg.K;  // payload(lo) fits
  while (lo < hi) {
    const std::uint32_t mid = lo + (hi - lo + 1) / 2;
    cfg.M = mid;
    if (payload_bits(cfg) <= target_bits)
      lo = mid;
    else
      hi = mid - 1;
  }
  cfg.M = lo;
  return cfg;
}

/// The model every RCC codec in an experiment shares: the toy grid prior and
/// the linear schedule with the protocol's number of reverse steps.
inline GaussianDenoiser make_model(const ProtocolConfig& cfg, const GridPriorParams& prior = {}) {
  return GaussianDenoiser(GaussianPrior::grid(cfg.height, cfg.width, prior), DiffusionSchedule::linear(cfg.reverse_steps()));
}

using MethodConfig = std::variant<ProtocolConfig, BaselineConfig>;

struct Method {
  std::string label;
  MethodConfig config;
};

inline Method default_method(Protocol p) {
  if (p == Protocol::baseline) return {"baseline", BaselineConfig{}};
  ProtocolConfig cfg;
  cfg.protocol = p;
  switch (p) {
    case Protocol::ddcm: cfg.K = 256; break;
    case Protocol::turbo_lex: cfg.K = 256; cfg.M = 12; cfg.C = 1; break;
    case Protocol::turbo_robust: cfg.K = 256; cfg.M = 12; cfg.C = 1; break;
    case Protocol::baseline: break;
  }
  return {std::string(protocol_name(p)), cfg};
}

struct ExperimentSpec {
  std::vector<Method> methods;
  std::vector<double> bers{0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  std::uint32_t trials = 10;
  std::uint32_t images = 4;
  std::uint32_t height = 64;
  std::uint32_t width = 64;
  std::uint64_t image_seed = 1;
  std::uint64_t channel_seed = 2;
  GridPriorParams prior;
  bool include_header = false;
  // Matched mode: Turbo M and the baseline quantizer are tuned to this many
  // payload bits per image.
  std::optional<std::uint64_t> budget_bits;
  std::string out;      // aggregate CSV; empty = none
  std::string raw_out;  // per-trial JSON lines; empty = none

  void validate() const {
    if (methods.empty()) throw std::invalid_argument("spec: no methods");
    if (bers.empty()) throw std::invalid_argument("spec: no BER values");
    if (!std::is_sorted(bers.begin(), bers.end())) throw std::invalid_argument("spec: BER values must be ascending");
    for (double p : bers)
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("spec: BER outside [0, 1]");
    if (trials < 1) throw std::invalid_argument("spec: trials must be at least 1");
    if (images < 1) throw std::invalid_argument("spec: images must be at least 1");
    std::vector<std::string> labels;
    for (const auto& m : methods) labels.push_back(m.label);
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
      throw std::invalid_argument("spec: duplicate method label");
  }
};

/// Image `i` of an experiment; every method sees the same images.
inline std::vector<double> experiment_image(const ExperimentSpec& spec, std::uint32_t i) {
  return GaussianPrior::grid(spec.height, spec.width, spec.prior).sample(hash_words(spec.image_seed, i));
}

struct ExperimentResult {
  std::vector<TrialRecord> records;
  std::vector<Summary> summaries;
};

namespace detail {

inline std::optional<std::vector<double>> try_decode_rcc(const EncodedFile& file, const ProtocolConfig& cfg,
                                                         const GaussianDenoiser& model) {
  try {
    const ProtocolConfig got = read_config(file);
    // The decoder only holds a model for the configured shape and step count.
    if (got.height != cfg.height || got.width != cfg.width || got.reverse_steps() != cfg.reverse_steps())
      return std::nullopt;
    return reconstruct(unpack_records(file.payload(), got), got, model);
  } catch (const CorruptedFile&) {
    return std::nullopt;
  }
}

inline std::optional<std::vector<double>> try_decode_baseline(const EncodedFile& file, const BaselineConfig& cfg) {
  try {
    const BaselineConfig got = read_baseline_config(file);
    if (got.height != cfg.height || got.width != cfg.width) return std::nullopt;
    return decode_baseline(file);
  } catch (const CorruptedFile&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Pure function of the spec. Files named in spec.out / spec.raw_out are not
/// written here; see write_summary_csv and write_raw_log.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<std::vector<double>> images;
  for (std::uint32_t i = 0; i < spec.images; ++i) images.push_back(experiment_image(spec, i));
  const std::uint64_t pixels = std::uint64_t{spec.height} * spec.width;

  ExperimentResult result;
  for (const auto& method : spec.methods) {
    std::optional<GaussianDenoiser> model;
    std::optional<ProtocolConfig> rcc_cfg;
    if (const auto* p = std::get_if<ProtocolConfig>(&method.config)) {
      ProtocolConfig cfg = *p;
      cfg.height = spec.height;
      cfg.width = spec.width;
      if (spec.budget_bits && cfg.protocol != Protocol::ddcm) cfg = match_budget(*spec.budget_bits, cfg);
      cfg.validate();
      model.emplace(make_model(cfg, spec.prior));
      rcc_cfg = cfg;
    }
    for (std::uint32_t img = 0; img < spec.images; ++img) {
      const auto& x = images[img];
      EncodedFile file;
      std::optional<BaselineConfig> base_cfg;
      if (rcc_cfg) {
        file = encode(x, *rcc_cfg, *model).file;
      } else {
        BaselineConfig cfg = std::get<BaselineConfig>(method.config);
        cfg.height = spec.height;
        cfg.width = spec.width;
        if (spec.budget_bits) cfg = match_baseline_budget(x, *spec.budget_bits, cfg);
        file = encode_baseline(x, cfg).file;
        base_cfg = cfg;
      }
      const std::uint64_t bits = file.header().payload_bits;
      auto decode_any = [&](const EncodedFile& f) {
        return rcc_cfg ? detail::try_decode_rcc(f, *rcc_cfg, *model) : detail::try_decode_baseline(f, *base_cfg);
      };
      // Decoding is deterministic, so an untouched copy reuses the clean decode.
      const auto clean = decode_any(file);
      for (std::size_t b = 0; b < spec.bers.size(); ++b) {
        for (std::uint32_t trial = 0; trial < spec.trials; ++trial) {
          const ChannelModel ch{spec.bers[b], derive_trial_seed(spec.channel_seed, img, b, trial), spec.include_header};
          const EncodedFile received = spec.bers[b] > 0.0 ? corrupt(file, ch) : file;
          const auto decoded = received.bytes() == file.bytes() ? clean : decode_any(received);
          TrialRecord rec{method.label, img, spec.bers[b], trial, std::nullopt, bits, pixels};
          if (decoded) {
            const double m = mse(*decoded, x);
            rec.distortion = Distortion{m, psnr_from_mse(m)};
          }
          result.records.push_back(std::move(rec));
        }
      }
    }
  }
  result.summaries = aggregate(result.records);
  return result;
}

// ---- output -------------------------------------------------------------

/// Shortest decimal that round-trips; "inf" / "-inf" / "nan" otherwise.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline constexpr std::string_view kCsvHeader =
    "protocol,ber,n_trials,n_corrupted,corrupted_fraction,mean_psnr,std_psnr,mean_mse,std_mse,mean_bpp";

inline void write_summary_csv(std::ostream& os, const std::vector<Summary>& summaries) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  os << kCsvHeader << '\n';
  for (const auto& s : summaries) {
    os << s.protocol << ',' << format_number(s.ber) << ',' << s.n_trials << ',' << s.n_corrupted << ','
       << format_number(s.corrupted_fraction) << ',' << opt(s.mean_psnr) << ',' << opt(s.std_psnr) << ','
       << opt(s.mean_mse) << ',' << opt(s.std_mse) << ',' << format_number(s.mean_bpp) << '\n';
  }
}

inline nlohmann::json to_json(const TrialRecord& r) {
  nlohmann::json j{{"protocol", r.protocol}, {"image_id", r.image_id}, {"ber", r.ber},
                   {"trial", r.trial},       {"corrupted", r.corrupted()}, {"payload_bits", r.payload_bits},
                   {"pixels", r.pixels}};
  if (r.distortion) {
    j["mse"] = r.distortion->mse;
    // JSON has no infinity.
    if (std::isinf(r.distortion->psnr))
      j["psnr"] = "inf";
    else
      j["psnr"] = r.distortion->psnr;
  }
  return j;
}

inline void write_raw_log(std::ostream& os, const std::vector<TrialRecord>& records) {
  for (const auto& r : records) os << to_json(r).dump() << '\n';
}

// ---- spec files ---------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    if (auto item = trim(s.substr(start, end - start)); !item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_value(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument("spec: bad value for '" + key + "': " + v);
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("spec: bad boolean for '" + key + "': " + v);
}

}  // namespace detail

/// Applies one `key = value` setting. Per-protocol keys are dotted, e.g.
/// `turbo_lex.M = 8`, `baseline.quality = 0.05`, `prior.length_scale = 4`.
inline void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  using detail::parse_value;
  auto method_for = [&](Protocol p) -> Method& {
    const auto name = protocol_name(p);
    for (auto& m : spec.methods)
      if (m.label == name) return m;
    throw std::invalid_argument("spec: '" + key + "' names a protocol that is not in the protocols list");
  };

  if (key == "protocols") {
    spec.methods.clear();
    for (const auto& name : detail::split_list(value)) spec.methods.push_back(default_method(parse_protocol(name)));
  } else if (key == "bers") {
    spec.bers.clear();
    for (const auto& v : detail::split_list(value)) spec.bers.push_back(parse_value<double>(key, v));
  } else if (key == "trials") {
    spec.trials = parse_value<std::uint32_t>(key, value);
  } else if (key == "images") {
    spec.images = parse_value<std::uint32_t>(key, value);
  } else if (key == "size") {
    spec.height = spec.width = parse_value<std::uint32_t>(key, value);
  } else if (key == "height") {
    spec.height = parse_value<std::uint32_t>(key, value);
  } else if (key == "width") {
    spec.width = parse_value<std::uint32_t>(key, value);
  } else if (key == "image_seed") {
    spec.image_seed = parse_value<std::uint64_t>(key, value);
  } else if (key == "channel_seed") {
    spec.channel_seed = parse_value<std::uint64_t>(key, value);
  } else if (key == "include_header") {
    spec.include_header = detail::parse_bool(key, value);
  } else if (key == "budget_bits") {
    if (value.empty() || value == "none")
      spec.budget_bits.reset();
    else
      spec.budget_bits = parse_value<std::uint64_t>(key, value);
  } else if (key == "out") {
    spec.out = value;
  } else if (key == "raw_out") {
    spec.raw_out = value;
  } else if (key == "prior.mean") {
    spec.prior.mean = parse_value<double>(key, value);
  } else if (key == "prior.amplitude") {
    spec.prior.amplitude = parse_value<double>(key, value);
  } else if (key == "prior.length_scale") {
    spec.prior.length_scale = parse_value<double>(key, value);
  } else if (key == "prior.nugget") {
    spec.prior.nugget = parse_value<double>(key, value);
  } else if (const auto dot = key.find('.'); dot != std::string::npos) {
    const std::string field = key.substr(dot + 1);
    Method& m = method_for(parse_protocol(key.substr(0, dot)));
    if (auto* b = std::get_if<BaselineConfig>(&m.config)) {
      if (field != "quality") throw std::invalid_argument("spec: unknown baseline key '" + key + "'");
      b->quality = parse_value<double>(key, value);
      return;
    }
    auto& cfg = std::get<ProtocolConfig>(m.config);
    if (field == "T") cfg.T = parse_value<std::uint32_t>(key, value);
    else if (field == "K") cfg.K = parse_value<std::uint32_t>(key, value);
    else if (field == "M") cfg.M = parse_value<std::uint32_t>(key, value);
    else if (field == "C") cfg.C = parse_value<std::uint32_t>(key, value);
    else if (field == "N") cfg.N = parse_value<std::uint32_t>(key, value);
    else if (field == "seed") cfg.codebook_seed = parse_value<std::uint64_t>(key, value);
    else throw std::invalid_argument("spec: unknown protocol key '" + key + "'");
  } else {
    throw std::invalid_argument("spec: unknown key '" + key + "'");
  }
}

/// Flat `key = value` text, one setting per line, `#` starts a comment.
/// Settings apply in order, so `protocols` must precede per-protocol keys.
inline ExperimentSpec parse_spec(std::istream& in, ExperimentSpec spec = {}) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("spec: line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(spec, detail::trim(std::string_view(text).substr(0, eq)),
                  detail::trim(std::string_view(text).substr(eq + 1)));
  }
  return spec;
}

inline ExperimentSpec load_spec(const std::string& path, ExperimentSpec spec = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("spec: cannot open " + path);
  return parse_spec(in, std::move(spec));
}

}  // namespace rcc
