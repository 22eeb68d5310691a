// DDCM, Turbo-DDCM (lexicographic subset index) and Robust Turbo-DDCM
// (one integer per atom) encoders and decoders.
//
// Step records are laid out in trajectory order, noisiest step first:
//   DDCM          ceil(log2 K) index bits
//   TURBO_LEX     ceil(log2 C(K,M)) subset-rank bits, then M x C coefficient bits
//   TURBO_ROBUST  M x (ceil(log2 K) index bits + C coefficient bits)
// Atoms and coefficients always appear in ascending atom order.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rcc/bitstream.hpp"
#include "rcc/codebook.hpp"
#include "rcc/combinadics.hpp"
#include "rcc/container.hpp"
#include "rcc/diffusion.hpp"
#include "rcc/sparse_approx.hpp"

namespace rcc {

/// What one coded step transmits. DDCM records carry one index and no codes.
struct StepRecord {
  std::vector<std::uint32_t> indices;
  std::vector<std::uint32_t> codes;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

namespace detail {

// Cached per-config packing widths.
struct StepLayout {
  Protocol protocol;
  std::uint32_t K, M, C;
  std::uint32_t index_width;   // ceil(log2 K)
  std::uint32_t subset_width;  // ceil(log2 C(K, M)), lex only

  explicit StepLayout(const ProtocolConfig& cfg)
      : protocol(cfg.protocol), K(cfg.K), M(cfg.M), C(cfg.C), index_width(index_bits(cfg.K)),
        subset_width(cfg.protocol == Protocol::turbo_lex ? ceil_log2(binomial(cfg.K, cfg.M)) : 0) {}
};

inline void pack_step(BitWriter& out, const StepRecord& rec, const StepLayout& layout) {
  const std::uint32_t expected_codes = layout.protocol == Protocol::ddcm ? 0 : layout.M;
  if (rec.indices.size() != layout.M || rec.codes.size() != expected_codes)
    throw std::invalid_argument("pack_step: record does not match M");
  for (std::uint32_t c : rec.codes)
    if (layout.C < 32 && c >> layout.C) throw std::invalid_argument("pack_step: coefficient code exceeds C bits");
  switch (layout.protocol) {
    case Protocol::ddcm:
      if (rec.indices[0] >= layout.K) throw std::invalid_argument("pack_step: atom index >= K");
      out.write(rec.indices[0], layout.index_width);
      return;
    case Protocol::turbo_lex: {
      SubsetIndex index = rank_combination(rec.indices, layout.K);
      for (std::uint32_t i = layout.subset_width; i-- > 0;) out.write_bit(boost::multiprecision::bit_test(index.value, i));
      for (std::uint32_t c : rec.codes) out.write(c, layout.C);
      return;
    }
    case Protocol::turbo_robust:
      for (std::size_t j = 0; j < rec.indices.size(); ++j) {
        if (rec.indices[j] >= layout.K) throw std::invalid_argument("pack_step: atom index >= K");
        out.write(rec.indices[j], layout.index_width);
        out.write(rec.codes[j], layout.C);
      }
      return;
    case Protocol::baseline: break;
  }
  throw std::invalid_argument("pack_step: not an RCC protocol");
}

// Robust and DDCM indices read verbatim; values >= K survive here and are
// reduced modulo K when the noise is built. Lex throws CorruptedFile on an
// index >= C(K, M).
inline StepRecord unpack_step(BitReader& in, const StepLayout& layout) {
  StepRecord rec;
  switch (layout.protocol) {
    case Protocol::ddcm:
      rec.indices.push_back(static_cast<std::uint32_t>(in.read(layout.index_width)));
      return rec;
    case Protocol::turbo_lex: {
      SubsetIndex index{0, layout.K, layout.M};
      for (std::uint32_t i = 0; i < layout.subset_width; ++i) {
        index.value <<= 1;
        if (in.read_bit()) index.value |= 1;
      }
      try {
        rec.indices = unrank_combination(index);
      } catch (const InvalidIndex& e) {
        throw CorruptedFile(std::string("turbo_lex: ") + e.what());
      }
      for (std::uint32_t j = 0; j < layout.M; ++j) rec.codes.push_back(static_cast<std::uint32_t>(in.read(layout.C)));
      return rec;
    }
    case Protocol::turbo_robust:
      for (std::uint32_t j = 0; j < layout.M; ++j) {
        rec.indices.push_back(static_cast<std::uint32_t>(in.read(layout.index_width)));
        rec.codes.push_back(static_cast<std::uint32_t>(in.read(layout.C)));
      }
      return rec;
    case Protocol::baseline: break;
  }
  throw std::invalid_argument("unpack_step: not an RCC protocol");
}

}  // namespace detail

inline void pack_step(BitWriter& out, const StepRecord& rec, const ProtocolConfig& cfg) {
  detail::pack_step(out, rec, detail::StepLayout(cfg));
}

inline StepRecord unpack_step(BitReader& in, const ProtocolConfig& cfg) {
  return detail::unpack_step(in, detail::StepLayout(cfg));
}

inline BitStream pack_records(std::span<const StepRecord> records, const ProtocolConfig& cfg) {
  if (records.size() != cfg.coded_steps()) throw std::invalid_argument("pack_records: wrong number of steps");
  const detail::StepLayout layout(cfg);
  BitWriter out;
  for (const auto& rec : records) detail::pack_step(out, rec, layout);
  return std::move(out).take();
}

/// Inverse of pack_records. Throws CorruptedFile on an invalid lex index.
inline std::vector<StepRecord> unpack_records(const BitStream& payload, const ProtocolConfig& cfg) {
  if (payload.size() != payload_bits(cfg)) throw CorruptedFile("payload length does not match configuration");
  const detail::StepLayout layout(cfg);
  BitReader in(payload);
  std::vector<StepRecord> records;
  records.reserve(cfg.coded_steps());
  for (std::uint32_t s = 0; s < cfg.coded_steps(); ++s) records.push_back(detail::unpack_step(in, layout));
  return records;
}

namespace detail {

template <Denoiser D>
void check_model(const ProtocolConfig& cfg, const D& model) {
  cfg.validate();
  if (model.dim() != cfg.dim()) throw std::invalid_argument("codec: model dim does not match image size");
  if (model.schedule().steps() != cfg.reverse_steps())
    throw std::invalid_argument("codec: model schedule does not match protocol step count");
}

// Noise injected for one decoded record. Indices >= K (only possible after
// corruption with K not a power of two) wrap modulo K. A combination with no
// spread, e.g. a corrupted robust record that names one atom twice with
// opposite signs, contributes zero noise.
inline std::vector<double> record_noise(const StepRecord& rec, std::uint32_t step, const Codebook& cb,
                                        const ProtocolConfig& cfg, const ValueSet& vset) {
  if (cfg.protocol == Protocol::ddcm) return cb.atom(step, rec.indices.at(0) % cfg.K);
  SparseSelection sel{step, {}, rec.codes};
  sel.indices.reserve(rec.indices.size());
  for (std::uint32_t k : rec.indices) sel.indices.push_back(k % cfg.K);
  try {
    return synthesize_noise(sel, cb, vset);
  } catch (const DegenerateCombination&) {
    return std::vector<double>(cb.dim(), 0.0);
  }
}

// Runs the full reverse trajectory. `noise_for` is called once per coded step
// with (step index, state) and returns the noise for that step. Encoder and
// decoder share this loop, which makes their reconstructions bit-identical.
template <Denoiser D, class NoiseFn>
std::vector<double> run_trajectory(const ProtocolConfig& cfg, const D& model, const Codebook& cb, NoiseFn&& noise_for) {
  const std::uint32_t S = cfg.reverse_steps();
  DiffusionState state{S, cb.initial_noise()};
  const std::vector<double> zero(cfg.dim(), 0.0);
  std::uint32_t step = 0;
  while (state.t >= 1) {
    if (state.t >= cfg.N + 2) {
      const std::vector<double> noise = noise_for(step, state);
      state = reverse_step(model, state, noise);
      ++step;
    } else if (state.t >= 2) {
      state = ddim_step(model, state);
    } else {
      state = reverse_step(model, state, zero);
    }
  }
  return std::move(state.x);
}

}  // namespace detail

struct EncodeResult {
  EncodedFile file;
  std::vector<double> reconstruction;
  std::vector<StepRecord> records;
};

/// Steers the reverse trajectory toward `signal` and records the selections.
template <Denoiser D>
EncodeResult encode(std::span<const double> signal, const ProtocolConfig& cfg, const D& model) {
  detail::check_model(cfg, model);
  if (signal.size() != cfg.dim()) throw std::invalid_argument("encode: signal length does not match image size");
  const Codebook cb(cfg.codebook_seed, cfg.T, cfg.K, cfg.dim());
  const ValueSet vset = cfg.value_set();

  EncodeResult result;
  result.records.reserve(cfg.coded_steps());
  std::vector<double> residual(cfg.dim());
  auto choose = [&](std::uint32_t step, const DiffusionState& state) {
    const std::vector<double> x0_hat = model.mmse_estimate(state.x, state.t);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = signal[i] - x0_hat[i];
    StepRecord rec;
    if (cfg.protocol == Protocol::ddcm) {
      rec.indices.push_back(ddcm_select(residual, cb, step));
    } else {
      SparseSelection sel = select_atoms(residual, cb, step, cfg.M, vset);
      rec.indices = std::move(sel.indices);
      rec.codes = std::move(sel.coeff_codes);
    }
    result.records.push_back(rec);
    return detail::record_noise(rec, step, cb, cfg, vset);
  };
  result.reconstruction = detail::run_trajectory(cfg, model, cb, choose);

  const BitStream payload = pack_records(result.records, cfg);
  result.file = EncodedFile::assemble(FileHeader::from_config(cfg, 0), payload);
  return result;
}

/// Parses and validates the header of an RCC file.
inline ProtocolConfig read_config(const EncodedFile& file) {
  const FileHeader h = file.header();
  if (h.protocol == Protocol::baseline) throw CorruptedFile("decode: baseline file given to RCC decoder");
  ProtocolConfig cfg = h.to_config();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw CorruptedFile(std::string("decode: invalid header: ") + e.what());
  }
  if (h.payload_bits != payload_bits(cfg)) throw CorruptedFile("decode: payload length does not match header");
  return cfg;
}

inline std::vector<StepRecord> decode_records(const EncodedFile& file) {
  const ProtocolConfig cfg = read_config(file);
  return unpack_records(file.payload(), cfg);
}

/// Replays the trajectory from already unpacked records.
template <Denoiser D>
std::vector<double> reconstruct(std::span<const StepRecord> records, const ProtocolConfig& cfg, const D& model) {
  detail::check_model(cfg, model);
  if (records.size() != cfg.coded_steps()) throw std::invalid_argument("reconstruct: wrong number of records");
  const Codebook cb(cfg.codebook_seed, cfg.T, cfg.K, cfg.dim());
  const ValueSet vset = cfg.value_set();
  auto replay = [&](std::uint32_t step, const DiffusionState&) {
    return detail::record_noise(records[step], step, cb, cfg, vset);
  };
  return detail::run_trajectory(cfg, model, cb, replay);
}

/// Throws CorruptedFile when the file cannot be decoded.
template <Denoiser D>
std::vector<double> decode(const EncodedFile& file, const D& model) {
  const ProtocolConfig cfg = read_config(file);
  const std::vector<StepRecord> records = unpack_records(file.payload(), cfg);
  return reconstruct(records, cfg, model);
}

}  // namespace rcc
