// Toy transform codec with variable-length prefix coding and no restart
// markers. Stands in for JPEG-style codecs: one flipped bit can desynchronize
// every symbol after it.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rcc/baseline_core.hpp"
#include "rcc/baseline_tables.hpp"
#include "rcc/bitstream.hpp"
#include "rcc/container.hpp"

namespace rcc {

struct BaselineConfig {
  std::uint32_t block_size = baseline::kBlock;
  double quality = 0.05;  // quantizer step for the DC coefficient; AC steps are weighted up
  std::uint32_t height = 64;
  std::uint32_t width = 64;

  void validate() const {
    if (block_size != baseline::kBlock) throw std::invalid_argument("baseline: only 8x8 blocks are supported");
    if (!(quality > 0.0) || !std::isfinite(quality)) throw std::invalid_argument("baseline: quality must be positive");
    if (height == 0 || width == 0 || height % block_size || width % block_size)
      throw std::invalid_argument("baseline: image size must be a positive multiple of the block size");
  }

  friend bool operator==(const BaselineConfig&, const BaselineConfig&) = default;
};

namespace baseline {

inline BitStream entropy_code(std::span<const CodedSymbol> symbols) {
  static const auto dc_codes = kDcTable.encoder();
  static const auto ac_codes = kAcTable.encoder();
  BitWriter out;
  for (const auto& s : symbols) {
    const auto& code = (s.dc ? dc_codes : ac_codes)[s.symbol];
    if (code.length == 0) throw std::logic_error("baseline: symbol missing from code table");
    out.write(code.bits, code.length);
    out.write(s.extra, s.extra_width);
  }
  return std::move(out).take();
}

/// Inverse of entropy_code + block_symbols. Throws CorruptedFile on an invalid
/// codeword, a run past the end of a block, a stream overrun, or bits left
/// over after the last block.
inline std::vector<QuantizedBlock> entropy_decode(const BitStream& payload, std::size_t n_blocks) {
  static const HuffmanDecoder dc(kDcTable);
  static const HuffmanDecoder ac(kAcTable);
  BitReader in(payload);
  std::vector<QuantizedBlock> blocks(n_blocks);
  int prev_dc = 0;
  try {
    for (auto& q : blocks) {
      q.fill(0);
      const std::uint32_t dcat = dc.decode(in);
      prev_dc += amplitude_value(static_cast<std::uint32_t>(in.read(dcat)), dcat);
      q[0] = prev_dc;
      for (std::uint32_t pos = 1; pos < 64;) {
        const std::uint8_t sym = ac.decode(in);
        if (sym == kEob) break;
        if (sym == kZrl) {
          pos += 16;
          if (pos > 63) throw CorruptedFile("baseline: zero run past end of block");
          continue;
        }
        const std::uint32_t run = sym >> 4;
        const std::uint32_t size = sym & 0x0F;
        pos += run;
        if (pos > 63) throw CorruptedFile("baseline: run past end of block");
        q[kZigzag[pos]] = amplitude_value(static_cast<std::uint32_t>(in.read(size)), size);
        ++pos;
      }
    }
  } catch (const InvalidCodeword& e) {
    throw CorruptedFile(e.what());
  } catch (const BitstreamOverrun&) {
    throw CorruptedFile("baseline: symbol stream ran past end of payload");
  }
  if (in.remaining() != 0) throw CorruptedFile("baseline: bits left after last block");
  return blocks;
}

inline FileHeader header_for(const BaselineConfig& cfg) {
  FileHeader h;
  h.protocol = Protocol::baseline;
  h.T = cfg.block_size;
  h.seed = std::bit_cast<std::uint64_t>(cfg.quality);
  h.height = cfg.height;
  h.width = cfg.width;
  return h;
}

}  // namespace baseline

struct BaselineResult {
  EncodedFile file;
  std::vector<double> reconstruction;
};

inline BaselineResult encode_baseline(std::span<const double> signal, const BaselineConfig& cfg) {
  cfg.validate();
  const auto blocks = baseline::quantize_image(signal, cfg.height, cfg.width, cfg.quality);
  const auto symbols = baseline::block_symbols(blocks);
  BaselineResult r;
  r.file = EncodedFile::assemble(baseline::header_for(cfg), baseline::entropy_code(symbols));
  r.reconstruction = baseline::dequantize_image(blocks, cfg.height, cfg.width, cfg.quality);
  return r;
}

inline BaselineConfig read_baseline_config(const EncodedFile& file) {
  const FileHeader h = file.header();
  if (h.protocol != Protocol::baseline) throw CorruptedFile("baseline: not a baseline file");
  BaselineConfig cfg{h.T, std::bit_cast<double>(h.seed), h.height, h.width};
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw CorruptedFile(std::string("baseline: invalid header: ") + e.what());
  }
  return cfg;
}

inline std::vector<double> decode_baseline(const EncodedFile& file) {
  const BaselineConfig cfg = read_baseline_config(file);
  const std::size_t n_blocks = static_cast<std::size_t>(cfg.height / cfg.block_size) * (cfg.width / cfg.block_size);
  const auto blocks = baseline::entropy_decode(file.payload(), n_blocks);
  return baseline::dequantize_image(blocks, cfg.height, cfg.width, cfg.quality);
}

/// Payload bits of the baseline at a given quantizer step.
inline std::uint64_t baseline_payload_bits(std::span<const double> signal, const BaselineConfig& cfg) {
  cfg.validate();
  return baseline::entropy_code(baseline::block_symbols(baseline::quantize_image(signal, cfg.height, cfg.width, cfg.quality)))
      .size();
}

/// Per-image search over the quantizer step (geometric bisection) for the
/// finest step whose payload fits in `target_bits`.
inline BaselineConfig match_baseline_budget(std::span<const double> signal, std::uint64_t target_bits,
                                            BaselineConfig cfg) {
  double lo = 1e-3;  // fine: too many bits
  double hi = 16.0;  // coarse: fits
  cfg.quality = hi;
  if (baseline_payload_bits(signal, cfg) > target_bits)
    throw std::invalid_argument("match_baseline_budget: infeasible budget");
  double best = hi;
  for (int it = 0; it < 40; ++it) {
    const double mid = std::sqrt(lo * hi);
    cfg.quality = mid;
    if (baseline_payload_bits(signal, cfg) <= target_bits) {
      hi = mid;
      best = mid;
    } else {
      lo = mid;
    }
  }
  cfg.quality = best;
  return cfg;
}

}  // namespace rcc
