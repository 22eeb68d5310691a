// Binary symmetric channel over encoded files.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

#include "rcc/container.hpp"
#include "rcc/random.hpp"

namespace rcc {

struct ChannelModel {
  double p = 0.0;  // bit error rate
  std::uint64_t seed = 0;
  bool include_header = false;
};

/// Seed for one (image, BER, trial) cell of a sweep.
inline std::uint64_t derive_trial_seed(std::uint64_t base, std::uint64_t image, std::uint64_t ber_index,
                                       std::uint64_t trial) {
  return hash_words(base, image, ber_index, trial);
}

/// Flips every covered bit independently with probability p: one SplitMix64
/// draw per bit, flipped when the open-unit uniform is below p. Payload
/// padding is never touched. Header bits come first in draw order when
/// included.
inline EncodedFile corrupt(const EncodedFile& file, const ChannelModel& ch) {
  if (!(ch.p >= 0.0 && ch.p <= 1.0)) throw std::invalid_argument("channel: p must lie in [0, 1]");
  const std::size_t payload = file.header().payload_bits;
  EncodedFile out = file;
  auto& bytes = out.mutable_bytes();
  SplitMix64 rng(ch.seed);
  auto maybe_flip = [&](std::size_t absolute_bit) {
    if (open_unit(rng()) < ch.p) bytes[absolute_bit >> 3] ^= static_cast<std::uint8_t>(1U << (7 - (absolute_bit & 7)));
  };
  if (ch.include_header)
    for (std::size_t i = 0; i < EncodedFile::payload_bit_offset(); ++i) maybe_flip(i);
  for (std::size_t i = 0; i < payload; ++i) maybe_flip(EncodedFile::payload_bit_offset() + i);
  return out;
}

/// Inverts exactly the given payload bit offsets (duplicates flip twice).
inline EncodedFile flip_exact(const EncodedFile& file, std::span<const std::size_t> positions) {
  const std::size_t payload = file.header().payload_bits;
  EncodedFile out = file;
  auto& bytes = out.mutable_bytes();
  for (std::size_t i : positions) {
    if (i >= payload) throw std::out_of_range("flip_exact: offset beyond payload");
    const std::size_t bit = EncodedFile::payload_bit_offset() + i;
    bytes[bit >> 3] ^= static_cast<std::uint8_t>(1U << (7 - (bit & 7)));
  }
  return out;
}

inline EncodedFile flip_exact(const EncodedFile& file, std::initializer_list<std::size_t> positions) {
  return flip_exact(file, std::span<const std::size_t>(positions.begin(), positions.size()));
}

}  // namespace rcc
