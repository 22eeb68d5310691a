// Protocol configuration, exact payload accounting and the on-disk container.
//
// Container layout (all integers little-endian):
//
//   offset  size  field
//        0     4  magic "RCC1"
//        4     1  format version (1)
//        5     1  protocol id: 0 DDCM, 1 TURBO_LEX, 2 TURBO_ROBUST, 3 BASELINE
//        6    20  T, K, M, C, N            (u32 each)
//       26     8  codebook seed            (u64)
//       34     8  height, width            (u32 each)
//       42     4  payload length in bits   (u32)
//       46     -  payload, MSB first, final byte zero-padded
//
// The baseline codec reuses the frame: T holds the block size and the seed
// slot holds the IEEE-754 bits of the quantizer step; K, M, C, N are zero.
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rcc/bitstream.hpp"
#include "rcc/combinadics.hpp"
#include "rcc/sparse_approx.hpp"

namespace rcc {

enum class Protocol : std::uint8_t { ddcm = 0, turbo_lex = 1, turbo_robust = 2, baseline = 3 };

inline std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::ddcm: return "ddcm";
    case Protocol::turbo_lex: return "turbo_lex";
    case Protocol::turbo_robust: return "turbo_robust";
    case Protocol::baseline: return "baseline";
  }
  return "unknown";
}

inline Protocol parse_protocol(std::string_view name) {
  for (auto p : {Protocol::ddcm, Protocol::turbo_lex, Protocol::turbo_robust, Protocol::baseline})
    if (protocol_name(p) == name) return p;
  throw std::invalid_argument("unknown protocol '" + std::string(name) + "'");
}

/// A file that cannot be decoded: bad header, invalid lexicographic index,
/// desynchronized prefix code. Counted by the harness, never fatal.
class CorruptedFile : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (T, K, M, C, N, seed, image size) fully determines an RCC codec instance.
struct ProtocolConfig {
  Protocol protocol = Protocol::turbo_robust;
  std::uint32_t T = 20;
  std::uint32_t K = 256;
  std::uint32_t M = 1;
  std::uint32_t C = 0;
  std::uint32_t N = 0;
  std::uint64_t codebook_seed = 0;
  std::uint32_t height = 64;
  std::uint32_t width = 64;

  static ProtocolConfig ddcm(std::uint32_t T, std::uint32_t K, std::uint64_t seed, std::uint32_t h, std::uint32_t w) {
    return {Protocol::ddcm, T, K, 1, 0, 0, seed, h, w};
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(height) * width; }

  /// Reverse steps run by the diffusion engine: DDCM codes every step
  /// t = T+1 .. 2 and then takes the noiseless t = 1 step; the Turbo variants
  /// run T steps in total.
  std::uint32_t reverse_steps() const noexcept { return protocol == Protocol::ddcm ? T + 1 : T; }

  /// Steps that carry payload bits: T for DDCM, T - N - 1 for Turbo.
  std::uint32_t coded_steps() const noexcept { return protocol == Protocol::ddcm ? T : T - N - 1; }

  ValueSet value_set() const { return ValueSet::symmetric_levels(C); }

  void validate() const {
    if (protocol == Protocol::baseline) throw std::invalid_argument("config: baseline is not an RCC protocol");
    if (T < 2) throw std::invalid_argument("config: T must be at least 2");
    if (K < 1 || K > (1U << 24)) throw std::invalid_argument("config: K must be in [1, 2^24]");
    if (M < 1 || M > K) throw std::invalid_argument("config: M must be in [1, K]");
    if (C > 16) throw std::invalid_argument("config: C must be at most 16");
    if (N > T - 2) throw std::invalid_argument("config: N must be at most T - 2");
    if (height == 0 || width == 0) throw std::invalid_argument("config: empty image");
    if (protocol == Protocol::ddcm && (M != 1 || C != 0 || N != 0))
      throw std::invalid_argument("config: DDCM requires M = 1, C = 0, N = 0");
  }

  friend bool operator==(const ProtocolConfig&, const ProtocolConfig&) = default;
};

inline std::uint32_t index_bits(std::uint32_t K) { return ceil_log2(static_cast<std::uint64_t>(K)); }

/// Payload bits of one coded step.
inline std::uint64_t step_bits(const ProtocolConfig& cfg) {
  switch (cfg.protocol) {
    case Protocol::ddcm: return index_bits(cfg.K);
    case Protocol::turbo_lex: return ceil_log2(binomial(cfg.K, cfg.M)) + std::uint64_t{cfg.M} * cfg.C;
    case Protocol::turbo_robust: return std::uint64_t{cfg.M} * (index_bits(cfg.K) + cfg.C);
    case Protocol::baseline: break;
  }
  throw std::invalid_argument("step_bits: not an RCC protocol");
}

/// DDCM: T ceil(log2 K). Turbo-lex: (T-N-1)(ceil(log2 C(K,M)) + MC).
/// Turbo-robust: (T-N-1)(M ceil(log2 K) + MC).
inline std::uint64_t payload_bits(const ProtocolConfig& cfg) { return cfg.coded_steps() * step_bits(cfg); }

inline double bits_per_pixel(std::uint64_t bits, std::uint32_t height, std::uint32_t width) {
  return static_cast<double>(bits) / (static_cast<double>(height) * width);
}

struct FileHeader {
  Protocol protocol = Protocol::ddcm;
  std::uint32_t T = 0, K = 0, M = 0, C = 0, N = 0;
  std::uint64_t seed = 0;
  std::uint32_t height = 0, width = 0;
  std::uint32_t payload_bits = 0;

  static FileHeader from_config(const ProtocolConfig& cfg, std::uint32_t bits) {
    return {cfg.protocol, cfg.T, cfg.K, cfg.M, cfg.C, cfg.N, cfg.codebook_seed, cfg.height, cfg.width, bits};
  }

  ProtocolConfig to_config() const { return {protocol, T, K, M, C, N, seed, height, width}; }

  friend bool operator==(const FileHeader&, const FileHeader&) = default;
};

/// The wire image of one compressed file: header bytes followed by payload.
class EncodedFile {
 public:
  static constexpr std::array<char, 4> kMagic{'R', 'C', 'C', '1'};
  static constexpr std::uint8_t kVersion = 1;
  static constexpr std::size_t kHeaderBytes = 46;

  EncodedFile() = default;

  static EncodedFile assemble(FileHeader header, const BitStream& payload) {
    if (payload.size() > UINT32_MAX) throw std::invalid_argument("container: payload too long");
    header.payload_bits = static_cast<std::uint32_t>(payload.size());
    EncodedFile f;
    auto& b = f.bytes_;
    b.reserve(kHeaderBytes + payload.bytes().size());
    b.insert(b.end(), kMagic.begin(), kMagic.end());
    b.push_back(kVersion);
    b.push_back(static_cast<std::uint8_t>(header.protocol));
    for (std::uint32_t v : {header.T, header.K, header.M, header.C, header.N}) put_le(b, v, 4);
    put_le(b, header.seed, 8);
    put_le(b, header.height, 4);
    put_le(b, header.width, 4);
    put_le(b, header.payload_bits, 4);
    b.insert(b.end(), payload.bytes().begin(), payload.bytes().end());
    return f;
  }

  /// Wraps raw bytes without validation; header() and payload() validate.
  static EncodedFile from_bytes(std::vector<std::uint8_t> bytes) {
    EncodedFile f;
    f.bytes_ = std::move(bytes);
    return f;
  }

  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::vector<std::uint8_t>& mutable_bytes() noexcept { return bytes_; }

  FileHeader header() const {
    if (bytes_.size() < kHeaderBytes) throw CorruptedFile("container: truncated header");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes_.begin())) throw CorruptedFile("container: bad magic");
    if (bytes_[4] != kVersion) throw CorruptedFile("container: unsupported version");
    if (bytes_[5] > static_cast<std::uint8_t>(Protocol::baseline)) throw CorruptedFile("container: unknown protocol");
    FileHeader h;
    h.protocol = static_cast<Protocol>(bytes_[5]);
    h.T = get_le<std::uint32_t>(6);
    h.K = get_le<std::uint32_t>(10);
    h.M = get_le<std::uint32_t>(14);
    h.C = get_le<std::uint32_t>(18);
    h.N = get_le<std::uint32_t>(22);
    h.seed = get_le<std::uint64_t>(26);
    h.height = get_le<std::uint32_t>(34);
    h.width = get_le<std::uint32_t>(38);
    h.payload_bits = get_le<std::uint32_t>(42);
    if (bytes_.size() != kHeaderBytes + (std::uint64_t{h.payload_bits} + 7) / 8)
      throw CorruptedFile("container: payload length does not match header");
    return h;
  }

  BitStream payload() const {
    const FileHeader h = header();
    return BitStream({bytes_.begin() + kHeaderBytes, bytes_.end()}, h.payload_bits);
  }

  /// Absolute bit offset of payload bit 0 within bytes().
  static constexpr std::size_t payload_bit_offset() noexcept { return kHeaderBytes * 8; }

  friend bool operator==(const EncodedFile&, const EncodedFile&) = default;

 private:
  static void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  template <class T>
  T get_le(std::size_t offset) const {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{bytes_[offset + i]} << (8 * i);
    return static_cast<T>(v);
  }

  std::vector<std::uint8_t> bytes_;
};

inline void write_file(const std::string& path, const EncodedFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(file.bytes().data()), static_cast<std::streamsize>(file.bytes().size()));
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline EncodedFile read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return EncodedFile::from_bytes(std::move(bytes));
}

}  // namespace rcc
