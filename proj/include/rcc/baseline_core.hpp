// Building blocks of the transform + prefix-code baseline: 8x8 DCT,
// quantization, zigzag run-length symbols and canonical Huffman tables.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "rcc/bitstream.hpp"

namespace rcc::baseline {

inline constexpr std::uint32_t kBlock = 8;
inline constexpr std::uint32_t kMaxCodeLength = 16;
inline constexpr int kMaxMagnitude = 16383;  // keeps DC differences within 15 bits

inline constexpr std::uint8_t kEob = 0x00;
inline constexpr std::uint8_t kZrl = 0xF0;

inline constexpr std::array<std::uint8_t, 64> kZigzag{
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,  12, 19, 26, 33, 40, 48,
    41, 34, 27, 20, 13, 6,  7,  14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23,
    30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

// Standard luminance quantization matrix divided by 16, so the DC weight is 1.
inline constexpr std::array<double, 64> kStepWeights = [] {
  constexpr std::array<int, 64> q{16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
                                  14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
                                  18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
                                  49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
  std::array<double, 64> w{};
  for (std::size_t i = 0; i < 64; ++i) w[i] = q[i] / 16.0;
  return w;
}();

/// Orthonormal 1-D DCT-II basis, basis[u][x].
inline const std::array<std::array<double, kBlock>, kBlock>& dct_basis() {
  static const auto basis = [] {
    std::array<std::array<double, kBlock>, kBlock> b{};
    const double pi = std::acos(-1.0);
    for (std::uint32_t u = 0; u < kBlock; ++u)
      for (std::uint32_t x = 0; x < kBlock; ++x) {
        const double scale = u == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
        b[u][x] = scale * std::cos((2.0 * x + 1.0) * u * pi / (2.0 * kBlock));
      }
    return b;
  }();
  return basis;
}

using Block = std::array<double, 64>;

inline Block forward_dct(const Block& pixels) {
  const auto& b = dct_basis();
  Block tmp{}, out{};
  for (std::uint32_t y = 0; y < kBlock; ++y)
    for (std::uint32_t u = 0; u < kBlock; ++u) {
      double s = 0.0;
      for (std::uint32_t x = 0; x < kBlock; ++x) s += b[u][x] * pixels[y * kBlock + x];
      tmp[y * kBlock + u] = s;
    }
  for (std::uint32_t v = 0; v < kBlock; ++v)
    for (std::uint32_t u = 0; u < kBlock; ++u) {
      double s = 0.0;
      for (std::uint32_t y = 0; y < kBlock; ++y) s += b[v][y] * tmp[y * kBlock + u];
      out[v * kBlock + u] = s;
    }
  return out;
}

inline Block inverse_dct(const Block& coeffs) {
  const auto& b = dct_basis();
  Block tmp{}, out{};
  for (std::uint32_t y = 0; y < kBlock; ++y)
    for (std::uint32_t u = 0; u < kBlock; ++u) {
      double s = 0.0;
      for (std::uint32_t v = 0; v < kBlock; ++v) s += b[v][y] * coeffs[v * kBlock + u];
      tmp[y * kBlock + u] = s;
    }
  for (std::uint32_t y = 0; y < kBlock; ++y)
    for (std::uint32_t x = 0; x < kBlock; ++x) {
      double s = 0.0;
      for (std::uint32_t u = 0; u < kBlock; ++u) s += b[u][x] * tmp[y * kBlock + u];
      out[y * kBlock + x] = s;
    }
  return out;
}

using QuantizedBlock = std::array<int, 64>;  // natural (row-major) order

/// Level-shifts by 0.5, transforms and quantizes every 8x8 block, raster order.
inline std::vector<QuantizedBlock> quantize_image(std::span<const double> signal, std::uint32_t height,
                                                  std::uint32_t width, double step) {
  if (height % kBlock || width % kBlock || height == 0 || width == 0)
    throw std::invalid_argument("baseline: image size must be a positive multiple of 8");
  if (signal.size() != static_cast<std::size_t>(height) * width)
    throw std::invalid_argument("baseline: signal length does not match image size");
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("baseline: quantizer step must be positive");
  std::vector<QuantizedBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(height / kBlock) * (width / kBlock));
  for (std::uint32_t by = 0; by < height; by += kBlock)
    for (std::uint32_t bx = 0; bx < width; bx += kBlock) {
      Block px{};
      for (std::uint32_t y = 0; y < kBlock; ++y)
        for (std::uint32_t x = 0; x < kBlock; ++x)
          px[y * kBlock + x] = signal[static_cast<std::size_t>(by + y) * width + bx + x] - 0.5;
      const Block c = forward_dct(px);
      QuantizedBlock q{};
      for (std::size_t i = 0; i < 64; ++i) {
        const double level = std::nearbyint(c[i] / (step * kStepWeights[i]));
        q[i] = static_cast<int>(std::clamp(level, -double(kMaxMagnitude), double(kMaxMagnitude)));
      }
      blocks.push_back(q);
    }
  return blocks;
}

inline std::vector<double> dequantize_image(std::span<const QuantizedBlock> blocks, std::uint32_t height,
                                            std::uint32_t width, double step) {
  std::vector<double> out(static_cast<std::size_t>(height) * width);
  std::size_t b = 0;
  for (std::uint32_t by = 0; by < height; by += kBlock)
    for (std::uint32_t bx = 0; bx < width; bx += kBlock, ++b) {
      Block c{};
      for (std::size_t i = 0; i < 64; ++i) c[i] = blocks[b][i] * step * kStepWeights[i];
      const Block px = inverse_dct(c);
      for (std::uint32_t y = 0; y < kBlock; ++y)
        for (std::uint32_t x = 0; x < kBlock; ++x)
          out[static_cast<std::size_t>(by + y) * width + bx + x] = px[y * kBlock + x] + 0.5;
    }
  return out;
}

/// Number of bits needed for |v| (JPEG "category").
inline std::uint32_t magnitude_category(int v) {
  std::uint32_t n = 0;
  for (unsigned a = static_cast<unsigned>(std::abs(v)); a; a >>= 1) ++n;
  return n;
}

/// Amplitude bits: v >= 0 as is, v < 0 as v + 2^n - 1 (leading 0).
inline std::uint32_t amplitude_bits(int v, std::uint32_t n) {
  return v >= 0 ? static_cast<std::uint32_t>(v) : static_cast<std::uint32_t>(v + (1 << n) - 1);
}

inline int amplitude_value(std::uint32_t bits, std::uint32_t n) {
  if (n == 0) return 0;
  if (bits >> (n - 1)) return static_cast<int>(bits);
  return static_cast<int>(bits) - (1 << n) + 1;
}

/// One entropy-coded event: a Huffman symbol plus `extra_width` raw bits.
struct CodedSymbol {
  bool dc;
  std::uint8_t symbol;
  std::uint32_t extra;
  std::uint32_t extra_width;
};

/// DC: DPCM against the previous block's DC. AC: zigzag (run, size) pairs
/// with ZRL for 16-zero runs and EOB when the rest of the block is zero.
inline std::vector<CodedSymbol> block_symbols(std::span<const QuantizedBlock> blocks) {
  std::vector<CodedSymbol> out;
  int prev_dc = 0;
  for (const auto& q : blocks) {
    const int diff = q[0] - prev_dc;
    prev_dc = q[0];
    const std::uint32_t dcat = magnitude_category(diff);
    out.push_back({true, static_cast<std::uint8_t>(dcat), amplitude_bits(diff, dcat), dcat});
    std::uint32_t run = 0;
    int last_nonzero = 0;
    for (int i = 63; i >= 1; --i)
      if (q[kZigzag[i]] != 0) {
        last_nonzero = i;
        break;
      }
    for (int i = 1; i <= last_nonzero; ++i) {
      const int v = q[kZigzag[i]];
      if (v == 0) {
        ++run;
        continue;
      }
      while (run > 15) {
        out.push_back({false, kZrl, 0, 0});
        run -= 16;
      }
      const std::uint32_t cat = magnitude_category(v);
      out.push_back({false, static_cast<std::uint8_t>((run << 4) | cat), amplitude_bits(v, cat), cat});
      run = 0;
    }
    if (last_nonzero < 63) out.push_back({false, kEob, 0, 0});
  }
  return out;
}

/// Canonical prefix code in JPEG form: counts[l] codes of length l + 1, then
/// the symbols in code order. The all-ones codeword of the longest length is
/// never assigned, so the code is complete only together with that reserved
/// word; reading it is a decoding error.
struct HuffmanTable {
  std::array<std::uint8_t, kMaxCodeLength> counts{};
  std::vector<std::uint8_t> symbols;

  struct Code {
    std::uint32_t bits = 0;
    std::uint32_t length = 0;  // 0: symbol not in table
  };

  /// Encoder view indexed by symbol.
  std::array<Code, 256> encoder() const {
    std::array<Code, 256> codes{};
    std::uint32_t code = 0;
    std::size_t k = 0;
    for (std::uint32_t len = 1; len <= kMaxCodeLength; ++len) {
      for (std::uint32_t i = 0; i < counts[len - 1]; ++i) codes[symbols[k++]] = {code++, len};
      code <<= 1;
    }
    return codes;
  }

  /// Kraft sum counting the reserved codeword; exactly 1 for a valid table.
  double kraft_sum_with_reserved() const {
    double s = 0.0;
    std::uint32_t longest = 0;
    for (std::uint32_t len = 1; len <= kMaxCodeLength; ++len) {
      s += counts[len - 1] * std::ldexp(1.0, -static_cast<int>(len));
      if (counts[len - 1]) longest = len;
    }
    return s + std::ldexp(1.0, -static_cast<int>(longest));
  }
};

/// Thrown on a codeword that is not in the table.
class InvalidCodeword : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HuffmanDecoder {
 public:
  explicit HuffmanDecoder(const HuffmanTable& table) : symbols_(table.symbols) {
    std::int64_t code = 0;
    std::uint32_t k = 0;
    for (std::uint32_t len = 1; len <= kMaxCodeLength; ++len) {
      const std::uint32_t n = table.counts[len - 1];
      offset_[len] = k;
      min_code_[len] = code;
      max_code_[len] = n ? code + n - 1 : -1;
      code += n;
      k += n;
      code <<= 1;
    }
  }

  std::uint8_t decode(BitReader& in) const {
    std::int64_t code = 0;
    for (std::uint32_t len = 1; len <= kMaxCodeLength; ++len) {
      code = (code << 1) | static_cast<std::int64_t>(in.read_bit());
      if (max_code_[len] >= 0 && code >= min_code_[len] && code <= max_code_[len])
        return symbols_[offset_[len] + static_cast<std::uint32_t>(code - min_code_[len])];
    }
    throw InvalidCodeword("huffman: invalid codeword");
  }

 private:
  std::vector<std::uint8_t> symbols_;
  std::array<std::int64_t, kMaxCodeLength + 1> min_code_{};
  std::array<std::int64_t, kMaxCodeLength + 1> max_code_{};
  std::array<std::uint32_t, kMaxCodeLength + 1> offset_{};
};

/// Length-limited canonical Huffman code for the symbols with nonzero
/// frequency, with one extra least-frequent reserved leaf (the all-ones word).
/// Lengths are capped at 16 with the standard JPEG bit-count adjustment.
inline HuffmanTable build_huffman_table(const std::array<std::uint64_t, 256>& freq) {
  struct Node {
    std::uint64_t weight;
    std::uint32_t id;
  };
  auto heavier = [](const Node& a, const Node& b) { return a.weight > b.weight || (a.weight == b.weight && a.id > b.id); };
  constexpr std::uint32_t kReserved = 256;
  std::vector<std::int32_t> parent;
  std::vector<std::uint32_t> leaves;
  std::priority_queue<Node, std::vector<Node>, decltype(heavier)> pq(heavier);
  // Scale real weights so the reserved leaf (weight 1) is strictly the lightest.
  for (std::uint32_t s = 0; s < 256; ++s)
    if (freq[s]) {
      leaves.push_back(s);
      parent.push_back(-1);
      pq.push({2 * freq[s] + 2, static_cast<std::uint32_t>(parent.size() - 1)});
    }
  if (leaves.empty()) throw std::invalid_argument("huffman: no symbols");
  leaves.push_back(kReserved);
  parent.push_back(-1);
  pq.push({1, static_cast<std::uint32_t>(parent.size() - 1)});
  const std::size_t n_leaves = leaves.size();
  while (pq.size() > 1) {
    const Node a = pq.top();
    pq.pop();
    const Node b = pq.top();
    pq.pop();
    parent.push_back(-1);
    const auto id = static_cast<std::uint32_t>(parent.size() - 1);
    parent[a.id] = static_cast<std::int32_t>(id);
    parent[b.id] = static_cast<std::int32_t>(id);
    pq.push({a.weight + b.weight, id});
  }
  std::vector<std::uint32_t> depth(n_leaves);
  std::array<std::uint32_t, 300> bits{};
  for (std::size_t i = 0; i < n_leaves; ++i) {
    std::uint32_t d = 0;
    for (std::int32_t p = parent[i]; p >= 0; p = parent[static_cast<std::size_t>(p)]) ++d;
    depth[i] = std::max<std::uint32_t>(d, 1);
    ++bits[depth[i]];
  }
  for (std::uint32_t i = static_cast<std::uint32_t>(bits.size()) - 1; i > kMaxCodeLength; --i) {
    while (bits[i] > 0) {
      std::uint32_t j = i - 2;
      while (bits[j] == 0) --j;
      bits[i] -= 2;
      bits[i - 1] += 1;
      bits[j + 1] += 2;
      bits[j] -= 1;
    }
  }
  // Order leaves by (depth, reserved last, symbol), then drop the reserved
  // word, which is now the very last code.
  std::vector<std::size_t> order(n_leaves);
  for (std::size_t i = 0; i < n_leaves; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (depth[a] != depth[b]) return depth[a] < depth[b];
    return leaves[a] < leaves[b];
  });
  std::uint32_t longest = kMaxCodeLength;
  while (bits[longest] == 0) --longest;
  bits[longest] -= 1;

  HuffmanTable table;
  for (std::uint32_t len = 1; len <= kMaxCodeLength; ++len) table.counts[len - 1] = static_cast<std::uint8_t>(bits[len]);
  for (std::size_t i : order)
    if (leaves[i] != kReserved) table.symbols.push_back(static_cast<std::uint8_t>(leaves[i]));
  return table;
}

}  // namespace rcc::baseline
