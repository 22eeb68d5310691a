// Bit-addressable buffers with MSB-first packing.
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rcc {

/// Ordered bit sequence. Bit i lives in byte i / 8 at position 7 - i % 8, so
/// the serialized bytes read left to right in transmission order. Padding bits
/// of the final byte are zero and not counted in size().
class BitStream {
 public:
  BitStream() = default;
  BitStream(std::vector<std::uint8_t> bytes, std::size_t bit_count) : bytes_(std::move(bytes)), size_(bit_count) {
    if (bytes_.size() != (bit_count + 7) / 8) throw std::invalid_argument("bitstream: byte count does not match bit count");
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

  bool get(std::size_t i) const {
    if (i >= size_) throw std::out_of_range("bitstream: read past end");
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1U;
  }

  void set(std::size_t i, bool bit) {
    if (i >= size_) throw std::out_of_range("bitstream: write past end");
    const auto mask = static_cast<std::uint8_t>(1U << (7 - (i & 7)));
    if (bit)
      bytes_[i >> 3] |= mask;
    else
      bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
  }

  void flip(std::size_t i) {
    if (i >= size_) throw std::out_of_range("bitstream: flip past end");
    bytes_[i >> 3] ^= static_cast<std::uint8_t>(1U << (7 - (i & 7)));
  }

  void push_back(bool bit) {
    if ((size_ & 7) == 0) bytes_.push_back(0);
    ++size_;
    set(size_ - 1, bit);
  }

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

class BitWriter {
 public:
  /// Appends the low `width` bits of `value`, most significant first.
  void write(std::uint64_t value, unsigned width) {
    if (width > 64) throw std::invalid_argument("bitwriter: width > 64");
    if (width < 64 && value >> width) throw std::invalid_argument("bitwriter: value wider than field");
    for (unsigned i = width; i-- > 0;) bits_.push_back((value >> i) & 1U);
  }

  void write_bit(bool bit) { bits_.push_back(bit); }

  std::size_t size() const noexcept { return bits_.size(); }
  const BitStream& stream() const noexcept { return bits_; }
  BitStream take() && { return std::move(bits_); }

 private:
  BitStream bits_;
};

/// Thrown when a reader runs past the end of its stream.
class BitstreamOverrun : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class BitReader {
 public:
  explicit BitReader(const BitStream& bits) : bits_(&bits) {}

  std::uint64_t read(unsigned width) {
    if (width > 64) throw std::invalid_argument("bitreader: width > 64");
    if (width > remaining()) throw BitstreamOverrun("bitreader: read past end of stream");
    std::uint64_t v = 0;
    for (unsigned i = 0; i < width; ++i) v = (v << 1) | static_cast<std::uint64_t>(bits_->get(pos_++));
    return v;
  }

  bool read_bit() { return read(1) != 0; }

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bits_->size() - pos_; }

 private:
  const BitStream* bits_;
  std::size_t pos_ = 0;
};

}  // namespace rcc
