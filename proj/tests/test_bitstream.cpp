#include <gtest/gtest.h>

#include "rcc/bitstream.hpp"

namespace {

TEST(BitWriter, PacksMsbFirst) {
  rcc::BitWriter w;
  w.write(0b101, 3);
  w.write(0b11111, 5);
  w.write_bit(true);
  const auto bits = std::move(w).take();
  ASSERT_EQ(bits.size(), 9U);
  ASSERT_EQ(bits.bytes().size(), 2U);
  EXPECT_EQ(bits.bytes()[0], 0b10111111);
  EXPECT_EQ(bits.bytes()[1], 0b10000000);
}

TEST(BitReader, RoundTripsMixedWidths) {
  rcc::BitWriter w;
  w.write(0, 0);
  w.write(0xDEADBEEFCAFEBABEULL, 64);
  w.write(5, 7);
  const auto bits = std::move(w).take();
  rcc::BitReader r(bits);
  EXPECT_EQ(r.read(0), 0U);
  EXPECT_EQ(r.read(64), 0xDEADBEEFCAFEBABEULL);
  EXPECT_EQ(r.read(7), 5U);
  EXPECT_EQ(r.remaining(), 0U);
  EXPECT_THROW(r.read_bit(), rcc::BitstreamOverrun);
}

TEST(BitStream, FlipAndCompare) {
  rcc::BitWriter w;
  w.write(0, 10);
  auto a = std::move(w).take();
  auto b = a;
  b.flip(9);
  EXPECT_FALSE(a == b);
  EXPECT_TRUE(b.get(9));
  b.flip(9);
  EXPECT_TRUE(a == b);
  EXPECT_THROW(b.flip(10), std::out_of_range);
}

TEST(BitWriter, RejectsValueWiderThanField) {
  rcc::BitWriter w;
  EXPECT_THROW(w.write(8, 3), std::invalid_argument);
  EXPECT_THROW(w.write(0, 65), std::invalid_argument);
}

}  // namespace
