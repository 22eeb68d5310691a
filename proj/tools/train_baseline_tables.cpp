// Regenerates include/rcc/baseline_tables.hpp from toy-prior samples.
//
//   train_baseline_tables > include/rcc/baseline_tables.hpp

#include <array>
#include <cstdint>
#include <cstdio>
#include <vector>

#include "rcc/baseline_core.hpp"
#include "rcc/diffusion.hpp"

namespace {

void print_table(const char* name, const rcc::baseline::HuffmanTable& t) {
  std::printf("inline const HuffmanTable %s{\n    {", name);
  for (std::size_t i = 0; i < t.counts.size(); ++i) std::printf("%s%u", i ? ", " : "", t.counts[i]);
  std::printf("},\n    {");
  for (std::size_t i = 0; i < t.symbols.size(); ++i) {
    if (i) std::printf(i % 16 == 0 ? ",\n     " : ", ");
    std::printf("0x%02X", t.symbols[i]);
  }
  std::printf("}};\n");
}

}  // namespace

int main() {
  using namespace rcc::baseline;
  constexpr std::uint32_t kSide = 64;
  constexpr std::uint64_t kImages = 64;
  const std::array<double, 6> steps{0.005, 0.01, 0.02, 0.05, 0.1, 0.2};
  const auto prior = rcc::GaussianPrior::grid(kSide, kSide);

  std::array<std::uint64_t, 256> dc{};
  std::array<std::uint64_t, 256> ac{};
  // Every legal symbol gets a code, seen or not.
  for (std::uint32_t cat = 0; cat <= 15; ++cat) dc[cat] = 1;
  ac[kEob] = 1;
  ac[kZrl] = 1;
  for (std::uint32_t run = 0; run <= 15; ++run)
    for (std::uint32_t size = 1; size <= 15; ++size) ac[(run << 4) | size] = 1;

  for (std::uint64_t img = 0; img < kImages; ++img) {
    const auto x = prior.sample(0x7461626cULL + img);
    for (double step : steps)
      for (const auto& s : block_symbols(quantize_image(x, kSide, kSide, step))) ++(s.dc ? dc : ac)[s.symbol];
  }

  std::printf("// Generated by tools/train_baseline_tables.cpp. Do not edit.\n");
  std::printf("// %llu samples of the default 64x64 grid prior, quantizer steps", static_cast<unsigned long long>(kImages));
  for (double s : steps) std::printf(" %g", s);
  std::printf(".\n#pragma once\n\n#include \"rcc/baseline_core.hpp\"\n\nnamespace rcc::baseline {\n\n");
  print_table("kDcTable", build_huffman_table(dc));
  std::printf("\n");
  print_table("kAcTable", build_huffman_table(ac));
  std::printf("\n}  // namespace rcc::baseline\n");
  return 0;
}
