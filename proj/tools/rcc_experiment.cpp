// BER sweep from the command line. Writes the aggregate CSV to --out (or
// stdout) and, with --emit-raw, one JSON line per trial.
//
//   rcc_experiment --protocol turbo_robust --protocol turbo_lex --ber 0 --ber 1e-3 --images 4 --out sweep.csv

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rcc/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bit-error robustness sweep for diffusion reverse-channel codecs"};
  std::string spec_path;
  std::vector<std::string> protocols;
  std::vector<double> bers;
  std::optional<std::uint32_t> trials, images, size;
  std::optional<std::uint64_t> seed, budget;
  std::string out, raw;
  bool header_corruption = false;
  bool emit_raw = false;

  app.add_option("--spec", spec_path, "key = value spec file")->check(CLI::ExistingFile);
  app.add_option("--protocol", protocols, "ddcm, turbo_lex, turbo_robust or baseline (repeatable)");
  app.add_option("--ber", bers, "bit error rate (repeatable)");
  app.add_option("--trials", trials, "corruptions per (image, BER)");
  app.add_option("--images", images, "number of toy images");
  app.add_option("--size", size, "image side length");
  app.add_option("--seed", seed, "base seed for images and channel");
  app.add_option("--budget-bits", budget, "match every method to this payload size");
  app.add_option("--out", out, "aggregate CSV path (default stdout)");
  app.add_flag("--include-header-corruption", header_corruption, "let the channel flip header bits too");
  app.add_flag("--emit-raw", emit_raw, "also write per-trial JSON lines");
  app.add_option("--raw-out", raw, "per-trial log path (default <out>.jsonl)");
  CLI11_PARSE(app, argc, argv);

  try {
    rcc::ExperimentSpec spec;
    for (auto p : {rcc::Protocol::ddcm, rcc::Protocol::turbo_lex, rcc::Protocol::turbo_robust, rcc::Protocol::baseline})
      spec.methods.push_back(rcc::default_method(p));
    if (!spec_path.empty()) spec = rcc::load_spec(spec_path, std::move(spec));

    if (!protocols.empty()) {
      // Keep settings from the spec file for protocols named again here.
      std::vector<rcc::Method> chosen;
      for (const auto& name : protocols) {
        const auto p = rcc::parse_protocol(name);
        rcc::Method m = rcc::default_method(p);
        for (const auto& existing : spec.methods)
          if (existing.label == m.label) m = existing;
        chosen.push_back(std::move(m));
      }
      spec.methods = std::move(chosen);
    }
    if (!bers.empty()) spec.bers = bers;
    if (trials) spec.trials = *trials;
    if (images) spec.images = *images;
    if (size) spec.height = spec.width = *size;
    if (seed) {
      spec.image_seed = rcc::hash_words(*seed, 1);
      spec.channel_seed = rcc::hash_words(*seed, 2);
    }
    if (budget) spec.budget_bits = *budget;
    if (header_corruption) spec.include_header = true;
    if (!out.empty()) spec.out = out;
    if (!raw.empty()) spec.raw_out = raw;
    if (emit_raw && spec.raw_out.empty()) spec.raw_out = spec.out.empty() ? "trials.jsonl" : spec.out + ".jsonl";

    const auto result = rcc::run_experiment(spec);

    if (spec.out.empty()) {
      rcc::write_summary_csv(std::cout, result.summaries);
    } else {
      std::ofstream os(spec.out);
      if (!os) throw std::runtime_error("cannot write " + spec.out);
      rcc::write_summary_csv(os, result.summaries);
    }
    if (!spec.raw_out.empty()) {
      std::ofstream os(spec.raw_out);
      if (!os) throw std::runtime_error("cannot write " + spec.raw_out);
      rcc::write_raw_log(os, result.records);
    }
  } catch (const std::exception& e) {
    std::cerr << "rcc_experiment: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
