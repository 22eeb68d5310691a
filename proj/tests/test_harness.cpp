#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rcc/combinadics.hpp"
#include "rcc/harness.hpp"

namespace {

rcc::ExperimentSpec tiny() {
  rcc::ExperimentSpec s;
  for (auto p : {rcc::Protocol::ddcm, rcc::Protocol::turbo_lex, rcc::Protocol::turbo_robust, rcc::Protocol::baseline})
    s.methods.push_back(rcc::default_method(p));
  for (auto& m : s.methods)
    if (auto* c = std::get_if<rcc::ProtocolConfig>(&m.config)) {
      c->T = 8;
      c->K = 32;
      if (c->protocol != rcc::Protocol::ddcm) c->M = 3;
    }
  s.bers = {0.0, 1e-2};
  s.trials = 3;
  s.images = 2;
  s.height = s.width = 16;
  return s;
}

std::string csv(const rcc::ExperimentResult& r) {
  std::ostringstream os;
  rcc::write_summary_csv(os, r.summaries);
  return os.str();
}

TEST(MatchBudget, ExactHitAndInfeasible) {
  rcc::ProtocolConfig tmpl;
  tmpl.protocol = rcc::Protocol::turbo_robust;
  tmpl.K = 256;
  tmpl.C = 1;
  auto five = tmpl;
  five.M = 5;
  EXPECT_EQ(rcc::match_budget(rcc::payload_bits(five), tmpl).M, 5U);
  EXPECT_EQ(rcc::match_budget(rcc::payload_bits(five) + 1, tmpl).M, 5U);
  EXPECT_EQ(rcc::match_budget(rcc::payload_bits(five) - 1, tmpl).M, 4U);
  auto one = tmpl;
  one.M = 1;
  EXPECT_THROW(rcc::match_budget(rcc::payload_bits(one) - 1, tmpl), rcc::InfeasibleBudget);
  tmpl.protocol = rcc::Protocol::ddcm;
  EXPECT_THROW(rcc::match_budget(1000, tmpl), std::invalid_argument);
}

TEST(MatchBudget, LexAffordsAtLeastAsManyAtoms) {
  rcc::ProtocolConfig lex;
  lex.protocol = rcc::Protocol::turbo_lex;
  lex.K = 1024;
  lex.C = 1;
  auto robust = lex;
  robust.protocol = rcc::Protocol::turbo_robust;
  for (std::uint64_t budget = 400; budget <= 20000; budget += 950) {
    const auto l = rcc::match_budget(budget, lex);
    const auto r = rcc::match_budget(budget, robust);
    EXPECT_GE(l.M, r.M) << budget;
  }
  // Per step: ceil(log2 C(K, M)) <= M ceil(log2 K).
  for (std::uint32_t M = 1; M <= 64; ++M) EXPECT_LE(rcc::ceil_log2(rcc::binomial(1024, M)), M * 10U);
}

TEST(RunExperiment, NoiselessChannelReproducesCleanReconstruction) {
  auto spec = tiny();
  spec.bers = {0.0};
  const auto res = rcc::run_experiment(spec);
  for (const auto& s : res.summaries) EXPECT_EQ(s.corrupted_fraction, 0.0) << s.protocol;
  // Compare against a direct encode of image 0.
  const auto img = rcc::experiment_image(spec, 0);
  auto cfg = std::get<rcc::ProtocolConfig>(spec.methods[2].config);
  cfg.height = cfg.width = 16;
  const auto model = rcc::make_model(cfg, spec.prior);
  const double want = rcc::mse(rcc::encode(img, cfg, model).reconstruction, img);
  for (const auto& r : res.records) {
    if (r.protocol == "turbo_robust" && r.image_id == 0) {
      EXPECT_EQ(r.distortion->mse, want);
    }
  }
}

TEST(RunExperiment, ByteIdenticalCsvOnRerun) {
  const auto spec = tiny();
  EXPECT_EQ(csv(rcc::run_experiment(spec)), csv(rcc::run_experiment(spec)));
}

TEST(RunExperiment, ChangingOneImageLeavesOtherRowsAlone) {
  auto spec = tiny();
  spec.methods.resize(3);
  const auto a = rcc::run_experiment(spec);
  spec.images = 3;
  const auto b = rcc::run_experiment(spec);
  // Trials of image 0 and 1 are identical in both runs.
  std::size_t matched = 0;
  for (const auto& ra : a.records)
    for (const auto& rb : b.records)
      if (ra.protocol == rb.protocol && ra.image_id == rb.image_id && ra.ber == rb.ber && ra.trial == rb.trial) {
        EXPECT_EQ(ra.corrupted(), rb.corrupted());
        if (!ra.corrupted()) {
          EXPECT_EQ(ra.distortion->mse, rb.distortion->mse);
        }
        ++matched;
      }
  EXPECT_EQ(matched, a.records.size());
}

TEST(RunExperiment, RecordsCoverEveryCell) {
  const auto spec = tiny();
  const auto res = rcc::run_experiment(spec);
  EXPECT_EQ(res.records.size(), spec.methods.size() * spec.images * spec.bers.size() * spec.trials);
  EXPECT_EQ(res.summaries.size(), spec.methods.size() * spec.bers.size());
}

TEST(RunExperiment, HeaderCorruptionIsCountedNotFatal) {
  auto spec = tiny();
  spec.bers = {0.2};
  spec.include_header = true;
  const auto res = rcc::run_experiment(spec);
  for (const auto& s : res.summaries) EXPECT_GT(s.corrupted_fraction, 0.0) << s.protocol;
}

TEST(RunExperiment, MatchedBudgetTunesEveryMethod) {
  auto spec = tiny();
  spec.methods.erase(spec.methods.begin());  // DDCM has no rate knob
  spec.bers = {0.0};
  spec.trials = 1;
  spec.budget_bits = 400;
  const auto res = rcc::run_experiment(spec);
  for (const auto& r : res.records) EXPECT_LE(r.payload_bits, 400U) << r.protocol;
}

TEST(MatchBudget, LexPicksLargestFeasibleMEvenPastHalfK) {
  rcc::ProtocolConfig lex;
  lex.protocol = rcc::Protocol::turbo_lex;
  lex.T = 8;
  lex.K = 32;
  lex.C = 0;
  for (std::uint64_t budget : {7U, 40U, 100U, 150U, 200U, 209U}) {
    std::uint32_t want = 0;
    for (std::uint32_t M = 1; M <= lex.K; ++M) {
      auto c = lex;
      c.M = M;
      if (rcc::payload_bits(c) <= budget) want = M;
    }
    EXPECT_EQ(rcc::match_budget(budget, lex).M, want) << budget;
  }
  lex.C = 1;
  EXPECT_THROW(rcc::match_budget(6, lex), rcc::InfeasibleBudget);
}

TEST(Spec, ValidationErrors) {
  auto s = tiny();
  s.bers = {0.1, 0.0};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = tiny();
  s.trials = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = tiny();
  s.methods.push_back(s.methods[0]);
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = tiny();
  s.bers = {2.0};
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Spec, ParsesFlatKeyValueText) {
  std::istringstream in(R"(# sweep
protocols = turbo_lex, baseline
turbo_lex.K = 64
turbo_lex.M = 4    # trailing comment
baseline.quality = 0.1
bers = 0, 1e-3
trials = 7
size = 32
image_seed = 5
include_header = true
budget_bits = 900
prior.length_scale = 3.5
out = a.csv
)");
  const auto s = rcc::parse_spec(in);
  ASSERT_EQ(s.methods.size(), 2U);
  const auto& lex = std::get<rcc::ProtocolConfig>(s.methods[0].config);
  EXPECT_EQ(lex.K, 64U);
  EXPECT_EQ(lex.M, 4U);
  EXPECT_EQ(std::get<rcc::BaselineConfig>(s.methods[1].config).quality, 0.1);
  EXPECT_EQ(s.bers, (std::vector<double>{0.0, 1e-3}));
  EXPECT_EQ(s.trials, 7U);
  EXPECT_EQ(s.height, 32U);
  EXPECT_EQ(s.width, 32U);
  EXPECT_EQ(s.image_seed, 5U);
  EXPECT_TRUE(s.include_header);
  EXPECT_EQ(*s.budget_bits, 900U);
  EXPECT_EQ(s.prior.length_scale, 3.5);
  EXPECT_EQ(s.out, "a.csv");
}

TEST(Spec, RejectsUnknownKeysAndBadValues) {
  std::istringstream unknown("colour = blue\n");
  EXPECT_THROW(rcc::parse_spec(unknown), std::invalid_argument);
  std::istringstream bad("trials = many\n");
  EXPECT_THROW(rcc::parse_spec(bad), std::invalid_argument);
  std::istringstream missing("protocols = ddcm\nturbo_lex.M = 3\n");
  EXPECT_THROW(rcc::parse_spec(missing), std::invalid_argument);
  std::istringstream noeq("trials 3\n");
  EXPECT_THROW(rcc::parse_spec(noeq), std::invalid_argument);
}

TEST(Csv, FixedColumnsAndEmptyCellsForAbsentStats) {
  rcc::Summary s;
  s.protocol = "baseline";
  s.ber = 0.1;
  s.n_trials = 10;
  s.n_corrupted = 10;
  s.corrupted_fraction = 1.0;
  s.mean_bpp = 0.5;
  std::ostringstream os;
  rcc::write_summary_csv(os, {s});
  EXPECT_EQ(os.str(),
            "protocol,ber,n_trials,n_corrupted,corrupted_fraction,mean_psnr,std_psnr,mean_mse,std_mse,mean_bpp\n"
            "baseline,0.1,10,10,1,,,,,0.5\n");
  EXPECT_EQ(rcc::format_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(RawLog, OneJsonObjectPerTrial) {
  const std::vector<rcc::TrialRecord> recs{{"ddcm", 1, 0.0, 2, rcc::Distortion{0.0, rcc::psnr_from_mse(0.0)}, 8, 4},
                                           {"ddcm", 1, 0.5, 3, std::nullopt, 8, 4}};
  std::ostringstream os;
  rcc::write_raw_log(os, recs);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["psnr"], "inf");
  EXPECT_EQ(j["corrupted"], false);
  std::getline(in, line);
  j = nlohmann::json::parse(line);
  EXPECT_EQ(j["corrupted"], true);
  EXPECT_FALSE(j.contains("mse"));
}

}  // namespace
