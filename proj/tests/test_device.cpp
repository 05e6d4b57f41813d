#include <gtest/gtest.h>

#include <cmath>

#include "ecr/io.hpp"

using namespace ecr;

namespace {

PairConfig make_pair(const std::string& label, double target_ghz, double delta_mhz, double j_mhz = 2.7) {
  PairConfig p;
  p.params.label = label;
  p.params.target.frequency_ghz = target_ghz;
  p.params.control.frequency_ghz = target_ghz + delta_mhz * 1e-3;
  p.params.j_mhz = j_mhz;
  p.amplitude_ceiling = 0.1;
  return p;
}

DeviceConfig small_config(std::vector<PairConfig> pairs) {
  DeviceConfig c;
  c.pairs = std::move(pairs);
  c.seed = 7;
  c.has_seed = true;
  c.exact = true;
  c.rb_seeds = 2;
  c.rb_lengths = {1, 2, 4};
  c.threads = 2;
  return c;
}

Json strip_created(Json j) {
  j.erase("created");
  return j;
}

}  // namespace

TEST(DeviceConfig, RejectsEmptyPairs) {
  DeviceConfig c = small_config({});
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(DeviceConfig, RequiresSeed) {
  DeviceConfig c = small_config({make_pair("a", 4.4, 68)});
  c.has_seed = false;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(DeviceConfig, RejectsDuplicateLabels) {
  DeviceConfig c = small_config({make_pair("a", 4.4, 68), make_pair("a", 4.6, 70)});
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(DeviceConfig, RejectsBadStep) {
  DeviceConfig c = small_config({make_pair("a", 4.4, 68)});
  c.dt = 0.3;
  EXPECT_THROW(c.validate(), ConfigError);
  c.dt = 0.125;
  EXPECT_NO_THROW(c.validate());
}

TEST(DefaultDevice, ChainShape) {
  const DeviceConfig c = default_device();
  ASSERT_EQ(c.pairs.size(), 15u);
  EXPECT_NO_THROW(c.validate());
  for (std::size_t k = 0; k < c.pairs.size(); ++k) {
    const auto& p = c.pairs[k].params;
    EXPECT_GT(p.control.frequency_ghz, p.target.frequency_ghz);
    for (const auto* q : {&p.control, &p.target}) {
      EXPECT_GT(q->frequency_ghz, 4.2);
      EXPECT_LT(q->frequency_ghz, 4.6);
      EXPECT_LE(q->t2e_us, 2 * q->t1_us + 1e-12);
    }
    if (k + 1 < c.pairs.size()) {
      // Adjacent pairs share a qubit, with the same coherence.
      const auto& n = c.pairs[k + 1].params;
      const TransmonParams& shared = k % 2 == 0 ? p.control : p.target;
      const TransmonParams& again = k % 2 == 0 ? n.control : n.target;
      EXPECT_DOUBLE_EQ(shared.frequency_ghz, again.frequency_ghz);
      EXPECT_DOUBLE_EQ(shared.t1_us, again.t1_us);
    }
  }
}

TEST(DefaultDevice, SeedControlsCoherence) {
  const DeviceConfig a = default_device(1), b = default_device(1), c = default_device(2);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_NE(a.pairs[0].params.control.t1_us, c.pairs[0].params.control.t1_us);
}

TEST(Calibration, DeterministicModuloTimestamp) {
  const DeviceConfig c = small_config({make_pair("a", 4.4, 68), make_pair("b", 4.6, 75)});
  const DeviceState s1 = calibrate_device(c), s2 = calibrate_device(c);
  EXPECT_EQ(strip_created(to_json(s1)).dump(), strip_created(to_json(s2)).dump());
  for (const auto& p : s1.pairs) EXPECT_TRUE(p.ok) << p.error;
}

TEST(Pipeline, FailureIsIsolated) {
  // Delta = 90 MHz puts the control 1-2 transition on top of the target: the collision
  // cannot be suppressed within the amplitude ceiling.
  const PairConfig good = make_pair("good", 4.6, 68), bad = make_pair("bad", 4.4, 90);
  const DeviceConfig both = small_config({bad, good}), solo = small_config({good});

  PipelineOptions o;
  o.suppress = true;
  o.scan_points = 24;
  o.scan_reps = 6;
  const ResultsDocument r_both = run_pipeline(both, calibrate_device(both), o);
  const ResultsDocument r_solo = run_pipeline(solo, calibrate_device(solo), o);

  ASSERT_EQ(r_both.after.size(), 2u);
  EXPECT_FALSE(r_both.after[0].ok);
  EXPECT_EQ(r_both.after[0].failed_stage, "suppression");
  EXPECT_FALSE(r_both.after[0].error.empty());
  EXPECT_FALSE(r_both.all_ok());
  EXPECT_TRUE(r_solo.all_ok());

  const Json jb = to_json(r_both), js = to_json(r_solo);
  EXPECT_EQ(jb["before"][1].dump(), js["before"][0].dump());
  EXPECT_EQ(jb["after"][1].dump(), js["after"][0].dump());

  const BeforeAfter s = summarize(r_both);
  ASSERT_EQ(s.labels.size(), 1u);
  EXPECT_EQ(s.labels[0], "good");
}

TEST(Pipeline, MissingCalibrationFailsOnlyThatPair) {
  const DeviceConfig c = small_config({make_pair("a", 4.4, 68)});
  PairCalibration none;
  none.label = "a";
  const PairResult r = run_pair(c, c.pairs[0], none, "x", false);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.failed_stage, "calibration");
}

TEST(Pipeline, IdealPairIsNearPerfect) {
  PairConfig p = make_pair("ideal", 4.4, 68);
  for (auto* t : {&p.params.control, &p.params.target}) t->t1_us = t->t2e_us = 1e9;
  DeviceConfig c = small_config({p});
  c.readout.assignment_error = 0;
  c.rb_seeds = 120;
  c.rb_lengths = {1, 2, 4, 8, 16, 32, 64, 128, 256};
  c.threads = 1;
  const DeviceState s = calibrate_device(c);
  ASSERT_TRUE(s.pairs[0].ok) << s.pairs[0].error;

  const PairResult r = run_pair(c, p, s.pairs[0], s.snapshot, true);
  ASSERT_TRUE(r.ok) << r.failed_stage << ": " << r.error;
  EXPECT_LT(r.budget.components.at(Component::incoherent), 1e-6);
  EXPECT_LT(r.budget.known(), 1e-3);
  EXPECT_LT(r.irb.epg, 2e-3);
}
