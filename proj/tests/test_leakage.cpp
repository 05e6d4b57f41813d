#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ecr/leakage.hpp"

using namespace ecr;

namespace {

constexpr double kPi = std::numbers::pi;

PairParams pair(double delta_mhz, double j_mhz) {
  PairParams p;
  p.target.frequency_ghz = 4.4;
  p.control.frequency_ghz = 4.4 + delta_mhz * 1e-3;
  p.j_mhz = j_mhz;
  return p;
}

CROptions options() {
  CROptions o;
  o.amplitude_ceiling = 0.1;
  return o;
}

// Mixes control levels a and b (every target level) by angle theta, then gives control
// level 2 a fixed phase so peaks do not sit on the grid origin.
Operator mixing(int a, int b, double theta, double level2_phase = 0.9) {
  Operator u = Operator::Identity();
  for (int t = 0; t < 3; ++t) {
    const int i = 3 * a + t, j = 3 * b + t;
    u(i, i) = u(j, j) = std::cos(0.5 * theta);
    u(i, j) = u(j, i) = cplx(0, -std::sin(0.5 * theta));
  }
  Operator d = Operator::Identity();
  for (int t = 0; t < 3; ++t) d(6 + t, 6 + t) = std::polar(1.0, level2_phase);
  return d * u;
}

double theta_for_rate(double p) { return 2 * std::asin(std::sqrt(p)); }

LeakageReport classify(const Operator& pulse, int n = 12) {
  const auto phis = phase_grid(48);
  return classify_leakage(run_amplification(pulse, n, phis, 0), run_amplification(pulse, n, phis, 1));
}

struct CalibratedPair {
  PairSimulator sim{pair(130, 2.7)};
  CRPulseConfig cfg = calibrate_cr(sim, options());
};

// 52 MHz from the 1-2 collision, calibrated once.
const CalibratedPair& l12_pair() {
  static const CalibratedPair p;
  return p;
}

// Near the two-photon collision, where the stretch is used.
const CalibratedPair& l02_pair() {
  static const CalibratedPair p{PairSimulator{pair(100, 2.7)}};
  return p;
}

}  // namespace

TEST(Leakage, TypeNamesRoundTrip) {
  for (LeakageType t : {LeakageType::l01, LeakageType::l12, LeakageType::l02_2}) {
    EXPECT_EQ(leakage_type_from_string(to_string(t)), t);
  }
  EXPECT_THROW(leakage_type_from_string("L03"), InvalidArgument);
}

TEST(Leakage, ZeroAmplitudeGivesFlatScansAndEmptyReport) {
  PairSimulator sim(pair(100, 2.7));
  CRPulseConfig cfg;
  cfg.cr_flat = 100;
  const LeakageScan s = run_amplification(sim, cfg, 12, phase_grid(48), 0);
  for (double v : s.p2) EXPECT_LT(v, 1e-8);
  EXPECT_TRUE(characterize_leakage(sim, cfg).empty());
}

TEST(Leakage, NearTwelveCollisionPeaksOnlyFromControlOne) {
  // Control 1-2 transition 5 MHz below the target frequency.
  PairSimulator sim(pair(177, 2.7));
  CRPulseConfig cfg;
  cfg.cr_amplitude = 0.003;
  cfg.cr_flat = 100;
  const auto phis = phase_grid(48);
  const LeakageScan s1 = run_amplification(sim, cfg, 4, phis, 1);
  const LeakageScan s0 = run_amplification(sim, cfg, 4, phis, 0);
  EXPECT_FALSE(find_peaks(s1.phis, s1.p2).empty());
  EXPECT_TRUE(find_peaks(s0.phis, s0.p2).empty());
  EXPECT_EQ(classify_leakage(s0, s1).detected, std::set<LeakageType>{LeakageType::l12});
}

TEST(Leakage, PeakGrowsQuadraticallyWithRepetitions) {
  const Operator pulse = mixing(1, 2, theta_for_rate(1e-4));
  const auto phis = phase_grid(96);
  const auto peak = [&](int n) {
    const auto p2 = run_amplification(pulse, n, phis, 1).p2;
    return *std::ranges::max_element(p2);
  };
  const double p6 = peak(6), p12 = peak(12);
  EXPECT_NEAR(p12 / p6, 4.0, 0.3 * 4.0);
}

TEST(Leakage, TruthTable) {
  const double th = theta_for_rate(1e-3);
  using S = std::set<LeakageType>;
  EXPECT_EQ(classify(mixing(0, 1, th)).detected, S{LeakageType::l01});
  EXPECT_EQ(classify(mixing(1, 2, th)).detected, S{LeakageType::l12});
  EXPECT_EQ(classify(mixing(0, 2, th)).detected, S{LeakageType::l02_2});
  EXPECT_EQ(classify(mixing(1, 2, th) * mixing(0, 2, th, 0.0)).detected,
            (S{LeakageType::l12, LeakageType::l02_2}));
  EXPECT_TRUE(classify(Operator::Identity()).empty());
}

TEST(Leakage, TwoPhotonPeaksArePiSeparated) {
  const LeakageReport r = classify(mixing(0, 2, theta_for_rate(1e-3)));
  const auto& phis = r.peak_phis.at(LeakageType::l02_2);
  ASSERT_EQ(phis.size(), 2u);
  EXPECT_NEAR(std::abs(std::remainder(phis[0] - phis[1], 2 * kPi)), kPi, 1e-9);
}

TEST(Leakage, TwoPhotonScanIsPiPeriodic) {
  const auto phis = phase_grid(48);
  const LeakageScan s = run_amplification(mixing(0, 2, theta_for_rate(1e-3)), 12, phis, 0);
  for (size_t i = 0; i < 24; ++i) EXPECT_NEAR(s.p2[i], s.p2[i + 24], 1e-12);
}

TEST(Leakage, OneSidedFlipIsUnclassified) {
  // Only |0,0> and |1,1> mix, so the flip appears from control |0> alone.
  Operator u = Operator::Identity();
  const double th = theta_for_rate(1e-3);
  u(0, 0) = u(4, 4) = std::cos(0.5 * th);
  u(0, 4) = u(4, 0) = cplx(0, -std::sin(0.5 * th));
  EXPECT_THROW(classify(u), UnclassifiedPattern);
  try {
    classify(u);
  } catch (const UnclassifiedPattern& e) {
    EXPECT_EQ(e.scan0.p2.size(), 48u);
  }
}

TEST(Leakage, ForwardInjectionIsRecovered) {
  const double p = 1e-3;
  const Operator pulse = mixing(0, 2, theta_for_rate(p));
  const LeakageScan s = run_amplification(pulse, 10, phase_grid(96), 0);
  const double peak = *std::ranges::max_element(s.p2);
  EXPECT_NEAR(peak, std::pow(std::sin(10 * std::asin(std::sqrt(p))), 2), 0.01);
  EXPECT_NEAR(estimate_leakage_rate(s), p, 0.2 * p);
  EXPECT_NEAR(measure_leakage_rate(pulse, LeakageType::l02_2), p, 1e-3 * p);
  EXPECT_NEAR(measure_leakage_rate(mixing(0, 1, theta_for_rate(p)), LeakageType::l01), p, 1e-3 * p);
}

TEST(Leakage, RateFromPeakEdgeCases) {
  EXPECT_EQ(rate_from_peak(0.0, 10), 0.0);
  EXPECT_NEAR(rate_from_peak(0.01, 10), 0.01 / 100, 1e-6);
  EXPECT_THROW(rate_from_peak(0.95, 10), RateSaturation);
  EXPECT_THROW(fit_leakage_rate(mixing(1, 2, kPi), LeakageType::l12, 0.0, {1}), RateSaturation);
}

TEST(Leakage, ScanArgumentsAreValidated) {
  const auto phis = phase_grid(8);
  const Operator id = Operator::Identity();
  EXPECT_THROW(run_amplification(id, 0, phis, 0), InvalidArgument);
  EXPECT_THROW(run_amplification(id, 4, phis, 2), InvalidArgument);
  const LeakageScan a = run_amplification(id, 4, phis, 0);
  EXPECT_THROW(classify_leakage(a, a), InvalidArgument);
}

TEST(Leakage, NothingDetectedLeavesConfigUnchanged) {
  PairSimulator sim(pair(60, 1.5));
  CRPulseConfig cfg;
  cfg.cr_amplitude = 0.05;
  cfg.cr_flat = 80;
  cfg.drag_alpha = 0.3;
  const SuppressionResult r = suppress_leakage(sim, cfg, LeakageReport{});
  EXPECT_EQ(r.cfg.cr_amplitude, cfg.cr_amplitude);
  EXPECT_EQ(r.cfg.cr_flat, cfg.cr_flat);
  EXPECT_EQ(r.cfg.drag_alpha, cfg.drag_alpha);
  EXPECT_FALSE(r.stretched);
}

TEST(Leakage, TwelveCollisionIsSuppressedByDrag) {
  const auto& p = l12_pair();
  const LeakageReport before = characterize_leakage(p.sim, p.cfg);
  ASSERT_EQ(before.detected, std::set<LeakageType>{LeakageType::l12});
  EXPECT_GT(before.rate.at(LeakageType::l12), 1e-3);
  const SuppressionResult r = suppress_leakage(p.sim, p.cfg, before, options());
  EXPECT_LE(r.residual, 2e-4);
  EXPECT_NE(r.cfg.drag_alpha, 0.0);
  EXPECT_NEAR(check_cr(p.sim, r.cfg).conditional_angle, 0.25 * kPi, 1e-3);
}

TEST(Leakage, DragSweepIsUnimodalNearOptimum) {
  const auto& p = l12_pair();
  std::vector<double> rates;
  for (double a = -4.5; a <= -1.0 + 1e-9; a += 0.25) {
    CRPulseConfig c = p.cfg;
    c.drag_alpha = a;
    rates.push_back(measure_leakage_rate(p.sim.unitary(cr_pulse(c, +1)), LeakageType::l12));
  }
  const auto it = std::ranges::min_element(rates);
  ASSERT_NE(it, rates.begin());
  ASSERT_NE(it, rates.end() - 1);
  for (auto k = rates.begin(); k != it; ++k) EXPECT_GT(*k, *(k + 1));
  for (auto k = it; k + 1 != rates.end(); ++k) EXPECT_LT(*k, *(k + 1));
}

TEST(Leakage, StretchPreservesConditionalAngle) {
  const auto& p = l02_pair();
  CRPulseConfig c = p.cfg;
  c.cr_flat = 0.25 * std::round(p.cfg.cr_flat * 1.15 / 0.25);
  c.cr_amplitude = area_preserving_amplitude(p.cfg, c.cr_flat);
  EXPECT_LT(c.cr_amplitude, p.cfg.cr_amplitude);
  EXPECT_NEAR(check_cr(p.sim, c).conditional_angle, 0.25 * kPi, 0.005 * 0.25 * kPi);
}

TEST(Leakage, TransitionFrequencies) {
  const PairModel m(pair(100, 2.7));
  const double f01 = leakage_transition_ghz(m, LeakageType::l01);
  const double f12 = leakage_transition_ghz(m, LeakageType::l12);
  EXPECT_NEAR(f12 - f01, -0.182, 2e-3);
  EXPECT_NEAR(leakage_transition_ghz(m, LeakageType::l02_2), 0.5 * (f01 + f12), 1e-12);
}

TEST(Leakage, MixedTwoPhotonCaseIsStretchedThenSuppressed) {
  PairSimulator sim(pair(102, 2.7));
  const CRPulseConfig cfg = calibrate_cr(sim, options());
  const LeakageReport before = characterize_leakage(sim, cfg);
  ASSERT_EQ(before.detected, (std::set<LeakageType>{LeakageType::l12, LeakageType::l02_2}));
  const SuppressionResult r = suppress_leakage(sim, cfg, before, options());
  EXPECT_TRUE(r.stretched);
  EXPECT_GE(r.cfg.cr_flat, 1.1 * cfg.cr_flat - 0.25);
  EXPECT_LE(r.cfg.cr_flat, 1.2 * cfg.cr_flat + 0.25);
  EXPECT_LT(r.residual, 1e-3);
}

TEST(Leakage, LoneTwoPhotonCaseIsSuppressed) {
  PairSimulator sim(pair(105, 2.7));
  const CRPulseConfig cfg = calibrate_cr(sim, options());
  const LeakageReport before = characterize_leakage(sim, cfg);
  ASSERT_EQ(before.detected, std::set<LeakageType>{LeakageType::l02_2});
  const SuppressionResult r = suppress_leakage(sim, cfg, before, options());
  EXPECT_LE(r.residual, 2e-4);
  EXPECT_NEAR(check_cr(sim, r.cfg).conditional_angle, 0.25 * kPi, 1e-3);
}
