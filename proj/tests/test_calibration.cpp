#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ecr/calibration.hpp"

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

// Well-detuned pair with small ZZ, calibrated once for the whole suite.
struct Calibrated {
  PairSimulator sim{pair(60, 1.5)};
  SingleQubitGates sq = calibrate_single_qubit_gates(sim);
  CRPulseConfig cr = calibrate_cr(sim);
};

const Calibrated& calibrated() {
  static const Calibrated c;
  return c;
}

Matrix4c qubit_part(const Operator& u) { return qubit_block(u); }

}  // namespace

TEST(Calibration, SxMeetsFidelityAndComposesToX) {
  const auto& c = calibrated();
  for (Qubit q : {Qubit::control, Qubit::target}) {
    EXPECT_GE(sx_fidelity(c.sim, c.sq[q], q), 0.9995);
    const Operator u = c.sim.unitary(x_schedule(c.sq[q], q));
    const int excited = q == Qubit::control ? 3 : 1;
    EXPECT_GE(std::norm(u(excited, 0)), 0.999);
  }
}

TEST(Calibration, ZxQuarterMeetsTolerances) {
  const auto& c = calibrated();
  const CalibrationReport r = check_cr(c.sim, c.cr);
  EXPECT_NEAR(r.conditional_angle, 0.25 * kPi, 0.002 * 0.25 * kPi);
  EXPECT_LT(std::abs(r.zy_over_zx), 0.01);
  EXPECT_LT(std::abs(r.ix_over_zx), 0.01);
  EXPECT_LT(std::abs(r.iy_over_zx), 0.01);
  EXPECT_LE(c.cr.cr_amplitude, CROptions{}.amplitude_ceiling);
  EXPECT_DOUBLE_EQ(std::fmod(c.cr.cr_flat, 0.25), 0.0);
}

TEST(Calibration, FlatTopAngleIsLinearInLength) {
  const auto& c = calibrated();
  CRPulseConfig cfg = c.cr;
  cfg.cr_amplitude *= 0.3;
  auto angle = [&](double flat) {
    cfg.cr_flat = flat;
    return conditional_magnitude(gate_tomography(c.sim, cr_pulse(cfg, +1)));
  };
  const double a0 = angle(0), a1 = angle(60), a2 = angle(120);
  EXPECT_NEAR((a2 - a0) / (a1 - a0), 2.0, 0.04);
}

TEST(Calibration, ZeroAmplitudeGivesNoConditionalRotation) {
  const auto& c = calibrated();
  CRPulseConfig cfg = c.cr;
  cfg.cr_amplitude = 0;
  cfg.cancel_amplitude = 0;
  EXPECT_LT(conditional_magnitude(gate_tomography(c.sim, cr_pulse(cfg, +1))), 1e-9);
}

TEST(Calibration, InjectedPhaseOffsetIsRezeroed) {
  const auto& c = calibrated();
  CRPulseConfig cfg = c.cr;
  cfg.cr_phase += 0.2;
  const EffectiveHamiltonian h = gate_tomography(c.sim, cr_pulse(cfg, +1)).rates();
  EXPECT_NEAR(h.omega_zy / h.omega_zx, std::tan(0.2), 0.01);
  const CRPulseConfig fixed = retune_zx(c.sim, cfg);
  EXPECT_LT(std::abs(check_cr(c.sim, fixed).zy_over_zx), 0.01);
  EXPECT_NEAR(wrap_phase(fixed.cr_phase - c.cr.cr_phase), 0.0, 1e-3);
}

TEST(Calibration, CancellationVanishesWithoutCoupling) {
  const PairSimulator sim(pair(60, 0.0));
  CRPulseConfig cfg;
  cfg.cr_amplitude = 0.08;
  cfg.cr_flat = 100;
  const CRPulseConfig out = calibrate_cancellation(sim, cfg);
  EXPECT_LT(out.cancel_amplitude, 1e-7);
}

TEST(Calibration, InjectedUnconditionalRotationIsNulled) {
  const auto& c = calibrated();
  CRPulseConfig cfg = c.cr;
  const double zx_before = gate_tomography(c.sim, cr_pulse(cfg, +1)).rates().omega_zx;
  cfg.cancel_amplitude += 0.004;
  EXPECT_GT(std::abs(check_cr(c.sim, cfg).ix_over_zx), 0.1);
  const CRPulseConfig out = calibrate_cancellation(c.sim, cfg);
  const CalibrationReport r = check_cr(c.sim, out);
  EXPECT_LT(std::abs(r.ix_over_zx), 0.01);
  EXPECT_LT(std::abs(r.iy_over_zx), 0.01);
  const double zx_after = gate_tomography(c.sim, cr_pulse(out, +1)).rates().omega_zx;
  EXPECT_NEAR(zx_after, zx_before, 0.01 * std::abs(zx_before));
}

TEST(Calibration, NegativeSegmentIsFramePiConjugate) {
  const auto& c = calibrated();
  const Operator up = c.sim.unitary(cr_pulse(c.cr, +1));
  const Operator um = c.sim.unitary(cr_pulse(c.cr, -1));
  Operator p = Operator::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p(3 * i + j, 3 * i + j) = ((i + j) % 2) ? -1.0 : 1.0;
  EXPECT_LT((um - p * up * p).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Calibration, ZeroCorrectionsReproduceNaiveSchedule) {
  const auto& c = calibrated();
  const Schedule naive = assemble_ecr(c.cr, c.sq, false);
  const Schedule corrected = assemble_ecr(c.cr, c.sq, true);
  EXPECT_DOUBLE_EQ(naive.duration(), corrected.duration());
  EXPECT_LT((c.sim.unitary(naive) - c.sim.unitary(corrected)).cwiseAbs().maxCoeff(), 1e-14);
  const double expect = 2 * c.cr.pulse_duration() + 2 * c.sq.control.duration;
  EXPECT_DOUBLE_EQ(naive.duration(), expect);
  EXPECT_GE(naive.duration(), 250.0);
  EXPECT_LE(naive.duration(), 460.0);
}

TEST(Calibration, NaiveEcrOnQuietPairMatchesIdeal) {
  const auto& c = calibrated();
  const Matrix4c u = qubit_part(c.sim.unitary(assemble_ecr(c.cr, c.sq, false)));
  EXPECT_GE(process_fidelity(ideal::ecr(), u), 0.995);
}

namespace {

// Exponent of |1 - F(eps)| against eps for a term injected into both segments.
double echo_exponent(Term term) {
  const double t = 150;
  EffectiveHamiltonian h;
  h.omega_zx = 0.25 * kPi / t;
  std::vector<double> x, y;
  for (double eps : {0.01, 0.02, 0.04}) {
    EffectiveHamiltonian e = h;
    e[term] = eps / t;
    const Matrix4c u = effective_ecr(e, echo_partner(e), t);
    x.push_back(std::log(eps));
    y.push_back(std::log(1.0 - average_gate_fidelity(ideal::ecr(), u)));
  }
  const double mx = (x[0] + x[1] + x[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST(Calibration, EchoCancelsCommutingTermsExactly) {
  const double t = 150;
  EffectiveHamiltonian h;
  h.omega_zx = 0.25 * kPi / t;
  for (Term term : {Term::zi, Term::ix}) {
    for (double eps : {0.01, 0.02, 0.04}) {
      EffectiveHamiltonian e = h;
      e[term] = eps / t;
      EXPECT_LT(1.0 - average_gate_fidelity(ideal::ecr(), effective_ecr(e, echo_partner(e), t)), 1e-12);
    }
  }
}

TEST(Calibration, EchoLeavesSecondOrderForNonCommutingTerms) {
  for (Term t : {Term::iy, Term::zz}) {
    EXPECT_NEAR(echo_exponent(t), 2.0, 0.3) << to_string(t);
  }
}

TEST(Calibration, EchoedZxPlusXEqualsIdealEcr) {
  EffectiveHamiltonian h;
  h.omega_zx = 0.25 * kPi / 100;
  EXPECT_GT(process_fidelity(ideal::ecr(), effective_ecr(h, echo_partner(h), 100)), 1 - 1e-12);
  EXPECT_LT((ideal::ecr() - pauli_word(1, 0) * ideal::zx(0.5 * kPi)).norm(), 1e-12);
}
