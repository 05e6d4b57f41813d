#include <gtest/gtest.h>

#include <random>

#include "ecr/dynamics.hpp"

using namespace ecr;

namespace {

PairParams make_pair(double delta_mhz, double j_mhz) {
  PairParams p;
  p.target.frequency_ghz = 4.4;
  p.control.frequency_ghz = 4.4 + delta_mhz * 1e-3;
  p.j_mhz = j_mhz;
  return p;
}

Schedule random_schedule(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Schedule s;
  const Channel chans[3] = {Channel::control_drive, Channel::target_drive, Channel::cross_resonance};
  double t = 0;
  for (int k = 0; k < 4; ++k) {
    Envelope env = gaussian_square(0.05 + 0.05 * u(rng), 2.5, 10, 5 * (1 + k % 2), 0.5);
    env = apply_drag(env, 0.5 * u(rng));
    env.phase = 3 * u(rng);
    env.carrier_detuning_mhz = 20 * u(rng);
    s.add(chans[k % 3], t, env);
    s.add_frame(k % 2 ? Qubit::target : Qubit::control, t + 5, u(rng));
    t += 12.5;
  }
  return s;
}

StateVector random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  StateVector psi;
  for (int k = 0; k < kDim; ++k) psi(k) = cplx(g(rng), g(rng));
  return psi.normalized();
}

}  // namespace

TEST(Dynamics, UncoupledSpectrum) {
  const PairModel m = build_hamiltonian(make_pair(120, 0.0));
  const double wc = ghz_to_rad_per_ns(4.52), wt = ghz_to_rad_per_ns(4.4);
  EXPECT_NEAR(m.dressed_energy(1, 1), wc + wt, 1e-12 * (wc + wt));
  const double e2 = m.dressed_energy(2, 0) - 2 * m.dressed_energy(1, 0) + m.dressed_energy(0, 0);
  EXPECT_NEAR(rad_per_ns_to_mhz(e2), -182.0, 1e-9);
  EXPECT_DOUBLE_EQ(static_zz_rate(make_pair(120, 0.0)), 0.0);
}

TEST(Dynamics, DressedShiftsMatchPerturbationTheory) {
  const double j = 2.7, delta = 150;
  const PairModel m = build_hamiltonian(make_pair(delta, j));
  const PairModel bare = build_hamiltonian(make_pair(delta, 0.0));
  const double shift10 = rad_per_ns_to_mhz(m.dressed_energy(1, 0) - bare.dressed_energy(1, 0));
  const double shift01 = rad_per_ns_to_mhz(m.dressed_energy(0, 1) - bare.dressed_energy(0, 1));
  EXPECT_NEAR(shift10, j * j / delta, 0.05 * j * j / delta);
  EXPECT_NEAR(shift01, -j * j / delta, 0.05 * j * j / delta);
}

TEST(Dynamics, StaticZZAgainstPerturbation) {
  const double j = 2.7, delta = 150, a = -182;
  const double zeta = static_zz_rate(make_pair(delta, j));
  // |11> is pushed by |20> (J sqrt2, detuning -(delta + a)) and |02>.
  const double expected_khz = 2 * j * j * (1 / (delta - a) - 1 / (delta + a)) * 1e3;
  EXPECT_NEAR(zeta, expected_khz, 0.2 * std::abs(expected_khz));
  EXPECT_GT(zeta, 0.0);
}

TEST(Dynamics, StaticZZNearCollisionGrows) {
  // Approaching delta = -alpha the |11>-|20> splitting saturates at sqrt2 J, so the
  // growth is bounded near 8x for J = 2.7 MHz; a weaker coupling shows the >10x rise.
  const double base = std::abs(static_zz_rate(make_pair(150, 2.7)));
  EXPECT_GT(std::abs(static_zz_rate(make_pair(181, 2.7))), 6 * base);
  const double weak = std::abs(static_zz_rate(make_pair(150, 1.0)));
  EXPECT_GT(std::abs(static_zz_rate(make_pair(181.5, 1.0))), 10 * weak);
}

TEST(Dynamics, StaticZZRelabelingSymmetry) {
  PairParams p = make_pair(-95, 3.1);
  p.control.anharmonicity_mhz = -190;
  PairParams q = p;
  std::swap(q.control, q.target);
  const double a = static_zz_rate(p), b = static_zz_rate(q);
  EXPECT_NEAR(a, b, 1e-9 * std::abs(a));
}

TEST(Dynamics, DegenerateAssignmentReported) {
  // Strong hybridization of |11> with both |20> and |02>.
  EXPECT_THROW(static_zz_rate(make_pair(5, 150)), DegenerateAssignment);
}

TEST(Dynamics, ParameterValidation) {
  PairParams p = make_pair(100, 2.7);
  p.control.anharmonicity_mhz = 10;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = make_pair(100, 2.7);
  p.target.t2e_us = 300;
  EXPECT_THROW(p.validate(), InvalidArgument);
  EXPECT_THROW(make_pair(0, 2.7).validate(), InvalidArgument);
  EXPECT_THROW(make_pair(100, -1).validate(), InvalidArgument);
}

TEST(Dynamics, EmptyScheduleIsIdentity) {
  const PairModel m = build_hamiltonian(make_pair(100, 2.7));
  EXPECT_LT((propagate_unitary(m, Schedule{}) - Operator::Identity()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Dynamics, IdlePhasesClosedForm) {
  const double t = 137.5;
  Schedule idle;
  idle.set_min_duration(t);
  // J = 0: only the |2> anharmonic phases survive in the qubit frame.
  const PairModel m0 = build_hamiltonian(make_pair(100, 0.0));
  const Operator u0 = propagate_unitary(m0, idle);
  const double a = mhz_to_rad_per_ns(-182);
  for (int n = 0; n < 3; ++n) {
    for (int k = 0; k < 3; ++k) {
      const cplx expected = std::polar(1.0, -0.5 * a * (n * (n - 1) + k * (k - 1)) * t);
      EXPECT_LT(std::abs(u0(3 * n + k, 3 * n + k) - expected), 1e-10);
    }
  }
  EXPECT_LT((u0 - Operator(u0.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-14);
  // J > 0: the computational block carries only the static ZZ phase on |11>.
  const PairParams p = make_pair(100, 2.7);
  const Operator u = propagate_unitary(build_hamiltonian(p), idle);
  const Matrix4c block = qubit_block(u);
  const double zeta = static_zz_rate(p) * 1e-6 * kTwoPi;
  EXPECT_LT(std::abs(block(0, 0) - 1.0), 1e-9);
  EXPECT_LT(std::abs(block(1, 1) - 1.0), 1e-9);
  EXPECT_LT(std::abs(block(2, 2) - 1.0), 1e-9);
  EXPECT_LT(std::abs(block(3, 3) - std::polar(1.0, -zeta * t)), 1e-9);
}

TEST(Dynamics, ResonantPiPulse) {
  const PairModel m = build_hamiltonian(make_pair(100, 0.0));
  Envelope shape = gaussian_pulse(1.0, 20, 80, 0.25);
  const double amp = std::numbers::pi / shape.area().real();
  Schedule s;
  s.add(Channel::target_drive, 0, gaussian_pulse(amp, 20, 80, 0.25));
  const Operator u = propagate_unitary(m, s);
  const double p = std::norm(u(1, 0));
  EXPECT_GE(p, 0.999);
  EXPECT_LT(unitarity_error(u), 1e-9);
}

TEST(Dynamics, DriveAxisFollowsPhase) {
  // Phase pi/2 drives about +Y: |0> -> (|0> + |1>)/sqrt2 for a pi/2 rotation.
  // A large anharmonicity keeps the Stark shift from |2> out of the way.
  PairParams p = make_pair(100, 0.0);
  p.target.anharmonicity_mhz = -5000;
  const PairModel m = build_hamiltonian(p);
  Envelope env = gaussian_pulse(1.0, 10, 40, 0.25);
  const double amp = 0.5 * std::numbers::pi / env.area().real();
  env = gaussian_pulse(amp, 10, 40, 0.25);
  env.phase = 0.5 * std::numbers::pi;
  Schedule s;
  s.add(Channel::target_drive, 0, env);
  const Operator u = propagate_unitary(m, s);
  const cplx a0 = u(0, 0), a1 = u(1, 0);
  EXPECT_NEAR(std::abs(a0), std::sqrt(0.5), 2e-3);
  EXPECT_NEAR(std::arg(a1 / a0), 0.0, 5e-3);
}

TEST(Dynamics, VirtualZEqualsPhysicalZ) {
  const PairModel m = build_hamiltonian(make_pair(100, 0.0));
  Envelope x = gaussian_pulse(1.0, 10, 40, 0.25);
  x = gaussian_pulse(std::numbers::pi / x.area().real(), 10, 40, 0.25);
  Schedule plain;
  plain.add(Channel::target_drive, 0, x);
  for (double theta : {std::numbers::pi, 0.7}) {
    const Schedule with_vz = virtual_z(plain, Qubit::target, theta, 0.0);
    const Operator lhs = propagate_unitary(m, with_vz);
    const Operator rhs = propagate_unitary(m, plain) * z_rotation(Qubit::target, theta);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Dynamics, CrossResonanceUsesTargetFrame) {
  const PairModel m = build_hamiltonian(make_pair(-80, 2.7));
  Schedule cr;
  cr.add(Channel::cross_resonance, 0, gaussian_square(0.2, 7.5, 30, 50, 0.25));
  const Schedule shifted = virtual_z(cr, Qubit::target, 0.9, 0.0);
  const Schedule control_shift = virtual_z(cr, Qubit::control, 0.9, 0.0);
  const Operator u = propagate_unitary(m, cr);
  const Operator uz = propagate_unitary(m, shifted);
  const Operator uc = propagate_unitary(m, control_shift);
  EXPECT_GT((u - uz).cwiseAbs().maxCoeff(), 1e-3);
  // A control frame update does not touch the target-frame CR tone.
  EXPECT_LT((uc - z_rotation(Qubit::control, 0.9) * u).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Dynamics, StepHalvingConvergence) {
  std::mt19937_64 rng(3);
  const PairModel m = build_hamiltonian(make_pair(-70, 2.7));
  for (int trial = 0; trial < 3; ++trial) {
    const Schedule s = random_schedule(rng);
    const Operator a = propagate_unitary(m, s, 0.25);
    const Operator b = propagate_unitary(m, s, 0.125);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);
  }
  Schedule cr;
  cr.add(Channel::cross_resonance, 0, apply_drag(gaussian_square(0.3, 7.5, 30, 100, 0.25), 0.4));
  Envelope cancel = gaussian_square(0.02, 7.5, 30, 100, 0.25);
  cancel.phase = 1.1;
  cr.add(Channel::target_drive, 0, cancel);
  EXPECT_LT((propagate_unitary(m, cr, 0.25) - propagate_unitary(m, cr, 0.125)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Dynamics, RejectsMisalignedStep) {
  const PairModel m = build_hamiltonian(make_pair(-70, 2.7));
  Schedule s;
  s.add(Channel::control_drive, 0, gaussian_pulse(0.1, 5, 20, 0.25));
  EXPECT_THROW(propagate_unitary(m, s, 0.3), InvalidArgument);
  EXPECT_THROW(propagate_unitary(m, s, 0.0), InvalidArgument);
}

TEST(Dynamics, T1DecayOfControl) {
  PairParams p = make_pair(-100, 2.7);
  p.control.t1_us = p.target.t1_us = 69;
  p.control.t2e_us = p.target.t2e_us = 100;
  const PairModel m = build_hamiltonian(p);
  Schedule idle;
  idle.set_min_duration(69000);
  const DensityMatrix rho =
      propagate_lindblad(m, idle, NoiseModel::from_pair(p), QuantumState::basis(1, 0), 100.0);
  const QutritMatrix rc = partial_trace(rho, Qubit::control);
  EXPECT_NEAR((rc(1, 1) + rc(2, 2)).real(), std::exp(-1.0), 1e-3);
}

TEST(Dynamics, PureDephasingDecay) {
  PairParams p = make_pair(-100, 0.0);
  p.target.t1_us = 1e7;
  p.target.t2e_us = 10;
  const PairModel m = build_hamiltonian(p);
  const NoiseModel noise = NoiseModel::from_pair(p);
  StateVector psi = StateVector::Zero();
  psi(0) = psi(1) = std::sqrt(0.5);
  const double t = 8000;
  Schedule idle;
  idle.set_min_duration(t);
  const DensityMatrix rho = propagate_lindblad(m, idle, noise, QuantumState(psi), 50.0);
  const QutritMatrix rt = partial_trace(rho, Qubit::target);
  const double decay = noise.gamma_phi[1] + 0.5 * noise.gamma1[1];
  EXPECT_NEAR(std::abs(rt(0, 1)), 0.5 * std::exp(-decay * t), 1e-9);
  EXPECT_NEAR(decay, 1.0 / 10000, 1e-15);
  EXPECT_NEAR(noise.gamma_phi[1], 1.0 / 10000 - 0.5 / 1e10, 1e-18);
}

TEST(Dynamics, DephasingRateClampedAtZero) {
  PairParams p = make_pair(-100, 2.7);
  p.control.t2e_us = 2 * p.control.t1_us;
  const NoiseModel n = NoiseModel::from_pair(p);
  EXPECT_GE(n.gamma_phi[0], 0.0);
  EXPECT_LT(n.gamma_phi[0], 1e-15);
}

TEST(Dynamics, NoiselessLindbladMatchesUnitary) {
  std::mt19937_64 rng(5);
  const PairModel m = build_hamiltonian(make_pair(-70, 2.7));
  for (int trial = 0; trial < 10; ++trial) {
    const Schedule s = random_schedule(rng);
    const QuantumState psi(random_state(rng));
    const Operator u = propagate_unitary(m, s);
    const DensityMatrix expected = u * psi.density() * u.adjoint();
    const DensityMatrix rho = propagate_lindblad(m, s, NoiseModel::none(), psi);
    EXPECT_LT((rho - expected).cwiseAbs().maxCoeff(), 1e-8);
    const Superoperator sup = propagate_superoperator(m, s, NoiseModel::none());
    EXPECT_LT((apply_superoperator(sup, psi.density()) - expected).cwiseAbs().maxCoeff(), 1e-8);
    // Zero rates with the flag on take the dissipative path and still agree.
    NoiseModel zero;
    zero.enabled = true;
    EXPECT_LT((propagate_lindblad(m, s, zero, psi) - expected).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Dynamics, NoisySuperoperatorMatchesLindblad) {
  std::mt19937_64 rng(9);
  PairParams p = make_pair(-70, 2.7);
  p.control.t1_us = 5;
  p.control.t2e_us = 4;
  p.target.t1_us = 8;
  p.target.t2e_us = 3;
  const PairModel m = build_hamiltonian(p);
  const NoiseModel noise = NoiseModel::from_pair(p);
  for (int trial = 0; trial < 3; ++trial) {
    const Schedule s = random_schedule(rng);
    const QuantumState psi(random_state(rng));
    const DensityMatrix rho = propagate_lindblad(m, s, noise, psi);
    const Superoperator sup = propagate_superoperator(m, s, noise);
    EXPECT_LT((apply_superoperator(sup, psi.density()) - rho).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-8);
    EXPECT_GT(min_eigenvalue(rho), -1e-8);
    // Purity strictly drops under noise.
    EXPECT_LT((rho * rho).trace().real(), 1.0 - 1e-6);
  }
}

TEST(Dynamics, SuperoperatorLongRunsUseSquaring) {
  PairParams p = make_pair(-70, 2.7);
  const PairModel m = build_hamiltonian(p);
  const NoiseModel noise = NoiseModel::from_pair(p);
  Schedule s;
  s.add(Channel::cross_resonance, 0, gaussian_square(0.2, 7.5, 30, 150, 0.25));
  s.pad(33.25);
  const auto psi = QuantumState::basis(1, 0);
  const DensityMatrix rho = propagate_lindblad(m, s, noise, psi);
  const Superoperator sup = propagate_superoperator(m, s, noise);
  EXPECT_LT((apply_superoperator(sup, psi.density()) - rho).cwiseAbs().maxCoeff(), 1e-10);
}
