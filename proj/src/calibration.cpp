#include "ecr/calibration.hpp"

#include <cmath>
#include <cstdint>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace ecr {

namespace {

constexpr double kPi = std::numbers::pi;

Matrix2c qubit_block_of(const Operator& u, Qubit q) {
  const int other = q == Qubit::control ? 3 : 1;
  Matrix2c b;
  b << u(0, 0), u(0, other), u(other, 0), u(other, other);
  return b;
}

GateTomography bare_tomography(const PairSimulator& sim, const CRPulseConfig& cfg) {
  return gate_tomography(sim, cr_pulse(cfg, +1));
}

Eigen::Vector2d conditional_xy(const GateTomography& g) { return 0.5 * (g.v0 - g.v1).head<2>(); }
Eigen::Vector2d unconditional_xy(const GateTomography& g) { return 0.5 * (g.v0 + g.v1).head<2>(); }

/// Solves |conditional| = target for the CR amplitude in [lo, hi].
double solve_amplitude(const PairSimulator& sim, CRPulseConfig cfg, double target, double lo, double hi,
                       double tol) {
  auto f = [&](double a) {
    cfg.cr_amplitude = a;
    return conditional_magnitude(bare_tomography(sim, cfg)) - target;
  };
  double flo = f(lo), fhi = f(hi);
  if (flo * fhi > 0) throw CalibrationFailure("CR amplitude bracket does not straddle the target angle");
  std::uintmax_t iters = 60;
  const auto r = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, [tol](double a, double b) { return std::abs(a - b) < tol; }, iters);
  if (iters >= 60) throw CalibrationFailure("CR amplitude search did not converge");
  return 0.5 * (r.first + r.second);
}

}  // namespace

double wrap_phase(double x) { return std::remainder(x, 2 * kPi); }

double sx_fidelity(const PairSimulator& sim, const SingleQubitGateConfig& cfg, Qubit q) {
  const Operator u = sim.unitary(sx_schedule(cfg, q));
  return average_gate_fidelity(ideal::sx(), qubit_block_of(u, q));
}

SingleQubitGateConfig calibrate_sx(const PairSimulator& sim, Qubit q, const std::vector<double>& durations) {
  if (durations.empty()) throw InvalidArgument("no SX durations to try");
  double best_fidelity = 0;
  for (double duration : durations) {
    SingleQubitGateConfig cfg;
    cfg.duration = duration;
    cfg.sigma = duration / 4;
    const double unit_area = gaussian_pulse(1.0, cfg.sigma, cfg.duration, 0.25).area().real();
    const double a0 = 0.5 * kPi / unit_area;

    auto best_amplitude = [&](double alpha, double& infidelity) {
      SingleQubitGateConfig c = cfg;
      c.drag_alpha = alpha;
      auto loss = [&](double a) {
        c.amplitude = a;
        return 1.0 - sx_fidelity(sim, c, q);
      };
      std::uintmax_t it = 80;
      const auto r = boost::math::tools::brent_find_minima(loss, 0.9 * a0, 1.1 * a0, 40, it);
      infidelity = r.second;
      return r.first;
    };
    auto outer = [&](double alpha) {
      double inf = 0;
      best_amplitude(alpha, inf);
      return inf;
    };
    std::uintmax_t it = 60;
    const auto r = boost::math::tools::brent_find_minima(outer, -3.0, 3.0, 30, it);
    cfg.drag_alpha = r.first;
    double inf = 0;
    cfg.amplitude = best_amplitude(cfg.drag_alpha, inf);
    if (1.0 - inf >= 0.9995) return cfg;
    best_fidelity = std::max(best_fidelity, 1.0 - inf);
  }
  throw CalibrationFailure("SX fidelity " + std::to_string(best_fidelity) + " below 0.9995");
}

SingleQubitGates calibrate_single_qubit_gates(const PairSimulator& sim) {
  return {calibrate_sx(sim, Qubit::control), calibrate_sx(sim, Qubit::target)};
}

double conditional_magnitude(const GateTomography& g) { return conditional_xy(g).norm(); }

CRPulseConfig retune_zx(const PairSimulator& sim, CRPulseConfig cfg, const CROptions& opt) {
  for (int round = 0; round < opt.max_rounds; ++round) {
    GateTomography g = bare_tomography(sim, cfg);
    const double mag = conditional_magnitude(g);
    if (std::abs(mag - opt.target_angle) > opt.angle_tolerance) {
      // The angle is close to linear in amplitude away from collisions.
      const double guess = cfg.cr_amplitude * (mag > 0 ? opt.target_angle / mag : 2.0);
      double lo = 0.9 * std::min(guess, cfg.cr_amplitude), hi = 1.1 * std::max(guess, cfg.cr_amplitude);
      // DRAG or a stretch can lower the ZX rate; allow limited headroom above the ceiling.
      const double cap = 1.5 * opt.amplitude_ceiling;
      hi = std::min(hi, cap);
      CRPulseConfig probe = cfg;
      probe.cr_amplitude = hi;
      while (hi < cap && conditional_magnitude(bare_tomography(sim, probe)) < opt.target_angle) {
        hi = probe.cr_amplitude = std::min(cap, 1.2 * hi);
      }
      cfg.cr_amplitude = solve_amplitude(sim, cfg, opt.target_angle, lo, hi, 1e-10);
      g = bare_tomography(sim, cfg);
    }
    const Eigen::Vector2d c = conditional_xy(g);
    const double psi = std::atan2(c.y(), c.x());
    cfg.cr_phase = wrap_phase(cfg.cr_phase - psi);
    if (std::abs(psi) < 1e-6 && std::abs(conditional_magnitude(g) - opt.target_angle) <= opt.angle_tolerance) {
      return cfg;
    }
  }
  const GateTomography g = bare_tomography(sim, cfg);
  if (std::abs(conditional_magnitude(g) - opt.target_angle) > 10 * opt.angle_tolerance) {
    throw CalibrationFailure("CR retune did not converge");
  }
  return cfg;
}

CRPulseConfig calibrate_zx_quarter(const PairSimulator& sim, const CROptions& opt) {
  CRPulseConfig cfg;
  cfg.rise = opt.rise;
  for (double flat = opt.min_flat; flat <= opt.max_flat + 1e-9; flat += opt.flat_step) {
    cfg.cr_flat = flat;
    cfg.cr_amplitude = opt.amplitude_ceiling;
    if (conditional_magnitude(bare_tomography(sim, cfg)) < opt.target_angle) continue;
    cfg.cr_amplitude = solve_amplitude(sim, cfg, opt.target_angle, 1e-4, opt.amplitude_ceiling, 1e-10);
    return retune_zx(sim, cfg, opt);
  }
  throw CalibrationFailure("no flat length reaches the target angle below the amplitude ceiling");
}

CRPulseConfig calibrate_cancellation(const PairSimulator& sim, CRPulseConfig cfg, double tolerance) {
  auto residual = [&](const Eigen::Vector2d& z) {
    CRPulseConfig c = cfg;
    c.cancel_amplitude = z.norm();
    c.cancel_phase = z.norm() > 0 ? std::atan2(z.y(), z.x()) : 0.0;
    return unconditional_xy(bare_tomography(sim, c));
  };
  Eigen::Vector2d z = cfg.cancel_amplitude * Eigen::Vector2d(std::cos(cfg.cancel_phase), std::sin(cfg.cancel_phase));
  const double h = 1e-5;
  for (int it = 0; it < 20; ++it) {
    const Eigen::Vector2d r = residual(z);
    if (r.norm() < tolerance) break;
    Eigen::Matrix2d jac;
    for (int k = 0; k < 2; ++k) {
      Eigen::Vector2d dz = Eigen::Vector2d::Zero();
      dz(k) = h;
      jac.col(k) = (residual(z + dz) - residual(z - dz)) / (2 * h);
    }
    const Eigen::FullPivLU<Eigen::Matrix2d> lu(jac);
    if (!lu.isInvertible()) throw CalibrationFailure("cancellation Jacobian is singular");
    z -= lu.solve(r);
    if (it == 19) throw CalibrationFailure("cancellation Newton iteration did not converge");
  }
  cfg.cancel_amplitude = z.norm();
  cfg.cancel_phase = z.norm() > 0 ? std::atan2(z.y(), z.x()) : 0.0;
  return cfg;
}

CRPulseConfig calibrate_cr(const PairSimulator& sim, const CROptions& opt) {
  CRPulseConfig cfg = calibrate_zx_quarter(sim, opt);
  for (int round = 0; round < opt.max_rounds; ++round) {
    cfg = calibrate_cancellation(sim, cfg);
    cfg = retune_zx(sim, cfg, opt);
    const CalibrationReport rep = check_cr(sim, cfg);
    if (std::abs(rep.ix_over_zx) < 1e-3 && std::abs(rep.iy_over_zx) < 1e-3 && std::abs(rep.zy_over_zx) < 1e-3) {
      return cfg;
    }
  }
  const CalibrationReport rep = check_cr(sim, cfg);
  if (std::abs(rep.ix_over_zx) >= 0.01 || std::abs(rep.iy_over_zx) >= 0.01 || std::abs(rep.zy_over_zx) >= 0.01) {
    throw CalibrationFailure("CR calibration did not meet the 1% tolerance");
  }
  return cfg;
}

CalibrationReport check_cr(const PairSimulator& sim, const CRPulseConfig& cfg) {
  const GateTomography g = bare_tomography(sim, cfg);
  const EffectiveHamiltonian h = g.rates();
  CalibrationReport r;
  r.conditional_angle = g.conditional_angle();
  r.zy_over_zx = h.omega_zy / h.omega_zx;
  r.ix_over_zx = h.omega_ix / h.omega_zx;
  r.iy_over_zx = h.omega_iy / h.omega_zx;
  r.leakage = g.leakage;
  return r;
}

}  // namespace ecr
