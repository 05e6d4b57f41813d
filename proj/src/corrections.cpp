#include "ecr/corrections.hpp"

#include <cmath>

namespace ecr {

namespace {

constexpr double kQuarter = 0.25 * std::numbers::pi;

bool has_corrections(const CorrectionSet& c) {
  return c.theta_c != 0 || c.zy_phase_fix != 0 || c.y_comp_angle != 0 || c.zx_rescale != 1;
}

}  // namespace

double iz_correction_angle(const EffectiveHamiltonian& h, double pulse_duration) {
  if (!(pulse_duration >= 0)) throw InvalidArgument("pulse duration must be non-negative");
  return -h.omega_iz * pulse_duration;
}

double zy_phase_fix(const EffectiveHamiltonian& h, double theta_c) {
  if (h.omega_zx == 0) throw UndefinedAngle("no ZX rate to re-phase");
  // Z(theta_c) after the pulse tilts the conditional axis towards +Y by theta_c / 2.
  return -0.5 * theta_c;
}

double zz_compensation_angle(const EffectiveHamiltonian& h) {
  if (h.omega_zx == 0) throw UndefinedAngle("ZZ compensation angle undefined without ZX");
  return std::atan(h.omega_zz / h.omega_zx);
}

double zx_rescale_factor(const EffectiveHamiltonian& h) {
  const double r = std::hypot(h.omega_zx, h.omega_zz);
  return r > 0 ? std::abs(h.omega_zx) / r : 1.0;
}

CRPulseConfig rescale_zx_amplitude(CRPulseConfig cfg, const EffectiveHamiltonian& h) {
  cfg.corrections.zx_rescale *= zx_rescale_factor(h);
  return cfg;
}

bool zz_compensation_worthwhile(double zz_epg, double marginal_incoherent_epg) {
  return zz_epg > 1.5 * marginal_incoherent_epg;
}

GateTomography segment_tomography(const PairSimulator& sim, const CRPulseConfig& cfg,
                                  const SingleQubitGateConfig& target_sx) {
  return gate_tomography(sim, cr_segment(cfg, target_sx, +1, true));
}

CRPulseConfig calibrate_corrections(const PairSimulator& sim, CRPulseConfig cfg, const SingleQubitGates& sq,
                                    const CorrectionOptions& opt) {
  CorrectionSet& c = cfg.corrections;
  if (!has_corrections(c)) {
    const GateTomography g0 = gate_tomography(sim, cr_pulse(cfg, +1));
    const EffectiveHamiltonian h0 = g0.rates();
    if (opt.compensate_zz) {
      c.y_comp_angle = zz_compensation_angle(h0);
      cfg = rescale_zx_amplitude(cfg, h0);
    }
    c.theta_c = iz_correction_angle(h0, g0.duration);
    c.zy_phase_fix = zy_phase_fix(h0, c.theta_c);
  }
  if (!opt.compensate_zz) {
    c.y_comp_angle = 0;
    c.zx_rescale = 1;
  }

  // Secant state for the ZZ residual as a function of the Y angle.
  double prev_y = 0, prev_zz = 0;
  bool have_prev = false;
  for (int round = 0; round < opt.max_rounds; ++round) {
    const GateTomography g = segment_tomography(sim, cfg, sq.target);
    const Eigen::Vector3d cond = 0.5 * (g.v0 - g.v1);
    const Eigen::Vector3d uncond = 0.5 * (g.v0 + g.v1);
    const double psi = std::atan2(cond.y(), cond.x());
    const double angle_err = cond.norm() - kQuarter;
    const bool done = std::abs(uncond.z()) < opt.angle_tolerance && std::abs(cond.y()) < opt.angle_tolerance &&
                      (!opt.compensate_zz ||
                       (std::abs(cond.z()) < opt.angle_tolerance && std::abs(angle_err) < opt.angle_tolerance));
    if (done) return cfg;

    c.theta_c -= uncond.z();
    c.zy_phase_fix = wrap_phase(c.zy_phase_fix - psi);
    if (opt.compensate_zz) {
      double next = c.y_comp_angle + std::atan2(cond.z(), cond.x());
      if (have_prev && cond.z() != prev_zz) {
        next = c.y_comp_angle - cond.z() * (c.y_comp_angle - prev_y) / (cond.z() - prev_zz);
      }
      prev_y = c.y_comp_angle;
      prev_zz = cond.z();
      have_prev = true;
      c.y_comp_angle = next;
      c.zx_rescale = std::min(1.0, c.zx_rescale * kQuarter / cond.norm());
    }
  }
  const GateTomography g = segment_tomography(sim, cfg, sq.target);
  const Eigen::Vector3d cond = 0.5 * (g.v0 - g.v1);
  if (std::abs(0.5 * (g.v0 + g.v1).z()) > 10 * opt.angle_tolerance || std::abs(cond.y()) > 10 * opt.angle_tolerance) {
    throw CalibrationFailure("segment corrections did not converge");
  }
  return cfg;
}

}  // namespace ecr
