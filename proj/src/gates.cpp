#include "ecr/gates.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

namespace ecr {

namespace {

constexpr double kPi = std::numbers::pi;

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void SingleQubitGateConfig::validate() const {
  if (!(sigma > 0) || !(duration > 0)) throw InvalidArgument("single-qubit gate needs positive sigma and duration");
  if (!finite(amplitude) || !finite(drag_alpha)) throw InvalidArgument("single-qubit gate has non-finite fields");
}

void CorrectionSet::validate() const {
  if (!finite(theta_c) || !finite(zy_phase_fix) || !finite(y_comp_angle)) {
    throw InvalidArgument("correction angles must be finite");
  }
  if (!(zx_rescale > 0 && zx_rescale <= 1 + 1e-12)) throw InvalidArgument("zx_rescale outside (0, 1]");
}

void CRPulseConfig::validate() const {
  if (!(cr_flat >= 0) || !(rise > 0)) throw InvalidArgument("CR pulse needs flat >= 0 and rise > 0");
  for (double x : {cr_amplitude, cr_phase, drag_alpha, cancel_amplitude, cancel_phase}) {
    if (!finite(x)) throw InvalidArgument("CR pulse config has non-finite fields");
  }
  corrections.validate();
}

Envelope sx_envelope(const SingleQubitGateConfig& cfg, double angle, double dt) {
  Envelope env = gaussian_pulse(cfg.amplitude * angle / (0.5 * kPi), cfg.sigma, cfg.duration, dt);
  return apply_drag(env, cfg.drag_alpha);
}

Schedule sx_schedule(const SingleQubitGateConfig& cfg, Qubit q) {
  Schedule s;
  s.add(q == Qubit::control ? Channel::control_drive : Channel::target_drive, 0, sx_envelope(cfg));
  return s;
}

Schedule x_schedule(const SingleQubitGateConfig& cfg, Qubit q) {
  Schedule s = sx_schedule(cfg, q);
  s.append(sx_schedule(cfg, q));
  return s;
}

Schedule y_rotation_schedule(const SingleQubitGateConfig& target_sx, double angle) {
  Envelope env = sx_envelope(target_sx, angle);
  env.phase = 0.5 * kPi;
  Schedule s;
  s.add(Channel::target_drive, 0, std::move(env));
  return s;
}

namespace {

Schedule cr_tones(const CRPulseConfig& cfg, int sign, double phase_shift, double scale) {
  cfg.validate();
  const double flip = sign < 0 ? kPi : 0.0;
  Envelope cr = gaussian_square(cfg.cr_amplitude * scale, cfg.sigma(), cfg.rise, cfg.cr_flat, 0.25);
  if (cfg.drag_alpha != 0.0) cr = apply_drag(cr, cfg.drag_alpha);
  cr.phase = cfg.cr_phase + phase_shift + flip;
  Schedule s;
  s.add(Channel::cross_resonance, 0, std::move(cr));
  if (cfg.cancel_amplitude != 0.0) {
    Envelope cancel = gaussian_square(cfg.cancel_amplitude * scale, cfg.sigma(), cfg.rise, cfg.cr_flat, 0.25);
    cancel.phase = cfg.cancel_phase + phase_shift + flip;
    s.add(Channel::target_drive, 0, std::move(cancel));
  }
  return s;
}

}  // namespace

Schedule cr_pulse(const CRPulseConfig& cfg, int sign) { return cr_tones(cfg, sign, 0.0, 1.0); }

Schedule cr_segment(const CRPulseConfig& cfg, const SingleQubitGateConfig& target_sx, int sign, bool corrected) {
  if (!corrected) return cr_pulse(cfg, sign);
  const auto& c = cfg.corrections;
  Schedule s;
  const double y = sign < 0 ? -c.y_comp_angle : c.y_comp_angle;
  if (y != 0.0) s.append(y_rotation_schedule(target_sx, -y));
  s.append(cr_tones(cfg, sign, c.zy_phase_fix, c.zx_rescale));
  if (y != 0.0) s.append(y_rotation_schedule(target_sx, y));
  return virtual_z(s, Qubit::target, c.theta_c, s.duration());
}

Schedule assemble_ecr(const CRPulseConfig& cfg, const SingleQubitGates& sq, bool corrected) {
  Schedule s = cr_segment(cfg, sq.target, +1, corrected);
  s.append(x_schedule(sq.control, Qubit::control));
  s.append(cr_segment(cfg, sq.target, -1, corrected));
  return s;
}

Matrix4c pauli_word(int control_pauli, int target_pauli) {
  auto p = [](int k) -> Matrix2c {
    switch (k) {
      case 1:
        return pauli::x();
      case 2:
        return pauli::y();
      case 3:
        return pauli::z();
      default:
        return pauli::identity();
    }
  };
  return kron2(p(control_pauli), p(target_pauli));
}

namespace ideal {

Matrix4c pauli_rotation(const Matrix4c& word, double theta) {
  // P^2 = I so exp(-i t/2 P) = cos(t/2) I - i sin(t/2) P.
  return std::cos(0.5 * theta) * Matrix4c::Identity() - cplx(0, std::sin(0.5 * theta)) * word;
}

Matrix4c zx(double theta) { return pauli_rotation(pauli_word(3, 1), theta); }

Matrix2c sx() {
  Matrix2c m;
  m << cplx(1, 1), cplx(1, -1), cplx(1, -1), cplx(1, 1);
  return 0.5 * m;
}

Matrix2c rz(double theta) {
  Matrix2c m = Matrix2c::Zero();
  m(0, 0) = std::polar(1.0, -0.5 * theta);
  m(1, 1) = std::polar(1.0, 0.5 * theta);
  return m;
}

Matrix4c ecr() { return zx(-0.25 * kPi) * pauli_word(1, 0) * zx(0.25 * kPi); }

}  // namespace ideal

}  // namespace ecr
