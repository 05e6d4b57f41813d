#pragma once

// Pulse-level gate definitions: native single-qubit SX, the cross-resonance
// segment and the echoed cross-resonance (ECR) gate built from them.

#include "ecr/dynamics.hpp"

namespace ecr {

/// Native SX pulse: lifted Gaussian with DRAG on one transmon's own drive channel.
struct SingleQubitGateConfig {
  double amplitude = 0;  // rad/ns
  double sigma = 5;      // ns
  double duration = 20;  // ns
  double drag_alpha = 0; // ns

  void validate() const;
};

struct SingleQubitGates {
  SingleQubitGateConfig control;
  SingleQubitGateConfig target;

  const SingleQubitGateConfig& operator[](Qubit q) const { return q == Qubit::control ? control : target; }
  SingleQubitGateConfig& operator[](Qubit q) { return q == Qubit::control ? control : target; }
};

/// Coherent-error corrections realized when assembling the corrected ECR.
struct CorrectionSet {
  double theta_c = 0;       // virtual Z on the target after each CR segment, rad
  double zy_phase_fix = 0;  // added to the CR and cancellation phases, rad
  double y_comp_angle = 0;  // Y conjugation angle around each CR segment, rad
  double zx_rescale = 1;    // CR and cancellation amplitude factor

  void validate() const;
};

/// One ZX(pi/4) cross-resonance pulse with its cancellation tone. The cancellation
/// tone shares the CR envelope shape with its own complex amplitude; DRAG applies
/// to the CR tone only.
struct CRPulseConfig {
  double cr_amplitude = 0;      // rad/ns
  double cr_phase = 0;          // rad
  double cr_flat = 0;           // ns
  double rise = 30;             // ns
  double drag_alpha = 0;        // ns
  double cancel_amplitude = 0;  // rad/ns
  double cancel_phase = 0;      // rad
  CorrectionSet corrections;

  double sigma() const { return rise / 4; }
  /// Length of one CR pulse (rise + flat + fall), ns.
  double pulse_duration() const { return 2 * rise + cr_flat; }
  void validate() const;
};

/// Lifted-Gaussian SX envelope with DRAG, scaled to rotate by `angle` (pi/2 for SX).
Envelope sx_envelope(const SingleQubitGateConfig& cfg, double angle = 0.5 * std::numbers::pi, double dt = 0.25);

/// Single SX on `q`'s own drive channel.
Schedule sx_schedule(const SingleQubitGateConfig& cfg, Qubit q);
/// X as two back-to-back SX pulses.
Schedule x_schedule(const SingleQubitGateConfig& cfg, Qubit q);
/// Rotation by `angle` about +Y on the target (phase pi/2, amplitude scaled from SX).
Schedule y_rotation_schedule(const SingleQubitGateConfig& target_sx, double angle);

/// Bare CR pulse (CR tone plus cancellation tone), sign -1 adds a pi phase to both.
/// Corrections are ignored.
Schedule cr_pulse(const CRPulseConfig& cfg, int sign);

/// One echo segment. Naive: the bare CR pulse. Corrected: phases shifted by the
/// ZY fix, amplitudes rescaled, wrapped in Y(-sign*theta) ... Y(+sign*theta) when the
/// Y compensation angle is nonzero, and followed by a virtual Z(theta_c) on the target.
Schedule cr_segment(const CRPulseConfig& cfg, const SingleQubitGateConfig& target_sx, int sign, bool corrected);

/// CR(+), X on the control, CR(-).
Schedule assemble_ecr(const CRPulseConfig& cfg, const SingleQubitGates& sq, bool corrected);

namespace ideal {
/// exp(-i theta/2 P) for a two-qubit Pauli word P.
Matrix4c pauli_rotation(const Matrix4c& word, double theta);
Matrix4c zx(double theta);
Matrix2c sx();
Matrix2c rz(double theta);
/// Time order ZX(pi/4), X on control, ZX(-pi/4); equals (X kron I) ZX(pi/2).
Matrix4c ecr();
}  // namespace ideal

/// Two-qubit Pauli word sigma_a kron sigma_b with 0 = I, 1 = X, 2 = Y, 3 = Z.
Matrix4c pauli_word(int control_pauli, int target_pauli);

}  // namespace ecr
