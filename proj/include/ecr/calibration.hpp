#pragma once

// Closed-loop calibration of the native SX pulses and of the ZX(pi/4)
// cross-resonance pulse with its cancellation tone.

#include <vector>

#include "ecr/tomography.hpp"

namespace ecr {

class CalibrationFailure : public Error {
 public:
  using Error::Error;
};

/// Maps an angle into [-pi, pi].
double wrap_phase(double x);

/// Noiseless average gate fidelity of the SX pulse on `q` against ideal sqrt(X),
/// evaluated on the qubit block with the other transmon in |0>.
double sx_fidelity(const PairSimulator& sim, const SingleQubitGateConfig& cfg, Qubit q);

/// Amplitude (inner) and DRAG coefficient (outer) by nested Brent minimization of the
/// SX infidelity, at the shortest duration (sigma = duration / 4) reaching 0.9995.
/// Longer pulses help when the other qubit is close in frequency. Throws CalibrationFailure
/// if none does.
SingleQubitGateConfig calibrate_sx(const PairSimulator& sim, Qubit q, const std::vector<double>& durations = {20, 28, 36});
SingleQubitGates calibrate_single_qubit_gates(const PairSimulator& sim);

struct CROptions {
  double rise = 30;                 // ns
  double amplitude_ceiling = 0.15;  // rad/ns, leakage-safe upper bound
  double min_flat = 45;             // ns, keeps the ECR inside 250-460 ns
  double max_flat = 150;
  double flat_step = 5;
  double target_angle = 0.25 * std::numbers::pi;
  double angle_tolerance = 1e-5;    // rad
  int max_rounds = 6;
};

/// Conditional rotation of the bare CR pulse; the magnitude ignores the drive phase.
double conditional_magnitude(const GateTomography& g);

/// Selects the shortest flat top on the grid whose required amplitude stays below the
/// ceiling, solves the amplitude by bracketing, and nulls ZY with the drive phase.
CRPulseConfig calibrate_zx_quarter(const PairSimulator& sim, const CROptions& opt = {});

/// Nulls the unconditional target rotation (IX, IY) with a 2x2 Newton iteration on the
/// cancellation tone's complex amplitude.
CRPulseConfig calibrate_cancellation(const PairSimulator& sim, CRPulseConfig cfg, double tolerance = 1e-5);

/// Re-solves amplitude and phase at fixed flat so the bare pulse is ZX(target) again
/// (used after the cancellation tone, DRAG or flat changes).
CRPulseConfig retune_zx(const PairSimulator& sim, CRPulseConfig cfg, const CROptions& opt = {});

/// Full CR calibration: ZX quarter, cancellation, and alternating retunes until the
/// conditional angle, ZY and unconditional terms all meet tolerance.
CRPulseConfig calibrate_cr(const PairSimulator& sim, const CROptions& opt = {});

struct CalibrationReport {
  double conditional_angle = 0;  // rad
  double zy_over_zx = 0;
  double ix_over_zx = 0;
  double iy_over_zx = 0;
  double leakage = 0;
};
CalibrationReport check_cr(const PairSimulator& sim, const CRPulseConfig& cfg);

}  // namespace ecr
