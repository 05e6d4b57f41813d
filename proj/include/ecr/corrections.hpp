#pragma once

// Coherent-error corrections of the echo segments: virtual Z for IZ, the drive-phase
// fix for the ZY it induces, and Y conjugation with a ZX rescale for ZZ.

#include "ecr/calibration.hpp"

namespace ecr {

class UndefinedAngle : public Error {
 public:
  using Error::Error;
};

/// theta_c = -Omega_IZ * duration, the negated IZ phase accumulated over one segment.
double iz_correction_angle(const EffectiveHamiltonian& h, double pulse_duration);

/// First-order CR phase shift cancelling the ZY generated when Z(theta_c) follows ZX
/// (BCH: the conditional axis tilts by theta_c / 2).
double zy_phase_fix(const EffectiveHamiltonian& h, double theta_c);

/// theta = atan(Omega_ZZ / Omega_ZX). Throws UndefinedAngle when Omega_ZX = 0.
double zz_compensation_angle(const EffectiveHamiltonian& h);

/// Omega_ZX / sqrt(Omega_ZX^2 + Omega_ZZ^2).
double zx_rescale_factor(const EffectiveHamiltonian& h);
/// Folds the factor into corrections.zx_rescale (the effective CR and cancellation
/// amplitudes are the calibrated ones times zx_rescale).
CRPulseConfig rescale_zx_amplitude(CRPulseConfig cfg, const EffectiveHamiltonian& h);

/// ZZ compensation pays off when its EPG exceeds 1.5x the incoherent cost of the
/// added Y pulses.
bool zz_compensation_worthwhile(double zz_epg, double marginal_incoherent_epg);

/// Gate tomography of one corrected CR(+) segment.
GateTomography segment_tomography(const PairSimulator& sim, const CRPulseConfig& cfg,
                                  const SingleQubitGateConfig& target_sx);

struct CorrectionOptions {
  bool compensate_zz = false;
  double angle_tolerance = 1e-5;  // rad, on each residual segment angle
  int max_rounds = 12;
};

/// Closed-loop corrections. Without existing corrections the first-order values from the
/// bare pulse seed the loop; otherwise the current ones do. Each round refits the
/// corrected segment and removes the residual IZ angle (theta_c), ZY (drive phase),
/// ZZ (secant on the Y angle) and conditional-angle error (rescale).
CRPulseConfig calibrate_corrections(const PairSimulator& sim, CRPulseConfig cfg, const SingleQubitGates& sq,
                                    const CorrectionOptions& opt = {});

}  // namespace ecr
