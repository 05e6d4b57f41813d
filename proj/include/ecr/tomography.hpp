#pragma once

// Effective-Hamiltonian tomography of cross-resonance dynamics.
//
//   H = sum_P Omega_P / 2 * P,  P in {IX, IY, IZ, ZI, ZX, ZY, ZZ}   (rad/ns)
//
// With the control in |k>, the target precesses with angular velocity
// w_k = (Omega_IX +- Omega_ZX, Omega_IY +- Omega_ZY, Omega_IZ +- Omega_ZZ), "+" for
// |0> and "-" for |1>. Omega_ZI only shifts the relative phase of the two control
// blocks and is read from the block phases.

#include <array>
#include <string>
#include <vector>

#include "ecr/gates.hpp"

namespace ecr {

enum class Term { ix, iy, iz, zi, zx, zy, zz };

const char* to_string(Term t);
Term term_from_string(const std::string& s);
inline constexpr std::array<Term, 7> kAllTerms = {Term::ix, Term::iy, Term::iz, Term::zi,
                                                  Term::zx, Term::zy, Term::zz};

struct EffectiveHamiltonian {
  double omega_ix = 0, omega_iy = 0, omega_iz = 0, omega_zi = 0, omega_zx = 0, omega_zy = 0, omega_zz = 0;

  double& operator[](Term t);
  double operator[](Term t) const;
  /// sum_P Omega_P/2 P on the qubit space.
  Matrix4c matrix() const;
  /// Target angular velocity with the control in |k>.
  Eigen::Vector3d block_rate(int control_state) const;
};

/// Hamiltonian of the echo partner CR(-): the terms linear in the drive flip sign.
EffectiveHamiltonian echo_partner(const EffectiveHamiltonian& h);

/// Target preparations: |0>, |+>, |+i> (their ideal Bloch vectors are z, x, y).
inline constexpr int kPreparations = 3;

struct BlochTrajectory {
  std::vector<double> durations;  // flat lengths, ns
  int control_init = 0;
  /// points[p][i]: target Bloch vector after durations[i] for preparation p.
  std::array<std::vector<BlochVector>, kPreparations> points;
  /// Optional images of the antipodal preparations |1>, |->, |-i>. When present the
  /// fit uses the linear part (m_p - m_-p)/2, which drops any state-independent
  /// offset and keeps the fit exactly covariant under target frame shifts.
  std::array<std::vector<BlochVector>, kPreparations> antipodes;
  /// -arg(det) / 2 of the target block for this control state, per duration.
  std::vector<double> block_phase;
};

/// Simulates the CR pulse of `cfg` with its flat top set to each duration and records
/// exact target expectation values. `noisy` switches to Lindblad evolution.
BlochTrajectory measure_bloch_trajectories(const PairSimulator& sim, const CRPulseConfig& cfg,
                                           const std::vector<double>& durations, int control_init,
                                           bool noisy = false);

/// Forward model: trajectories generated by a constant effective Hamiltonian.
BlochTrajectory synthetic_trajectory(const EffectiveHamiltonian& h, const std::vector<double>& durations,
                                     int control_init);

struct HamiltonianFit {
  EffectiveHamiltonian rates;
  std::array<Eigen::Vector3d, 2> block_rates;  // fitted w_0, w_1
  double residual_rms = 0;
  /// False when the residual points at dynamics outside the block-diagonal model
  /// (typically control leakage).
  bool block_diagonal = true;
};

/// Fits R_k(d) = exp([w_k]x d) C_k to each control block and combines the rates.
HamiltonianFit fit_effective_hamiltonian(const BlochTrajectory& traj0, const BlochTrajectory& traj1,
                                         double residual_threshold = 2e-3);

/// Tomography of a complete (possibly corrected) segment. The rotation vectors v_k of
/// the two target blocks and their phases define the constant Hamiltonian that would
/// produce the same gate over the segment duration.
struct GateTomography {
  Eigen::Vector3d v0 = Eigen::Vector3d::Zero();
  Eigen::Vector3d v1 = Eigen::Vector3d::Zero();
  double phi0 = 0, phi1 = 0;
  double duration = 0;  // ns
  double leakage = 0;   // max population lost from the computational block

  EffectiveHamiltonian rates() const;
  /// ZX rotation angle of the segment (pi/4 for a calibrated pulse).
  double conditional_angle() const { return 0.5 * (v0.x() - v1.x()); }
};

GateTomography gate_tomography(const PairSimulator& sim, const Schedule& segment);

/// Unitary effective ECR: exp(-i H_minus T) (X kron I) exp(-i H_plus T).
Matrix4c effective_ecr(const EffectiveHamiltonian& plus, const EffectiveHamiltonian& minus, double segment_duration);

/// EPG attributed to one term: 1 - F_avg between the effective ECR with all terms and
/// with that term zeroed in both segments.
double term_epg(const EffectiveHamiltonian& plus, const EffectiveHamiltonian& minus, Term term,
                double segment_duration);
/// Same, with CR(-) derived from CR(+) by echo_partner.
double term_epg(const EffectiveHamiltonian& h, Term term, double segment_duration);

/// Rotation helpers shared by the fits.
Eigen::Matrix3d rotation_from_vector(const Eigen::Vector3d& v);
Eigen::Vector3d rotation_vector(const Eigen::Matrix3d& r);
/// Closest rotation to the map taking ideal preparation vectors to the measured ones.
Eigen::Matrix3d kabsch_rotation(const Eigen::Vector3d& image_x, const Eigen::Vector3d& image_y,
                                const Eigen::Vector3d& image_z);

}  // namespace ecr
