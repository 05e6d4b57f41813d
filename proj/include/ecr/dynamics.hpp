#pragma once

// Driven two-transmon dynamics.
//
// Lab-frame model (hbar = 1, rad/ns):
//   H = sum_q [w_q n_q + (a_q/2) n_q (n_q - 1)] + J (a_c^dag a_t + a_c a_t^dag)
//       + sum_ch (1/2) (s_ch(t) e^{i(w_ch t - phi_ch)} a_q + h.c.)   (RWA)
//
// Integration runs in a frame rotating at one common frequency, chosen per step
// to match the carrier of the active drives, so that piecewise-constant samples
// give a piecewise-constant Hamiltonian. All results are reported in the
// "qubit frame": the dressed eigenbasis of the undriven pair, rotating at the
// dressed |10> and |01> frequencies, with accumulated virtual-Z frames applied.

#include <array>
#include <string>

#include "ecr/hilbert.hpp"
#include "ecr/pulses.hpp"

namespace ecr {

struct TransmonParams {
  double frequency_ghz = 4.4;
  double anharmonicity_mhz = -182.0;
  double t1_us = 69.0;
  double t2e_us = 103.0;

  void validate() const;
};

struct PairParams {
  std::string label = "pair";
  TransmonParams control;
  TransmonParams target;
  double j_mhz = 2.7;

  void validate() const;
  double detuning_mhz() const { return (control.frequency_ghz - target.frequency_ghz) * 1e3; }
  const TransmonParams& transmon(Qubit q) const { return q == Qubit::control ? control : target; }
};

/// Markovian relaxation and white dephasing, rates in 1/ns.
struct NoiseModel {
  std::array<double, 2> gamma1{0.0, 0.0};     // [control, target]
  std::array<double, 2> gamma_phi{0.0, 0.0};  // pure dephasing
  bool enabled = false;

  static NoiseModel none() { return {}; }
  /// Gamma1 = 1/T1, Gamma_phi = 1/T2e - 1/(2 T1), tiny negatives clamped to zero.
  static NoiseModel from_pair(const PairParams& pair);
};

class DegenerateAssignment : public Error {
 public:
  using Error::Error;
};

/// Static (undriven) Hamiltonian of a pair plus its dressed spectrum.
class PairModel {
 public:
  explicit PairModel(const PairParams& params);

  const PairParams& params() const { return params_; }

  /// Undriven Hamiltonian in a frame rotating at `frame_omega` for both transmons
  /// (bare basis, rad/ns).
  Operator static_hamiltonian(double frame_omega) const;
  /// (1/2)(coefficient a_q + conj(coefficient) a_q^dag).
  Operator drive_term(Qubit transmon, cplx coefficient) const;

  /// Columns are the dressed eigenvectors, ordered by the bare label they connect to.
  const Operator& dressed_basis() const { return dressed_; }
  /// Dressed lab-frame energy of |n,m> in rad/ns.
  double dressed_energy(int control_level, int target_level) const {
    return energies_(control_level, target_level) + w_frame_ * (control_level + target_level);
  }
  /// E11 - E10 - E01 + E00 in rad/ns.
  double zz_omega() const { return energies_(1, 1) - energies_(1, 0) - energies_(0, 1) + energies_(0, 0); }

  /// Dressed 0-1 angular frequency (qubit-frame reference) of `q`, rad/ns.
  double reference_omega(Qubit q) const;
  double reference_frequency_ghz(Qubit q) const { return reference_omega(q) / kTwoPi; }
  /// Dressed transition frequency between two levels of `q`, other transmon in |0>, GHz.
  double transition_frequency_ghz(Qubit q, int lower, int upper) const;

  const Operator& lowering(Qubit q) const { return q == Qubit::control ? a_c_ : a_t_; }
  const Operator& number(Qubit q) const { return q == Qubit::control ? n_c_ : n_t_; }

 private:
  PairParams params_;
  Operator a_c_, a_t_, n_c_, n_t_;
  Operator dressed_;
  Eigen::Matrix3d energies_;  // relative to a frame at w_frame_ on both transmons
  double w_frame_ = 0;
};

/// Builds the Hamiltonian description for a pair (validates the parameters).
PairModel build_hamiltonian(const PairParams& pair);

/// Static ZZ rate zeta = (E11 - E10 - E01 + E00)/h in kHz from exact diagonalization.
double static_zz_rate(const PairParams& pair);

/// Default integration step, ns.
inline constexpr double kDefaultDt = 0.25;

/// Ordered product of per-step exponentials; returns the 9x9 propagator in the qubit frame.
Operator propagate_unitary(const PairModel& model, const Schedule& schedule, double dt = kDefaultDt);

/// Lindblad evolution (Strang splitting of the dissipator around each unitary step)
/// of an initial qubit-frame state. With noise disabled this is exact unitary evolution.
DensityMatrix propagate_lindblad(const PairModel& model, const Schedule& schedule, const NoiseModel& noise,
                                 const QuantumState& initial, double dt = kDefaultDt);

/// The channel of the schedule as an 81x81 qubit-frame superoperator (column stacking).
Superoperator propagate_superoperator(const PairModel& model, const Schedule& schedule, const NoiseModel& noise,
                                      double dt = kDefaultDt);

/// vec(U rho U^dagger) = (conj(U) kron U) vec(rho).
Superoperator unitary_superoperator(const Operator& u);
/// Applies a superoperator to a density matrix.
DensityMatrix apply_superoperator(const Superoperator& s, const DensityMatrix& rho);

/// A pair plus its noise model and integration step; the object calibration,
/// tomography and benchmarking run "experiments" against.
class PairSimulator {
 public:
  explicit PairSimulator(const PairParams& params, double dt = kDefaultDt)
      : model_(build_hamiltonian(params)), noise_(NoiseModel::from_pair(params)), dt_(dt) {}

  const PairModel& model() const { return model_; }
  const PairParams& params() const { return model_.params(); }
  const NoiseModel& noise() const { return noise_; }
  double dt() const { return dt_; }

  Operator unitary(const Schedule& s) const { return propagate_unitary(model_, s, dt_); }
  DensityMatrix evolve(const Schedule& s, const QuantumState& initial, bool noisy) const {
    return propagate_lindblad(model_, s, noisy ? noise_ : NoiseModel::none(), initial, dt_);
  }
  Superoperator channel(const Schedule& s, bool noisy) const {
    return propagate_superoperator(model_, s, noisy ? noise_ : NoiseModel::none(), dt_);
  }

 private:
  PairModel model_;
  NoiseModel noise_;
  double dt_;
};

}  // namespace ecr
