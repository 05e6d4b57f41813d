#pragma once

// Dense operator algebra on the two-qutrit space.
//
// Basis ordering is |c,t> -> 3*c + t (control major, target minor). Qubit-level
// objects (2x2 / 4x4) use the same convention with 2*c + t.

#include <array>
#include <cmath>
#include <variant>

#include "ecr/types.hpp"

namespace ecr {

namespace pauli {
template <typename Scalar = double>
Eigen::Matrix<std::complex<Scalar>, 2, 2> identity() {
  return Eigen::Matrix<std::complex<Scalar>, 2, 2>::Identity();
}
template <typename Scalar = double>
Eigen::Matrix<std::complex<Scalar>, 2, 2> x() {
  Eigen::Matrix<std::complex<Scalar>, 2, 2> m;
  m << 0, 1, 1, 0;
  return m;
}
template <typename Scalar = double>
Eigen::Matrix<std::complex<Scalar>, 2, 2> y() {
  using C = std::complex<Scalar>;
  Eigen::Matrix<C, 2, 2> m;
  m << C(0), C(0, -1), C(0, 1), C(0);
  return m;
}
template <typename Scalar = double>
Eigen::Matrix<std::complex<Scalar>, 2, 2> z() {
  Eigen::Matrix<std::complex<Scalar>, 2, 2> m;
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

/// Qutrit index of the computational basis state with qubit index 2*c + t.
inline constexpr int qutrit_index(int qubit_index) { return 3 * (qubit_index / 2) + qubit_index % 2; }

template <typename Scalar = double>
QutritMatrixT<Scalar> annihilation_operator(int levels = kLevels) {
  if (levels != kLevels) throw InvalidArgument("annihilation_operator: model is fixed at 3 levels");
  QutritMatrixT<Scalar> a = QutritMatrixT<Scalar>::Zero();
  for (int n = 1; n < kLevels; ++n) a(n - 1, n) = std::sqrt(static_cast<Scalar>(n));
  return a;
}

template <typename Scalar = double>
QutritMatrixT<Scalar> number_operator() {
  QutritMatrixT<Scalar> n = QutritMatrixT<Scalar>::Zero();
  for (int k = 0; k < kLevels; ++k) n(k, k) = static_cast<Scalar>(k);
  return n;
}

/// Lifts a single-transmon operator to the pair space.
template <typename Scalar>
OperatorT<Scalar> embed_qutrit_operator(const QutritMatrixT<Scalar>& op, Qubit subsystem) {
  OperatorT<Scalar> out = OperatorT<Scalar>::Zero();
  for (int i = 0; i < kLevels; ++i) {
    for (int j = 0; j < kLevels; ++j) {
      for (int s = 0; s < kLevels; ++s) {
        if (subsystem == Qubit::control) {
          out(3 * i + s, 3 * j + s) = op(i, j);
        } else {
          out(3 * s + i, 3 * s + j) = op(i, j);
        }
      }
    }
  }
  return out;
}

/// Acts as `op2x2` on the {|0>,|1>} block of `subsystem` and as the identity on the
/// other subsystem's qubit block. Every matrix element touching a |2> is zero.
template <typename Scalar>
OperatorT<Scalar> embed_qubit_operator(const Eigen::Matrix<std::complex<Scalar>, 2, 2>& op2x2,
                                       Qubit subsystem) {
  OperatorT<Scalar> out = OperatorT<Scalar>::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int s = 0; s < 2; ++s) {
        if (subsystem == Qubit::control) {
          out(3 * i + s, 3 * j + s) = op2x2(i, j);
        } else {
          out(3 * s + i, 3 * s + j) = op2x2(i, j);
        }
      }
    }
  }
  return out;
}

/// Places a 4x4 qubit-space operator on the computational block; |2>-involving rows
/// and columns are filled with `leak_fill` on the diagonal (0 or 1).
template <typename Scalar>
OperatorT<Scalar> embed_two_qubit_operator(const Eigen::Matrix<std::complex<Scalar>, 4, 4>& op,
                                           Scalar leak_fill = Scalar(0)) {
  OperatorT<Scalar> out = OperatorT<Scalar>::Zero();
  for (int i = 0; i < kDim; ++i) {
    if (i / 3 == 2 || i % 3 == 2) out(i, i) = leak_fill;
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(qutrit_index(i), qutrit_index(j)) = op(i, j);
  return out;
}

/// Restriction of a pair-space operator to the computational block.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, 4, 4> qubit_block(const OperatorT<Scalar>& op) {
  Eigen::Matrix<std::complex<Scalar>, 4, 4> out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) = op(qutrit_index(i), qutrit_index(j));
  return out;
}

template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, 4, 4> kron2(const Eigen::Matrix<std::complex<Scalar>, 2, 2>& a,
                                               const Eigen::Matrix<std::complex<Scalar>, 2, 2>& b) {
  Eigen::Matrix<std::complex<Scalar>, 4, 4> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.template block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

/// Frame rotation exp(i*angle*n) on one transmon: diag(1, e^{i angle}, e^{2 i angle}).
/// On the qubit block this is R_z(angle) up to a global phase.
template <typename Scalar = double>
OperatorT<Scalar> z_rotation(Qubit subsystem, Scalar angle) {
  QutritMatrixT<Scalar> d = QutritMatrixT<Scalar>::Zero();
  for (int n = 0; n < kLevels; ++n) d(n, n) = std::polar(Scalar(1), angle * n);
  return embed_qutrit_operator<Scalar>(d, subsystem);
}

/// max |U^dagger U - I|.
template <typename Derived>
double unitarity_error(const Eigen::MatrixBase<Derived>& u) {
  const auto n = u.rows();
  return (u.adjoint() * u - Derived::Identity(n, n)).cwiseAbs().maxCoeff();
}

/// max |A - A^dagger|.
template <typename Derived>
double hermiticity_error(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Average gate fidelity of a (possibly leaky, non-unitary) qubit-block map `actual`
/// against the unitary `ideal`, in a d-dimensional space.
template <typename Derived1, typename Derived2>
double average_gate_fidelity(const Eigen::MatrixBase<Derived1>& ideal,
                             const Eigen::MatrixBase<Derived2>& actual) {
  const double d = static_cast<double>(ideal.rows());
  const auto m = (ideal.adjoint() * actual).eval();
  const double overlap = std::norm(m.trace());
  const double norm = (m * m.adjoint()).trace().real();
  return (norm + overlap) / (d * (d + 1.0));
}

/// |Tr(V^dagger U)/d|^2 for unitaries V, U.
template <typename Derived1, typename Derived2>
double process_fidelity(const Eigen::MatrixBase<Derived1>& ideal, const Eigen::MatrixBase<Derived2>& actual) {
  const double d = static_cast<double>(ideal.rows());
  return std::norm((ideal.adjoint() * actual).trace()) / (d * d);
}

/// Pure vector or density matrix on the pair space.
class QuantumState {
 public:
  explicit QuantumState(const StateVector& psi) : repr_(psi) {}
  explicit QuantumState(const DensityMatrix& rho) : repr_(rho) {}

  /// Product state |control_level, target_level>.
  static QuantumState basis(int control_level, int target_level) {
    StateVector psi = StateVector::Zero();
    psi(3 * control_level + target_level) = 1.0;
    return QuantumState(psi);
  }

  bool is_pure() const { return std::holds_alternative<StateVector>(repr_); }
  const StateVector& vector() const { return std::get<StateVector>(repr_); }

  DensityMatrix density() const {
    if (is_pure()) {
      const auto& psi = vector();
      return psi * psi.adjoint();
    }
    return std::get<DensityMatrix>(repr_);
  }

  /// Throws if the state is not normalized / Hermitian / positive within tolerance.
  void validate(double tol = 1e-10) const;

 private:
  std::variant<StateVector, DensityMatrix> repr_;
};

/// Reduced 3x3 density matrix of the kept subsystem.
QutritMatrix partial_trace(const DensityMatrix& rho, Qubit keep);
inline QutritMatrix partial_trace(const QuantumState& state, Qubit keep) {
  return partial_trace(state.density(), keep);
}

/// Target-qubit observable used by tomography: Pauli expectations on the
/// (unnormalized) qubit block, plus |2> population.
struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double leak = 0.0;

  Eigen::Vector3d xyz() const { return {x, y, z}; }
};

BlochVector bloch_vector(const QutritMatrix& reduced);

/// Minimum eigenvalue of a Hermitian matrix (positivity checks).
double min_eigenvalue(const DensityMatrix& rho);

}  // namespace ecr
