#include "ecr/hilbert.hpp"

#include <Eigen/Eigenvalues>

namespace ecr {

void QuantumState::validate(double tol) const {
  if (is_pure()) {
    const double norm = vector().norm();
    if (std::abs(norm - 1.0) > tol) throw InvalidArgument("state vector is not normalized");
    return;
  }
  const auto& rho = std::get<DensityMatrix>(repr_);
  if (std::abs(rho.trace() - 1.0) > tol) throw InvalidArgument("density matrix trace differs from 1");
  if (hermiticity_error(rho) > tol) throw InvalidArgument("density matrix is not Hermitian");
  if (min_eigenvalue(rho) < -tol) throw InvalidArgument("density matrix has a negative eigenvalue");
}

QutritMatrix partial_trace(const DensityMatrix& rho, Qubit keep) {
  QutritMatrix out = QutritMatrix::Zero();
  for (int i = 0; i < kLevels; ++i) {
    for (int j = 0; j < kLevels; ++j) {
      cplx acc = 0.0;
      for (int s = 0; s < kLevels; ++s) {
        acc += keep == Qubit::control ? rho(3 * i + s, 3 * j + s) : rho(3 * s + i, 3 * s + j);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

BlochVector bloch_vector(const QutritMatrix& reduced) {
  const Matrix2c block = reduced.topLeftCorner<2, 2>();
  BlochVector b;
  b.x = (pauli::x() * block).trace().real();
  b.y = (pauli::y() * block).trace().real();
  b.z = (pauli::z() * block).trace().real();
  b.leak = reduced(2, 2).real();
  return b;
}

double min_eigenvalue(const DensityMatrix& rho) {
  const DensityMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DensityMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace ecr
