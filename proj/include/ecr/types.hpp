#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ecr {

using cplx = std::complex<double>;

/// Levels kept per transmon. The model is fixed at |0>, |1>, |2>.
inline constexpr int kLevels = 3;
/// Dimension of the two-transmon space, basis index 3*control + target.
inline constexpr int kDim = kLevels * kLevels;

template <typename Scalar>
using OperatorT = Eigen::Matrix<std::complex<Scalar>, kDim, kDim>;
template <typename Scalar>
using StateVectorT = Eigen::Matrix<std::complex<Scalar>, kDim, 1>;
template <typename Scalar>
using QutritMatrixT = Eigen::Matrix<std::complex<Scalar>, kLevels, kLevels>;

using Operator = OperatorT<double>;
using StateVector = StateVectorT<double>;
using DensityMatrix = Operator;
using QutritMatrix = QutritMatrixT<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
/// Liouville-space superoperator acting on column-stacked 9x9 density matrices.
using Superoperator = Eigen::MatrixXcd;

enum class Qubit { control, target };

inline const char* to_string(Qubit q) { return q == Qubit::control ? "control" : "target"; }

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Frequencies are carried in GHz/MHz at interfaces and as angular rad/ns internally.
inline constexpr double ghz_to_rad_per_ns(double ghz) { return kTwoPi * ghz; }
inline constexpr double mhz_to_rad_per_ns(double mhz) { return kTwoPi * mhz * 1e-3; }
inline constexpr double rad_per_ns_to_mhz(double w) { return w / kTwoPi * 1e3; }

/// Base class for recoverable errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace ecr
