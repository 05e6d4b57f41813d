#pragma once

// Small nonlinear least-squares front end over Eigen's Levenberg-Marquardt.

#include <functional>

#include <Eigen/Dense>

namespace ecr {

struct LeastSquaresResult {
  Eigen::VectorXd x;
  Eigen::MatrixXd covariance;  // s^2 (J^T J)^-1 with s^2 = rss / (m - n)
  double rss = 0;
  int status = 0;  // Eigen LM status code
  bool converged = false;
};

using ResidualFunction = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& residual)>;

/// Minimizes |r(x)|^2 from x0 with central-difference Jacobians.
LeastSquaresResult least_squares(const ResidualFunction& residual, const Eigen::VectorXd& x0, int n_residuals,
                                 double tol = 1e-12, int max_evaluations = 4000);

}  // namespace ecr
