#include "ecr/fitting.hpp"

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace ecr {

namespace {

struct Functor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const ResidualFunction* f;
  int n_in;
  int n_out;

  int inputs() const { return n_in; }
  int values() const { return n_out; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    r.resize(n_out);
    (*f)(x, r);
    return 0;
  }
};

}  // namespace

LeastSquaresResult least_squares(const ResidualFunction& residual, const Eigen::VectorXd& x0, int n_residuals,
                                 double tol, int max_evaluations) {
  const int n = static_cast<int>(x0.size());
  Functor functor{&residual, n, n_residuals};
  Eigen::NumericalDiff<Functor, Eigen::Central> diff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor, Eigen::Central>, double> lm(diff);
  lm.parameters.xtol = tol;
  lm.parameters.ftol = tol;
  lm.parameters.maxfev = max_evaluations;

  LeastSquaresResult out;
  out.x = x0;
  out.status = lm.minimize(out.x);
  out.converged = out.status >= 1 && out.status <= 4;

  Eigen::VectorXd r(n_residuals);
  residual(out.x, r);
  out.rss = r.squaredNorm();
  Eigen::MatrixXd jac(n_residuals, n);
  diff.df(out.x, jac);
  const double dof = std::max(1, n_residuals - n);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  out.covariance = (out.rss / dof) * jtj.completeOrthogonalDecomposition().pseudoInverse();
  return out;
}

}  // namespace ecr
