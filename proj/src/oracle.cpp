#include "rms/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace rms {

namespace {

double spectral_radius(const Eigen::MatrixXd& f) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(f, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double fixed_point_residual(const Eigen::MatrixXd& m, const Eigen::MatrixXd& f, double h) {
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  const double num = (m - f * m * f.transpose() - h * identity).norm();
  return num / m.norm();
}

}  // namespace

StationaryCovariance solve_stationary_covariance(const Eigen::MatrixXd& q, double h) {
  if (q.rows() != q.cols() || q.rows() < 1)
    throw std::invalid_argument("solve_stationary_covariance: drift matrix must be square");
  if (h <= 0.0) throw std::invalid_argument("solve_stationary_covariance: h must be positive");

  const Eigen::Index d = q.rows();
  const Eigen::MatrixXd f = Eigen::MatrixXd::Identity(d, d) - q * h;
  const double rho = spectral_radius(f);
  if (rho >= 1.0)
    throw InstabilityError("no stationary covariance: spectral radius of I - Qh is " +
                           std::to_string(rho) + " >= 1");

  Eigen::MatrixXd m(d, d);
  if (d <= 50) {
    // Vectorize: (I - F (x) F) vec(M) = h vec(I), with (x) the Kronecker product.
    const Eigen::Index n = d * d;
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = 0; k < d; ++k)
          for (Eigen::Index l = 0; l < d; ++l)
            system(i * d + k, j * d + l) -= f(i, j) * f(k, l);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < d; ++i) rhs[i * d + i] = h;
    const Eigen::VectorXd sol = system.partialPivLu().solve(rhs);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index k = 0; k < d; ++k) m(i, k) = sol[i * d + k];
  } else {
    // Fixed-point iteration, linear convergence at rate rho^2.
    m = h * Eigen::MatrixXd::Identity(d, d);
    for (int iter = 0; iter < 200000; ++iter) {
      const Eigen::MatrixXd next = f * m * f.transpose() + h * Eigen::MatrixXd::Identity(d, d);
      const double change = (next - m).norm() / next.norm();
      m = next;
      if (change < 1e-15) break;
    }
  }
  m = 0.5 * (m + m.transpose().eval());

  StationaryCovariance cov;
  cov.m = m;
  cov.residual = fixed_point_residual(m, f, h);
  return cov;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double gamma_oracle(const StationaryCovariance& cov, double u) {
  const double m11 = cov.m(0, 0);
  if (m11 <= 0.0) throw std::invalid_argument("gamma_oracle: M11 must be positive");
  return normal_cdf(-u / std::sqrt(m11));
}

double invert_gamma(const StationaryCovariance& cov, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("invert_gamma: gamma must lie in (0, 1)");
  const double sigma = std::sqrt(cov.m(0, 0));
  double lo = -40.0 * sigma;  // gamma_oracle(lo) ~ 1
  double hi = 40.0 * sigma;   // gamma_oracle(hi) ~ 0
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_oracle(cov, mid) > gamma)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::function<State(RngStream&)> stationary_sampler(const StationaryCovariance& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov.m);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("stationary_sampler: covariance is not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();
  const Eigen::Index d = cov.m.rows();
  return [chol, d](RngStream& rng) {
    State z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.gaussian();
    return State(chol * z);
  };
}

}  // namespace rms
