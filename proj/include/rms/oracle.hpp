#pragma once

#include <Eigen/Dense>
#include <functional>

#include "rms/errors.hpp"
#include "rms/model.hpp"
#include "rms/rng.hpp"

namespace rms {

// Stationary covariance M of the Euler-discretized OU recursion, the fixed
// point of M = (I - Qh) M (I - Qh)^T + h I. Symmetric positive definite.
struct StationaryCovariance {
  Eigen::MatrixXd m;
  double residual = 0.0;  // relative Frobenius residual of the fixed point
};

// Solves the discrete Lyapunov fixed point. Dense Kronecker solve for
// d <= 50, fixed-point iteration beyond. Throws InstabilityError when the
// substep map I - Qh has spectral radius >= 1.
StationaryCovariance solve_stationary_covariance(const Eigen::MatrixXd& q, double h);

// Standard normal cdf through erfc; keeps full relative accuracy deep in
// the tail, where absolute accuracy 1e-15 comes for free.
double normal_cdf(double x);

// Stationary exceedance probability of the first coordinate: Phi(-u / sqrt(M11)).
double gamma_oracle(const StationaryCovariance& cov, double u);

// Threshold u with gamma_oracle(cov, u) == gamma, bisection on the monotone
// tail to relative accuracy better than 1e-9.
double invert_gamma(const StationaryCovariance& cov, double gamma);

// Exact sampler from the stationary Gaussian law N(0, M), for the
// exact-sampling alpha estimator and oracle cross-checks.
std::function<State(RngStream&)> stationary_sampler(const StationaryCovariance& cov);

}  // namespace rms
