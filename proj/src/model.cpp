#include "rms/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rms {

namespace {

void check_finite(const State& x) {
  if (x.allFinite()) return;
  int coord = 0;
  for (int i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      coord = i;
      break;
    }
  }
  throw ModelInstabilityError(coord, -1,
                              "model produced a non-finite value in coordinate " +
                                  std::to_string(coord));
}

}  // namespace

Eigen::MatrixXd spiral_drift(double theta) {
  Eigen::MatrixXd q(2, 2);
  q << 1.0, theta, -theta, 1.0;
  return q;
}

Eigen::MatrixXd real_eigen_drift(int d, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("real_eigen_drift: dimension must be positive");
  RngStream rng(seed, 0x51f7);
  Eigen::VectorXd eigenvalues(d);
  for (int i = 0; i < d; ++i) eigenvalues[i] = 0.5 + 1.5 * rng.uniform01();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) v(i, j) += 0.3 * (2.0 * rng.uniform01() - 1.0);
  return v * eigenvalues.asDiagonal() * v.inverse();
}

ModelSpec ModelSpec::ou(const Eigen::MatrixXd& q, double h0, int stride) {
  if (q.rows() != q.cols() || q.rows() < 1)
    throw std::invalid_argument("ou model: drift matrix must be square");
  if (h0 <= 0.0) throw std::invalid_argument("ou model: h0 must be positive");
  if (stride < 1) throw std::invalid_argument("ou model: stride must be >= 1");
  ModelSpec m;
  m.kind_ = ModelKind::Ou;
  m.dimension_ = static_cast<int>(q.rows());
  m.h0_ = h0;
  m.stride_ = stride;
  m.sqrt_h0_ = std::sqrt(h0);
  m.drift_ = q;
  m.substep_map_ = Eigen::MatrixXd::Identity(q.rows(), q.cols()) - q * h0;
  return m;
}

ModelSpec ModelSpec::ou1d(double q, double h0, int stride) {
  Eigen::MatrixXd drift(1, 1);
  drift << q;
  ModelSpec m = ou(drift, h0, stride);
  m.kind_ = ModelKind::Ou1d;
  return m;
}

ModelSpec ModelSpec::ou_spiral(double theta, double h0, int stride) {
  ModelSpec m = ou(spiral_drift(theta), h0, stride);
  m.kind_ = ModelKind::OuSpiral;
  m.theta_ = theta;
  return m;
}

ModelSpec ModelSpec::franzke(double h0, int stride, const FranzkeParams& p) {
  if (h0 <= 0.0) throw std::invalid_argument("franzke model: h0 must be positive");
  if (stride < 1) throw std::invalid_argument("franzke model: stride must be >= 1");
  ModelSpec m;
  m.kind_ = ModelKind::Franzke;
  m.dimension_ = 4;
  m.h0_ = h0;
  m.stride_ = stride;
  m.sqrt_h0_ = std::sqrt(h0);
  m.franzke_ = p;
  return m;
}

ModelSpec ModelSpec::custom(int dimension, StepKernel kernel) {
  if (dimension < 1) throw std::invalid_argument("custom model: dimension must be positive");
  if (!kernel) throw std::invalid_argument("custom model: kernel must be callable");
  ModelSpec m;
  m.kind_ = ModelKind::Custom;
  m.dimension_ = dimension;
  m.h0_ = 1.0;
  m.stride_ = 1;
  m.kernel_ = std::move(kernel);
  return m;
}

State ModelSpec::step(const State& x, RngStream& rng) const {
  State cur = x;
  step_inplace(cur, rng);
  return cur;
}

void ModelSpec::step_inplace(State& x, RngStream& rng) const {
  if (x.size() != dimension_)
    throw std::invalid_argument("step: state dimension " + std::to_string(x.size()) +
                                " does not match model dimension " + std::to_string(dimension_));
  switch (kind_) {
    case ModelKind::Ou1d:
    case ModelKind::Ou:
    case ModelKind::OuSpiral: {
      if (dimension_ == 1) {
        const double f = substep_map_(0, 0);
        double v = x[0];
        for (int s = 0; s < stride_; ++s) v = f * v + sqrt_h0_ * rng.gaussian();
        x[0] = v;
        check_finite(x);
        return;
      }
      thread_local State scratch;
      scratch.resize(dimension_);
      for (int s = 0; s < stride_; ++s) {
        scratch.noalias() = substep_map_ * x;
        for (int i = 0; i < dimension_; ++i) scratch[i] += sqrt_h0_ * rng.gaussian();
        x.swap(scratch);
      }
      check_finite(x);
      return;
    }
    case ModelKind::Franzke: {
      const FranzkeParams& p = franzke_;
      const double noise1 = p.sigma1 / std::sqrt(p.eps) * sqrt_h0_;
      const double noise2 = p.sigma2 / std::sqrt(p.eps) * sqrt_h0_;
      double x1 = x[0], x2 = x[1], y1 = x[2], y2 = x[3];
      for (int s = 0; s < stride_; ++s) {
        const double quad = p.l12 + p.a1 * x1 + p.a2 * x2;
        const double dx1 = p.mu * (-x2 * quad + p.d1 * x1 + p.forcing[0] + p.l13 * y1 +
                                   p.b123 * x2 * y1 + (p.b131 + p.b113) * x1 * y1);
        const double dx2 = p.mu * (x1 * (p.l21 + p.a1 * x1 + p.a2 * x2) + p.d2 * x2 +
                                   p.forcing[1] + p.l24 * y2 + p.b213 * x1 * y1 +
                                   (p.b242 + p.b224) * x2 * y2);
        const double dy1 = p.mu * (-p.l13 * x1 + p.b312 * x1 * x2 + p.b311 * x1 * x1 +
                                   p.forcing[2] - p.gamma1 / p.eps * y1);
        const double dy2 = p.mu * (-p.l24 * x2 + p.b422 * x2 * x2 + p.forcing[3] -
                                   p.gamma2 / p.eps * y2);
        x1 += h0_ * dx1;
        x2 += h0_ * dx2;
        y1 += h0_ * dy1 + noise1 * rng.gaussian();
        y2 += h0_ * dy2 + noise2 * rng.gaussian();
      }
      x << x1, x2, y1, y2;
      check_finite(x);
      return;
    }
    case ModelKind::Custom: {
      x = kernel_(x, rng);
      check_finite(x);
      return;
    }
  }
  throw std::logic_error("step: unknown model kind");
}

}  // namespace rms
