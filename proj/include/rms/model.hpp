#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>

#include "rms/errors.hpp"
#include "rms/rng.hpp"

namespace rms {

using State = Eigen::VectorXd;

enum class ModelKind { Ou1d, Ou, OuSpiral, Franzke, Custom };

// Coefficients of the four-dimensional climate toy model: two slow
// coordinates (indices 0, 1) driven by quadratic energy-conserving terms and
// two fast noisy coordinates (indices 2, 3). Defaults match the published
// parameter set.
struct FranzkeParams {
  double mu = 1.0;
  double eps = 0.2;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double sigma1 = 3.0;
  double sigma2 = 1.0;
  double b123 = 4.0;    // B^1_123
  double b213 = 4.0;    // B^1_213
  double b312 = -8.0;   // B^1_312
  double b131 = 0.25;   // B^2_131
  double b113 = 0.25;   // B^2_113
  double b311 = -0.5;   // B^2_311
  double b242 = -0.3;   // B^3_242
  double b224 = -0.4;   // B^3_224
  double b422 = 0.7;    // B^3_422
  double l12 = 1.0;
  double l21 = -1.0;
  double l13 = -0.2;
  double l24 = 0.2;
  double a1 = 1.0;
  double a2 = -1.0;
  double d1 = -0.2;
  double d2 = -0.1;
  Eigen::Vector4d forcing{-0.25, 0.0, 0.0, 0.0};
};

// One observed transition of a user-supplied chain.
using StepKernel = std::function<State(const State&, RngStream&)>;

// Discrete-time Markov kernel under study. Built-in kinds are explicit-Euler
// discretizations of SDEs with integration step h0; states are stored every
// `stride` substeps, so one observed transition covers stride * h0 time
// units. Immutable after construction and shareable across threads.
class ModelSpec {
 public:
  static ModelSpec ou1d(double q, double h0, int stride = 1);
  static ModelSpec ou(const Eigen::MatrixXd& q, double h0, int stride = 1);
  static ModelSpec ou_spiral(double theta, double h0, int stride = 1);
  static ModelSpec franzke(double h0 = 1e-4, int stride = 100, const FranzkeParams& p = {});
  static ModelSpec custom(int dimension, StepKernel kernel);

  ModelKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  double h0() const { return h0_; }
  int stride() const { return stride_; }
  double observed_step() const { return h0_ * stride_; }
  const Eigen::MatrixXd& drift() const { return drift_; }
  double theta() const { return theta_; }
  const FranzkeParams& franzke_params() const { return franzke_; }

  // Linear substep map I - Q h0 (OU kinds only).
  const Eigen::MatrixXd& substep_map() const { return substep_map_; }

  State step(const State& x, RngStream& rng) const;

  // Allocation-free variant for hot loops; same draws, same result.
  void step_inplace(State& x, RngStream& rng) const;

 private:
  ModelSpec() = default;

  ModelKind kind_ = ModelKind::Custom;
  int dimension_ = 0;
  double h0_ = 0.0;
  int stride_ = 1;
  double sqrt_h0_ = 0.0;
  Eigen::MatrixXd drift_;        // Q for OU kinds
  Eigen::MatrixXd substep_map_;  // I - Q h0
  double theta_ = 0.0;
  FranzkeParams franzke_;
  StepKernel kernel_;
};

// Drift matrix with purely imaginary off-diagonal coupling; rows (1, theta)
// and (-theta, 1). Its eigenvalues are 1 +- i*theta, which makes the paths
// rotate around the origin.
Eigen::MatrixXd spiral_drift(double theta);

// Deterministic pseudo-random d x d drift matrix with all eigenvalues real
// and in [0.5, 2.0]: Q = V diag(lambda) V^-1 with V = I + 0.3 R, entries of
// R uniform on [-1, 1] from the given seed.
Eigen::MatrixXd real_eigen_drift(int d, std::uint64_t seed);

// Applies `n_steps` observed transitions, invoking `observer(state, index)`
// after each one. Returns the final state; adds n_steps to *workload when
// given. Step errors are rethrown with the failing step index attached.
template <class Observer>
State simulate_path(const ModelSpec& model, State x, std::int64_t n_steps, RngStream& rng,
                    Observer&& observer, std::uint64_t* workload = nullptr) {
  for (std::int64_t i = 0; i < n_steps; ++i) {
    try {
      model.step_inplace(x, rng);
    } catch (const ModelInstabilityError& e) {
      throw ModelInstabilityError(e.coordinate(), i,
                                  std::string(e.what()) + " at path step " + std::to_string(i));
    }
    observer(static_cast<const State&>(x), i);
  }
  if (workload != nullptr) *workload += static_cast<std::uint64_t>(n_steps);
  return x;
}

inline State simulate_path(const ModelSpec& model, State x, std::int64_t n_steps, RngStream& rng,
                           std::uint64_t* workload = nullptr) {
  return simulate_path(model, std::move(x), n_steps, rng, [](const State&, std::int64_t) {},
                       workload);
}

}  // namespace rms
