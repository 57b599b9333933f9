#pragma once

// Three-state chain embedded on the line, small enough that every quantity
// the splitting estimators target has a closed linear-system form. State 0
// sits inside A = {x <= 0}, state 1 in the middle, state 2 inside the rare
// set B = {x >= 1}; the distance importance with u = 1 gives H = (0, 1/2, 1).
//
// Everything here is computed independently of the estimators under test:
// the stationary law from the transition matrix, reach probabilities and
// expected rare-set times from 3x3 linear solves, and exact estimator
// expectations by enumerating the splitting branching tree.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rms/model.hpp"
#include "rms/recurrency.hpp"

namespace toy {

struct ToyChain {
  Eigen::Matrix3d p;  // row-stochastic transition matrix
  std::array<double, 3> coord{-0.5, 0.5, 1.2};

  static ToyChain standard() {
    ToyChain t;
    t.p << 0.55, 0.40, 0.05,
           0.45, 0.30, 0.25,
           0.35, 0.35, 0.30;
    return t;
  }

  int index_of(double x) const {
    int best = 0;
    double dist = std::abs(x - coord[0]);
    for (int i = 1; i < 3; ++i) {
      const double d = std::abs(x - coord[i]);
      if (d < dist) {
        dist = d;
        best = i;
      }
    }
    return best;
  }

  rms::ModelSpec model() const {
    ToyChain self = *this;
    return rms::ModelSpec::custom(1, [self](const rms::State& x, rms::RngStream& rng) {
      const int i = self.index_of(x[0]);
      const double r = rng.uniform01();
      double acc = 0.0;
      int j = 2;
      for (int k = 0; k < 3; ++k) {
        acc += self.p(i, k);
        if (r <= acc) {
          j = k;
          break;
        }
      }
      rms::State out(1);
      out << self.coord[j];
      return out;
    });
  }

  rms::State state_of(int i) const {
    rms::State s(1);
    s << coord[i];
    return s;
  }

  bool in_a(int i) const { return coord[i] <= 0.0; }
  double importance(int i) const {
    const double x = coord[i];
    return x <= 0.0 ? 0.0 : (x >= 1.0 ? 1.0 : x);
  }

  // Stationary law: solve pi^T P = pi^T with the last equation replaced by
  // normalization.
  Eigen::Vector3d stationary() const {
    Eigen::Matrix3d sys = p.transpose() - Eigen::Matrix3d::Identity();
    sys.row(2) << 1.0, 1.0, 1.0;
    Eigen::Vector3d rhs(0.0, 0.0, 1.0);
    return sys.fullPivLu().solve(rhs);
  }

  // Exact frequency of recurrence P(X0 not in A, X1 in A) in stationarity.
  double alpha_exact() const {
    const Eigen::Vector3d pi = stationary();
    return pi[1] * p(1, 0) + pi[2] * p(2, 0);
  }

  // reach(s, e): probability that, starting from s, the first state with
  // importance >= level is e, before an inward crossing completes. Mirrors
  // the estimator semantics: a transition completing a crossing fails even
  // if its target clears the level (ties to failure), and a start at or
  // above the level succeeds in place.
  Eigen::Matrix3d reach_matrix(double level) const {
    Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
    std::array<bool, 3> transient{};
    for (int s = 0; s < 3; ++s) transient[s] = importance(s) < level;
    for (int e = 0; e < 3; ++e) {
      if (importance(e) < level) continue;
      Eigen::Matrix3d lhs = Eigen::Matrix3d::Identity();
      Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
      for (int s = 0; s < 3; ++s) {
        if (!transient[s]) continue;
        for (int d = 0; d < 3; ++d) {
          if (!in_a(s) && in_a(d)) continue;  // crossing: failure branch
          if (importance(d) >= level) {
            if (d == e) rhs[s] += p(s, d);
          } else {
            lhs(s, d) -= p(s, d);
          }
        }
      }
      const Eigen::Vector3d sol = lhs.fullPivLu().solve(rhs);
      for (int s = 0; s < 3; ++s)
        if (transient[s]) q(s, e) = sol[s];
    }
    for (int s = 0; s < 3; ++s)
      if (importance(s) >= level) q(s, s) = 1.0;
    return q;
  }

  // Expected time spent in B from `start` until an inward crossing
  // completes, counting the start itself when it lies in B.
  Eigen::Vector3d rare_time() const {
    Eigen::Matrix3d lhs = Eigen::Matrix3d::Identity();
    Eigen::Vector3d reward = Eigen::Vector3d::Zero();
    for (int s = 0; s < 3; ++s) {
      reward[s] = importance(s) >= 1.0 ? 1.0 : 0.0;
      for (int d = 0; d < 3; ++d) {
        if (!in_a(s) && in_a(d)) continue;  // crossing ends the count
        lhs(s, d) -= p(s, d);
      }
    }
    return lhs.fullPivLu().solve(reward);
  }

  // Cycle-level quantities from the in-A origin (state 0).
  double p_b_exact() const { return reach_matrix(1.0)(0, 2); }
  double t_b_exact() const { return rare_time()[0]; }

  struct TreeExpectation {
    double p_hat = 0.0;
    double t_hat = 0.0;
  };

  // Exact estimator expectations by backward recursion over the branching
  // tree: expected final-entrant counts and rare-set times propagate
  // linearly through the per-stage reach matrices. Valid for any depth.
  TreeExpectation expected_estimators(const std::vector<double>& levels,
                                      const std::vector<std::int64_t>& factors) const {
    const int m = static_cast<int>(levels.size());
    std::vector<Eigen::Matrix3d> reach;
    reach.reserve(static_cast<std::size_t>(m));
    for (double l : levels) reach.push_back(reach_matrix(l));
    const Eigen::Vector3d g = rare_time();

    double denom_p = 1.0;
    for (int k = 0; k < m; ++k)
      denom_p *= static_cast<double>(factors[static_cast<std::size_t>(k)]);
    const double denom_t = denom_p * static_cast<double>(factors[static_cast<std::size_t>(m)]);

    Eigen::Vector3d count = Eigen::Vector3d::Ones();
    Eigen::Vector3d timev = static_cast<double>(factors[static_cast<std::size_t>(m)]) * g;
    for (int k = m - 1; k >= 0; --k) {
      const double nk = static_cast<double>(factors[static_cast<std::size_t>(k)]);
      count = nk * (reach[static_cast<std::size_t>(k)] * count);
      timev = nk * (reach[static_cast<std::size_t>(k)] * timev);
    }
    TreeExpectation out;
    out.p_hat = count[0] / denom_p;
    out.t_hat = timev[0] / denom_t;
    return out;
  }

  // Brute-force enumeration for m = 2 over every realizable outcome: the
  // stage-0 entrance state, then the stage-1 success count per binomial law.
  // Final-stage contributions enter through the exact expected rare-set
  // time, the only unbounded part of the tree.
  TreeExpectation brute_force_m2(const std::vector<double>& levels,
                                 const std::vector<std::int64_t>& factors) const {
    const Eigen::Matrix3d reach0 = reach_matrix(levels[0]);
    const Eigen::Matrix3d reach1 = reach_matrix(levels[1]);
    const Eigen::Vector3d g = rare_time();
    const std::int64_t n1 = factors[1], n2 = factors[2];
    const double denom_p = static_cast<double>(factors[0] * n1);
    const double denom_t = denom_p * static_cast<double>(n2);

    auto binom_pmf = [](std::int64_t n, std::int64_t k, double q) {
      double c = 1.0;
      for (std::int64_t i = 0; i < k; ++i)
        c *= static_cast<double>(n - i) / static_cast<double>(i + 1);
      return c * std::pow(q, static_cast<double>(k)) *
             std::pow(1.0 - q, static_cast<double>(n - k));
    };

    TreeExpectation out;
    for (int e = 0; e < 3; ++e) {  // stage-0 entrance (or failure, weight 0)
      const double w0 = reach0(0, e);
      if (w0 == 0.0) continue;
      const double q1 = reach1(e, 2);  // only state 2 clears level 1
      for (std::int64_t k = 0; k <= n1; ++k) {
        const double w = w0 * binom_pmf(n1, k, q1);
        out.p_hat += w * static_cast<double>(k) / denom_p;
        out.t_hat += w * static_cast<double>(k) * static_cast<double>(n2) * g[2] / denom_t;
      }
    }
    return out;
  }
};

}  // namespace toy
