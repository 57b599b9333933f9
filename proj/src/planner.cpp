#include "rms/planner.hpp"

#include <cmath>
#include <stdexcept>

namespace rms::planner {

namespace {

double clamp_round(double x) {
  const double r = std::round(x);
  return r < 1.0 ? 1.0 : r;
}

}  // namespace

double solve_c() {
  static const double c = [] {
    // f is increasing through its unique root on (1/2, 1).
    auto f = [](double c) { return std::exp(1.0 / c) - 2.0 * c / (2.0 * c - 1.0); };
    double lo = 0.51, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (f(mid) < 0.0)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return c;
}

double p_opt() {
  const double c = solve_c();
  return (2.0 * c - 1.0) / (2.0 * c);
}

OptimalPlanOutputs optimal_plan(const OptimalPlanInputs& in) {
  if (!(in.p_b > 0.0 && in.p_b < 1.0))
    throw std::domain_error("optimal_plan: p_b must lie in (0, 1)");
  if (!(in.rho > 0.0)) throw std::domain_error("optimal_plan: rho must be positive");
  if (in.re_r_plus < 0.0) throw std::domain_error("optimal_plan: re_r_plus must be >= 0");

  OptimalPlanOutputs out;
  out.c = solve_c();
  const double c = out.c;
  const double root = std::sqrt(2.0 * c - 1.0);
  const double log_pb = std::abs(std::log(in.p_b));

  out.m_real = c * log_pb;
  out.p_stage = p_opt();
  out.n0_real = (c * log_pb / root + in.re_r_plus) / (in.rho * root);
  out.nm_real = in.re_r_plus * 2.0 * c / root;
  out.workload = (c * log_pb / root + in.re_r_plus) * (c * log_pb / root + in.re_r_plus) / in.rho;

  out.m = static_cast<int>(clamp_round(out.m_real));
  out.n0 = static_cast<std::int64_t>(clamp_round(out.n0_real));
  out.nk = static_cast<std::int64_t>(clamp_round(1.0 / out.p_stage));
  out.nm = static_cast<std::int64_t>(clamp_round(out.nm_real));

  // Rounding correction: with the rounded plan evaluated at the realizable
  // stage probability p_b^(1/m), raise n0 until the error target holds. The
  // predicted squared relative error scales as 1/n0 exactly.
  const double p_stage_rounded = std::pow(in.p_b, 1.0 / out.m);
  std::vector<double> factors(static_cast<std::size_t>(out.m) + 1);
  std::vector<double> probs(static_cast<std::size_t>(out.m), p_stage_rounded);
  factors[0] = static_cast<double>(out.n0);
  for (int k = 1; k < out.m; ++k) factors[static_cast<std::size_t>(k)] = static_cast<double>(out.nk);
  factors[static_cast<std::size_t>(out.m)] = static_cast<double>(out.nm);
  const double realized = predicted_sre(factors, probs, in.re_r_plus);
  if (realized > 1.2 * in.rho)
    out.n0 = static_cast<std::int64_t>(
        std::ceil(static_cast<double>(out.n0) * realized / in.rho));
  return out;
}

double predicted_sre(const std::vector<double>& factors, const std::vector<double>& probs,
                     double re_r_plus) {
  if (factors.size() != probs.size() + 1)
    throw std::invalid_argument("predicted_sre: factors must hold n_0 .. n_m");
  if (probs.empty()) throw std::invalid_argument("predicted_sre: need at least one stage");
  for (double p : probs)
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("predicted_sre: probabilities must lie in (0, 1]");
  for (double n : factors)
    if (!(n >= 1.0)) throw std::invalid_argument("predicted_sre: factors must be >= 1");

  double running = factors[0];  // prod_{j<k} n_j p_j with p_0 = 1
  double sre = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    sre += (1.0 - probs[k]) / probs[k] / running;
    running *= factors[k + 1] * probs[k];
  }
  sre += re_r_plus * re_r_plus / running;
  return sre;
}

double mc_workload(double p_b, double re_r_plus, double rho) {
  if (!(p_b > 0.0 && p_b < 1.0)) throw std::domain_error("mc_workload: p_b must lie in (0, 1)");
  if (!(rho > 0.0)) throw std::domain_error("mc_workload: rho must be positive");
  return (1.0 - p_b + re_r_plus * re_r_plus) / (p_b * rho);
}

double efficiency_ratio(double w_rms, double re2_rms, double w_mc, double re2_mc) {
  if (!(w_rms > 0.0 && re2_rms > 0.0 && w_mc > 0.0 && re2_mc > 0.0))
    throw std::domain_error("efficiency_ratio: all inputs must be positive");
  return (w_mc / w_rms) * (re2_mc / re2_rms);
}

}  // namespace rms::planner
