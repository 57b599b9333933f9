#pragma once

#include <cstdint>
#include <vector>

namespace rms::planner {

// Root of exp(1/c) = 2c/(2c - 1) on (1/2, 1), about 0.6275. This constant
// ties the optimal number of thresholds to |log p_B| and fixes the optimal
// per-stage probability.
double solve_c();

// Optimal per-stage conditional probability (2c - 1) / (2c), about 0.2032.
double p_opt();

struct OptimalPlanInputs {
  double p_b = 0.0;       // rough reach probability from the pilot
  double re_r_plus = 0.0; // rough relative error of the rare-set time
  double rho = 0.0;       // target squared relative error of the time estimate
};

struct OptimalPlanOutputs {
  double c = 0.0;
  double m_real = 0.0;
  int m = 0;
  double p_stage = 0.0;    // optimal per-stage probability before rounding
  double n0_real = 0.0;
  std::int64_t n0 = 0;     // independent runs to average
  std::int64_t nk = 0;     // shared factor for stages 1 .. m-1
  double nm_real = 0.0;
  std::int64_t nm = 0;     // final-stage factor
  double workload = 0.0;   // predicted cost of the unrounded optimum, in steps
};

// Workload-minimizing parameters under the constraint that the squared
// relative error of the time estimate stays at or below rho. Real-valued
// optima are rounded to the nearest integer and clamped to 1; when rounding
// pushes the predicted squared relative error more than 20% above rho, n0
// is raised until the target holds again (n0 scales the variance linearly).
OptimalPlanOutputs optimal_plan(const OptimalPlanInputs& inputs);

// Squared relative error of the splitting time estimator for given factors
// n_0 .. n_m, conditional probabilities p_1 .. p_m, and the relative error
// of the rare-set time. Factors may be real-valued to evaluate unrounded
// plans.
double predicted_sre(const std::vector<double>& factors, const std::vector<double>& probs,
                     double re_r_plus);

// Steps a crude Monte Carlo estimator of the rare-set time needs for the
// same squared-relative-error target.
double mc_workload(double p_b, double re_r_plus, double rho);

// Work-normalized efficiency: (W_mc / W_rms) * (RE^2_mc / RE^2_rms).
double efficiency_ratio(double w_rms, double re2_rms, double w_mc, double re2_mc);

}  // namespace rms::planner
