#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rms/model.hpp"
#include "rms/recurrency.hpp"
#include "rms/rng.hpp"

namespace rms {

// Thresholds and splitting factors for one multilevel-splitting run.
// levels holds l_1 < ... < l_m = 1 in importance units (l_0 = 0 implied);
// factors holds n_0 .. n_m. Stage k simulates each entrance state n_k times.
struct SplittingPlan {
  std::vector<double> levels;
  std::vector<std::int64_t> factors;
  std::int64_t stage_step_budget = 10'000'000;
  std::int64_t r_plus_cap = 100'000;

  int stages() const { return static_cast<int>(levels.size()); }
  void validate() const;
};

// Outcome of one splitting run. successes holds r_0 .. r_{m+1}: r_0 = 1,
// r_k the number of stage-k entrance states for k <= m, and r_{m+1} the
// total time spent in the rare set over the final-stage continuations.
struct MlsResult {
  double p_hat = 0.0;  // r_m / prod_{k<m} n_k
  double t_hat = 0.0;  // r_{m+1} / prod_{k<=m} n_k
  std::vector<std::int64_t> successes;
  std::vector<std::int64_t> stage_trials;  // continuations launched per stage 0..m
  std::vector<double> level_probs;         // realized conditional p_k, k = 1..m
  std::vector<std::int64_t> r_plus;        // retained per-continuation rare-set times
  std::uint64_t workload = 0;
};

// Draws a cycle origin; the usual choice resamples uniformly from an
// OriginStore collected during the alpha stage.
using OriginSampler = std::function<State(RngStream&)>;

inline OriginSampler store_sampler(const OriginStore& store) {
  return [&store](RngStream& rng) { return store.sample(rng); };
}

// Fixed-splitting multilevel run. A continuation at stage k runs until its
// importance first reaches l_{k+1} (success; the first such state becomes a
// stage-(k+1) entrance state) or until it completes an inward crossing into
// A (failure; ties resolve to failure). The final stage accumulates the time
// spent in the rare set until the crossing. Requires factors[0] == 1; larger
// n_0 is realized as independent runs averaged by the caller, which is what
// makes the replica variance estimable.
MlsResult run_mls(const ModelSpec& model, const RecurrencySet& a, const ImportanceFunction& h,
                  const SplittingPlan& plan, const OriginSampler& sample_origin, RngStream rng);

// Fixed-number-of-successes pilot over equally spaced levels j / m_pilot.
// Each level repeats continuations until `successes_per_level` of them reach
// the level; (k_s - 1)/(trials - 1) is the unbiased conditional probability
// estimate. After the last level it draws rare-set time samples to size the
// final splitting factor.
struct PilotResult {
  double p_b = 0.0;         // product of per-level estimates
  double t_b = 0.0;         // p_b * mean_r_plus
  double mean_r_plus = 0.0;
  double re_r_plus = 0.0;   // sample relative error of the rare-set time
  std::vector<double> levels;
  std::vector<double> level_probs;
  std::vector<double> cum_probs;
  std::vector<std::int64_t> trials;
  std::vector<std::int64_t> r_plus;
  std::uint64_t workload = 0;
};

PilotResult run_pilot_fns(const ModelSpec& model, const RecurrencySet& a,
                          const ImportanceFunction& h, int pilot_levels, int successes_per_level,
                          const OriginSampler& sample_origin, RngStream rng,
                          std::int64_t stage_step_budget = 10'000'000);

// Places m thresholds by piecewise-linear interpolation of the pilot's
// cumulative log-probabilities versus level: l_k solves fitted
// log P = k log(p_stage), so every stage gets conditional probability
// p_stage under the fit; l_m = 1. Pass p_stage = p_b^(1/m) to make the
// stages multiply back to the pilot's reach probability. Throws
// DegenerateFitError when the pilot profile never decreases.
std::vector<double> place_thresholds(const std::vector<double>& pilot_levels,
                                     const std::vector<double>& pilot_cum_probs, double p_stage,
                                     int m);

}  // namespace rms
