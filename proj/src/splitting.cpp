#include "rms/splitting.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rms {

namespace {

constexpr std::uint64_t kOriginTag = 0xA001;
constexpr std::uint64_t kPilotTrialTag = 0xB001;
constexpr std::uint64_t kPilotRareTag = 0xC001;

struct ContinuationOutcome {
  bool success = false;
  State entrance;
  std::int64_t steps = 0;
};

// Runs from `start` until the importance first reaches `level` (success) or
// an inward crossing into A completes (failure). A state that triggers both
// on the same step is a failure: the crossing time is not strictly larger.
// A start state already at or above the level succeeds without simulating.
ContinuationOutcome continue_to_level(const ModelSpec& model, const RecurrencySet& a,
                                      const ImportanceFunction& h, const State& start,
                                      double level, std::int64_t budget, RngStream& rng) {
  ContinuationOutcome out;
  if (h(start) >= level) {
    out.success = true;
    out.entrance = start;
    return out;
  }
  bool prev_in_a = a.contains(start);
  State x = start;
  for (;;) {
    if (out.steps >= budget)
      throw BudgetExceededError("splitting continuation exceeded the stage step budget of " +
                                std::to_string(budget) + " steps without returning to A");
    model.step_inplace(x, rng);
    ++out.steps;
    const bool in_a = a.contains(x);
    if (!prev_in_a && in_a) return out;  // failure
    if (h(x) >= level) {
      out.success = true;
      out.entrance = std::move(x);
      return out;
    }
    prev_in_a = in_a;
  }
}

// Time spent in the rare set from a rare-set entrance state until the cycle
// closes; the entrance state itself counts, the crossing state does not.
std::pair<std::int64_t, std::int64_t> measure_rare_time(const ModelSpec& model,
                                                        const RecurrencySet& a,
                                                        const ImportanceFunction& h,
                                                        const State& start, std::int64_t budget,
                                                        RngStream& rng) {
  std::int64_t in_b = h(start) >= 1.0 ? 1 : 0;
  std::int64_t steps = 0;
  bool prev_in_a = a.contains(start);
  State x = start;
  for (;;) {
    if (steps >= budget)
      throw BudgetExceededError("rare-set continuation exceeded the stage step budget of " +
                                std::to_string(budget) + " steps without returning to A");
    model.step_inplace(x, rng);
    ++steps;
    const bool in_a = a.contains(x);
    if (!prev_in_a && in_a) return {in_b, steps};
    if (h(x) >= 1.0) ++in_b;
    prev_in_a = in_a;
  }
}

}  // namespace

void SplittingPlan::validate() const {
  if (levels.empty()) throw std::invalid_argument("splitting plan: need at least one level");
  if (factors.size() != levels.size() + 1)
    throw std::invalid_argument("splitting plan: factors must hold n_0 .. n_m");
  double prev = 0.0;
  for (double l : levels) {
    if (!(l > prev))
      throw std::invalid_argument("splitting plan: levels must be strictly increasing from 0");
    prev = l;
  }
  if (levels.back() != 1.0)
    throw std::invalid_argument("splitting plan: the last level must equal 1");
  for (auto n : factors)
    if (n < 1) throw std::invalid_argument("splitting plan: splitting factors must be >= 1");
  if (stage_step_budget < 1)
    throw std::invalid_argument("splitting plan: stage step budget must be positive");
}

MlsResult run_mls(const ModelSpec& model, const RecurrencySet& a, const ImportanceFunction& h,
                  const SplittingPlan& plan, const OriginSampler& sample_origin, RngStream rng) {
  plan.validate();
  if (plan.factors[0] != 1)
    throw std::invalid_argument(
        "run_mls: n_0 must be 1; average independent runs to realize a larger n_0");
  const int m = plan.stages();

  MlsResult res;
  res.successes.assign(static_cast<std::size_t>(m) + 2, 0);
  res.stage_trials.assign(static_cast<std::size_t>(m) + 1, 0);
  res.level_probs.assign(static_cast<std::size_t>(m), 0.0);
  res.successes[0] = 1;

  RngStream origin_rng = rng.child(kOriginTag);
  std::vector<State> current{sample_origin(origin_rng)};
  std::vector<State> next;

  double denom = 1.0;  // prod_{k<m} n_k, accumulated stage by stage
  for (int k = 0; k < m; ++k) {
    const double level = plan.levels[static_cast<std::size_t>(k)];
    const std::int64_t n_k = plan.factors[static_cast<std::size_t>(k)];
    denom *= static_cast<double>(n_k);
    next.clear();
    for (std::size_t i = 0; i < current.size(); ++i) {
      for (std::int64_t b = 0; b < n_k; ++b) {
        RngStream branch = rng.child(static_cast<std::uint64_t>(k), i, static_cast<std::uint64_t>(b));
        ContinuationOutcome out =
            continue_to_level(model, a, h, current[i], level, plan.stage_step_budget, branch);
        res.workload += static_cast<std::uint64_t>(out.steps);
        if (out.success) next.push_back(std::move(out.entrance));
      }
    }
    res.stage_trials[static_cast<std::size_t>(k)] =
        static_cast<std::int64_t>(current.size()) * n_k;
    res.successes[static_cast<std::size_t>(k) + 1] = static_cast<std::int64_t>(next.size());
    res.level_probs[static_cast<std::size_t>(k)] =
        static_cast<double>(next.size()) / static_cast<double>(res.stage_trials[static_cast<std::size_t>(k)]);
    if (next.empty()) return res;  // p_hat = t_hat = 0
    current.swap(next);
  }

  res.p_hat = static_cast<double>(res.successes[static_cast<std::size_t>(m)]) / denom;

  const std::int64_t n_m = plan.factors[static_cast<std::size_t>(m)];
  for (std::size_t i = 0; i < current.size(); ++i) {
    for (std::int64_t b = 0; b < n_m; ++b) {
      RngStream branch =
          rng.child(static_cast<std::uint64_t>(m), i, static_cast<std::uint64_t>(b));
      const auto [in_b, steps] =
          measure_rare_time(model, a, h, current[i], plan.stage_step_budget, branch);
      res.workload += static_cast<std::uint64_t>(steps);
      res.successes[static_cast<std::size_t>(m) + 1] += in_b;
      if (static_cast<std::int64_t>(res.r_plus.size()) < plan.r_plus_cap)
        res.r_plus.push_back(in_b);
    }
  }
  res.stage_trials[static_cast<std::size_t>(m)] = static_cast<std::int64_t>(current.size()) * n_m;
  res.t_hat = static_cast<double>(res.successes[static_cast<std::size_t>(m) + 1]) /
              (denom * static_cast<double>(n_m));
  return res;
}

PilotResult run_pilot_fns(const ModelSpec& model, const RecurrencySet& a,
                          const ImportanceFunction& h, int pilot_levels, int successes_per_level,
                          const OriginSampler& sample_origin, RngStream rng,
                          std::int64_t stage_step_budget) {
  if (pilot_levels < 2) throw std::invalid_argument("pilot: need at least two levels");
  if (successes_per_level < 2)
    throw std::invalid_argument("pilot: need at least two successes per level");
  constexpr std::int64_t kMaxTrialsPerLevel = 10'000'000;

  PilotResult res;
  std::vector<State> pool;
  std::vector<State> next_pool;
  double cum = 1.0;
  for (int j = 0; j < pilot_levels; ++j) {
    const double level = static_cast<double>(j + 1) / static_cast<double>(pilot_levels);
    std::int64_t trials = 0;
    int found = 0;
    next_pool.clear();
    while (found < successes_per_level) {
      if (trials >= kMaxTrialsPerLevel)
        throw BudgetExceededError("pilot: level " + std::to_string(level) +
                                  " produced too few successes within the trial budget");
      RngStream trial_rng =
          rng.child(kPilotTrialTag, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(trials));
      const State start = (j == 0)
                              ? sample_origin(trial_rng)
                              : pool[static_cast<std::size_t>(
                                    trial_rng.uniform_below(static_cast<std::int64_t>(pool.size())))];
      ContinuationOutcome out =
          continue_to_level(model, a, h, start, level, stage_step_budget, trial_rng);
      res.workload += static_cast<std::uint64_t>(out.steps);
      ++trials;
      if (out.success) {
        ++found;
        next_pool.push_back(std::move(out.entrance));
      }
    }
    const double p = static_cast<double>(successes_per_level - 1) / static_cast<double>(trials - 1);
    cum *= p;
    res.levels.push_back(level);
    res.level_probs.push_back(p);
    res.cum_probs.push_back(cum);
    res.trials.push_back(trials);
    pool.swap(next_pool);
  }
  res.p_b = cum;

  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < successes_per_level; ++t) {
    RngStream trial_rng = rng.child(kPilotRareTag, static_cast<std::uint64_t>(t));
    const State& start = pool[static_cast<std::size_t>(
        trial_rng.uniform_below(static_cast<std::int64_t>(pool.size())))];
    const auto [in_b, steps] = measure_rare_time(model, a, h, start, stage_step_budget, trial_rng);
    res.workload += static_cast<std::uint64_t>(steps);
    res.r_plus.push_back(in_b);
    sum += static_cast<double>(in_b);
    sum_sq += static_cast<double>(in_b) * static_cast<double>(in_b);
  }
  const double n = static_cast<double>(successes_per_level);
  res.mean_r_plus = sum / n;
  const double var = (sum_sq - n * res.mean_r_plus * res.mean_r_plus) / (n - 1.0);
  res.re_r_plus = res.mean_r_plus > 0.0 ? std::sqrt(std::max(0.0, var)) / res.mean_r_plus : 0.0;
  res.t_b = res.p_b * res.mean_r_plus;
  return res;
}

std::vector<double> place_thresholds(const std::vector<double>& pilot_levels,
                                     const std::vector<double>& pilot_cum_probs, double p_stage,
                                     int m) {
  if (m < 1) throw std::invalid_argument("place_thresholds: m must be >= 1");
  if (!(p_stage > 0.0 && p_stage < 1.0))
    throw std::invalid_argument("place_thresholds: per-stage probability must lie in (0, 1)");
  if (pilot_levels.size() != pilot_cum_probs.size() || pilot_levels.size() < 2)
    throw std::invalid_argument("place_thresholds: need pilot estimates at >= 2 levels");
  if (m == 1) return {1.0};

  // Envelope of (level, log cumulative probability) points, anchored at
  // (0, 0); flat runs collapse onto their rightmost point so the inverse is
  // well defined where decay actually starts.
  std::vector<std::pair<double, double>> pts;
  pts.emplace_back(0.0, 0.0);
  for (std::size_t j = 0; j < pilot_levels.size(); ++j) {
    if (!(pilot_cum_probs[j] > 0.0))
      throw std::invalid_argument("place_thresholds: pilot estimates must be strictly positive");
    const double y = std::log(pilot_cum_probs[j]);
    if (y > pts.back().second + 1e-15)
      throw DegenerateFitError("place_thresholds: pilot cumulative probabilities increase");
    if (y >= pts.back().second - 1e-15)
      pts.back() = {pilot_levels[j], pts.back().second};  // extend the flat run
    else
      pts.emplace_back(pilot_levels[j], y);
  }
  if (pts.size() < 2 || !(pts.back().second < -1e-15))
    throw DegenerateFitError("place_thresholds: fitted log-probability is non-decreasing");

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m));
  const double log_p = std::log(p_stage);
  std::size_t seg = 1;
  for (int k = 1; k < m; ++k) {
    const double target = static_cast<double>(k) * log_p;
    while (seg + 1 < pts.size() && pts[seg].second > target) ++seg;
    const auto& [la, ya] = pts[seg - 1];
    const auto& [lb, yb] = pts[seg];
    // Interpolate within the bracketing segment; extrapolate along the last
    // one for targets beyond the pilot's reach.
    const double l = la + (ya - target) / (ya - yb) * (lb - la);
    out.push_back(l);
  }
  out.push_back(1.0);

  double prev = 0.0;
  for (double& l : out) {
    if (l <= prev) l = std::nextafter(prev, 2.0);
    if (l > 1.0) throw DegenerateFitError("place_thresholds: thresholds collapsed at 1");
    prev = l;
  }
  if (out.back() != 1.0)
    throw DegenerateFitError("place_thresholds: thresholds collapsed at 1");
  return out;
}

}  // namespace rms
