#include "rms/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace rms {

namespace {

// Stream-id tags for the pipeline stages, fixed for reproducibility.
constexpr std::uint64_t kProbeTag = 1;
constexpr std::uint64_t kSharedAlphaTag = 2;
constexpr std::uint64_t kSegmentTag = 3;
constexpr std::uint64_t kPilotTag = 4;
constexpr std::uint64_t kReplicaTag = 5;
constexpr std::uint64_t kMcTag = 6;

double sample_relative_error(const std::vector<double>& values, double mean) {
  if (values.size() < 2 || mean == 0.0) return 0.0;
  double acc = 0.0;
  for (double v : values) {
    const double rel = v / mean - 1.0;
    acc += rel * rel;
  }
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

}  // namespace

RmsReport run_rms(const ModelSpec& model, const RecurrencySet& a, const ImportanceFunction& h,
                  double u, const EstimationSettings& settings, std::uint64_t seed) {
  if (settings.replicas < 2) throw std::invalid_argument("run_rms: need at least two replicas");
  if (!(settings.target_re_tb > 0.0))
    throw std::invalid_argument("run_rms: target relative error must be positive");

  RmsReport report;
  report.u = u;
  report.seed = seed;
  report.re_tb_target = settings.target_re_tb;

  RngStream root(seed);
  const State x0 = State::Zero(model.dimension());

  // Probe run: a rough recurrence frequency to size the shared pass.
  CollectOptions probe_opts;
  probe_opts.burn_in = settings.burn_in;
  probe_opts.first_crossing_budget = settings.first_crossing_budget;
  RngStream probe_rng = root.child(kProbeTag);
  const std::int64_t probe_cycles = std::min<std::int64_t>(200, settings.n_rec);
  CollectResult probe = collect_cycles(model, a, h, x0, probe_cycles, probe_rng, probe_opts);
  const double alpha_probe =
      static_cast<double>(probe.store.size()) / static_cast<double>(probe.spanned_steps);
  report.workload_alpha += probe.workload;

  // Shared pass: batch-means alpha and the origin store, one sweep.
  const std::int64_t shared_steps = static_cast<std::int64_t>(
      std::ceil(static_cast<double>(settings.n_rec) / alpha_probe));
  BatchMeansOptions bm_opts;
  bm_opts.burn_in = settings.burn_in;
  RngStream alpha_rng = root.child(kSharedAlphaTag);
  BatchMeansResult shared =
      alpha_batch_means(model, a, h, x0, shared_steps, settings.batches, alpha_rng, bm_opts);
  report.alpha_pooled = shared.alpha.value;
  report.alpha_pooled_re = shared.alpha.re;
  report.workload_alpha += shared.alpha.workload;
  const OriginStore& store = shared.origins;

  // Size the per-replica frequency segments: the renewal approximation puts
  // the segment relative error near cv_length / sqrt(crossings), so hold it
  // at half the time-estimate target unless the caller fixed a count.
  std::int64_t crossings_per_replica = settings.replica_alpha_crossings;
  if (crossings_per_replica <= 0) {
    double mean_len = 0.0, var_len = 0.0;
    for (const auto& rec : store.records()) mean_len += static_cast<double>(rec.length);
    mean_len /= static_cast<double>(store.size());
    for (const auto& rec : store.records()) {
      const double dev = static_cast<double>(rec.length) - mean_len;
      var_len += dev * dev;
    }
    var_len /= static_cast<double>(store.size() - 1);
    const double cv2 = var_len / (mean_len * mean_len);
    const double target_alpha_re = 0.5 * settings.target_re_tb;
    crossings_per_replica = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::ceil(cv2 / (target_alpha_re * target_alpha_re))), 2000,
        200000);
  }
  const std::int64_t segment_steps = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(static_cast<double>(crossings_per_replica) /
                                             shared.alpha.value)));
  const std::int64_t segment_prefix = std::max<std::int64_t>(100, settings.burn_in / 10);

  // Pilot and plan.
  OriginSampler sampler = store_sampler(store);
  report.pilot = run_pilot_fns(model, a, h, settings.pilot_levels, settings.pilot_successes,
                               sampler, root.child(kPilotTag), settings.stage_step_budget);
  report.workload_pilot = report.pilot.workload;

  planner::OptimalPlanInputs plan_in;
  plan_in.p_b = report.pilot.p_b;
  plan_in.re_r_plus = report.pilot.re_r_plus;
  plan_in.rho = settings.target_re_tb * settings.target_re_tb;
  report.plan_optima = planner::optimal_plan(plan_in);

  SplittingPlan plan;
  plan.levels = place_thresholds(report.pilot.levels, report.pilot.cum_probs,
                                 std::pow(report.pilot.p_b, 1.0 / report.plan_optima.m),
                                 report.plan_optima.m);
  plan.factors.assign(static_cast<std::size_t>(report.plan_optima.m) + 1, report.plan_optima.nk);
  plan.factors.front() = report.plan_optima.n0;
  plan.factors.back() = report.plan_optima.nm;
  plan.stage_step_budget = settings.stage_step_budget;
  plan.r_plus_cap = settings.r_plus_cap;
  report.plan = plan;

  SplittingPlan inner_plan = plan;
  inner_plan.factors.front() = 1;  // n_0 realized as independent runs

  // Independent replicas; streams are keyed by replica and run index, so the
  // outcome is the same for any thread count.
  const int m = plan.stages();
  const std::int64_t n0 = plan.factors.front();
  std::vector<ReplicaOutcome> outcomes(static_cast<std::size_t>(settings.replicas));
  std::vector<std::vector<std::int64_t>> successes(
      static_cast<std::size_t>(settings.replicas),
      std::vector<std::int64_t>(static_cast<std::size_t>(m), 0));
  std::vector<std::vector<std::int64_t>> trials = successes;

  std::atomic<int> next_replica{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      const int i = next_replica.fetch_add(1);
      if (i >= settings.replicas) return;
      try {
        RngStream rep_rng = root.child(kReplicaTag, static_cast<std::uint64_t>(i));
        double t_sum = 0.0;
        std::uint64_t work = 0;

        // Replica frequency segment: an independent continuation of the
        // shared stationary path, decorrelated by a short prefix.
        double alpha_i = 0.0;
        {
          RngStream seg_rng = root.child(kSegmentTag, static_cast<std::uint64_t>(i));
          State x = shared.final_state;
          for (std::int64_t n = 0; n < segment_prefix; ++n) model.step_inplace(x, seg_rng);
          bool prev_in_a = a.contains(x);
          std::int64_t crossings = 0;
          for (std::int64_t n = 0; n < segment_steps; ++n) {
            model.step_inplace(x, seg_rng);
            const bool in_a = a.contains(x);
            if (!prev_in_a && in_a) ++crossings;
            prev_in_a = in_a;
          }
          alpha_i = static_cast<double>(crossings) / static_cast<double>(segment_steps);
          work += static_cast<std::uint64_t>(segment_prefix + segment_steps);
        }

        for (std::int64_t j = 0; j < n0; ++j) {
          MlsResult run = run_mls(model, a, h, inner_plan, sampler,
                                  rep_rng.child(static_cast<std::uint64_t>(j)));
          t_sum += run.t_hat;
          work += run.workload;
          for (int k = 0; k < m; ++k) {
            successes[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +=
                run.successes[static_cast<std::size_t>(k) + 1];
            trials[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +=
                run.stage_trials[static_cast<std::size_t>(k)];
          }
        }
        ReplicaOutcome& out = outcomes[static_cast<std::size_t>(i)];
        out.t_b = t_sum / static_cast<double>(n0);
        out.alpha = alpha_i;
        out.gamma = out.alpha * out.t_b;
        out.workload = work;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int thread_count = settings.threads > 0
                         ? settings.threads
                         : static_cast<int>(std::thread::hardware_concurrency());
  thread_count = std::max(1, std::min(thread_count, settings.replicas));
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  report.replicas = outcomes;
  std::vector<double> gammas, alphas, tbs;
  for (const auto& out : outcomes) {
    gammas.push_back(out.gamma);
    alphas.push_back(out.alpha);
    tbs.push_back(out.t_b);
    report.workload_replicas += out.workload;
  }
  const double n = static_cast<double>(settings.replicas);
  report.gamma_hat = 0.0;
  report.alpha_hat = 0.0;
  report.tb_hat = 0.0;
  for (int i = 0; i < settings.replicas; ++i) {
    report.gamma_hat += gammas[static_cast<std::size_t>(i)] / n;
    report.alpha_hat += alphas[static_cast<std::size_t>(i)] / n;
    report.tb_hat += tbs[static_cast<std::size_t>(i)] / n;
  }
  report.re_gamma = sample_relative_error(gammas, report.gamma_hat);
  report.re_alpha = sample_relative_error(alphas, report.alpha_hat);
  report.re_tb = sample_relative_error(tbs, report.tb_hat);
  report.re_gamma_mean = report.re_gamma / std::sqrt(n);
  report.independence_residual = std::abs(report.re_gamma * report.re_gamma -
                                          report.re_alpha * report.re_alpha -
                                          report.re_tb * report.re_tb);
  report.residual_fraction = report.re_gamma > 0.0
                                 ? report.independence_residual / (report.re_gamma * report.re_gamma)
                                 : 0.0;
  report.re_tb_ratio = report.re_tb / settings.target_re_tb;
  report.assumption_warning = report.re_tb_ratio > 3.0;

  report.realized_level_probs.assign(static_cast<std::size_t>(m), 0.0);
  for (int k = 0; k < m; ++k) {
    std::int64_t succ = 0, tri = 0;
    for (int i = 0; i < settings.replicas; ++i) {
      succ += successes[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      tri += trials[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    if (tri > 0)
      report.realized_level_probs[static_cast<std::size_t>(k)] =
          static_cast<double>(succ) / static_cast<double>(tri);
  }

  report.workload_total =
      report.workload_alpha + report.workload_pilot + report.workload_replicas;
  return report;
}

McGammaResult run_mc_gamma(const ModelSpec& model, double u, std::int64_t n_steps, int batches,
                           std::uint64_t seed, std::int64_t burn_in) {
  if (batches < 2) throw std::invalid_argument("run_mc_gamma: need at least 2 batches");
  if (n_steps < batches)
    throw std::invalid_argument("run_mc_gamma: n_steps must be >= batches");

  RngStream rng = RngStream(seed).child(kMcTag);
  State x = simulate_path(model, State::Zero(model.dimension()), burn_in, rng);

  const std::int64_t block = n_steps / batches;
  std::vector<double> fractions(static_cast<std::size_t>(batches), 0.0);
  std::int64_t hits_total = 0;
  for (int k = 0; k < batches; ++k) {
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < block; ++i) {
      model.step_inplace(x, rng);
      if (x[0] >= u) ++hits;
    }
    hits_total += hits;
    fractions[static_cast<std::size_t>(k)] =
        static_cast<double>(hits) / static_cast<double>(block);
  }

  McGammaResult res;
  res.batches = batches;
  res.workload = static_cast<std::uint64_t>(block) * static_cast<std::uint64_t>(batches);
  res.zero_hits = hits_total == 0;
  double mean = 0.0;
  for (double f : fractions) mean += f;
  mean /= batches;
  res.gamma = mean;
  if (hits_total > 0) {
    double var = 0.0;
    for (double f : fractions) var += (f - mean) * (f - mean);
    var /= (batches - 1);
    res.re = std::sqrt(var / batches) / mean;
  }
  return res;
}

double compare(RmsReport& report, const McGammaResult& mc) {
  const double re2_rms = report.re_gamma_mean * report.re_gamma_mean;
  const double eff = planner::efficiency_ratio(static_cast<double>(report.workload_total),
                                               re2_rms, static_cast<double>(mc.workload),
                                               mc.re * mc.re);
  report.has_mc = true;
  report.mc = mc;
  report.efficiency = eff;
  return eff;
}

}  // namespace rms
