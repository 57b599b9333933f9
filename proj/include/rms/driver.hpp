#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rms/alpha.hpp"
#include "rms/model.hpp"
#include "rms/planner.hpp"
#include "rms/recurrency.hpp"
#include "rms/splitting.hpp"

namespace rms {

struct EstimationSettings {
  double target_re_tb = 0.02;   // desired relative error of the time estimate
  int replicas = 20;
  std::int64_t n_rec = 10000;   // cycles collected for the shared origin store
  // Crossings per replica frequency segment; 0 sizes the segments from the
  // measured cycle-length dispersion so the frequency noise stays near half
  // the time-estimate target.
  std::int64_t replica_alpha_crossings = 0;
  int pilot_levels = 20;
  int pilot_successes = 100;
  int batches = 30;
  std::int64_t burn_in = 10000;
  std::int64_t stage_step_budget = 10'000'000;
  std::int64_t first_crossing_budget = 10'000'000;
  std::int64_t r_plus_cap = 100'000;
  int threads = 0;  // 0 = hardware concurrency
};

struct ReplicaOutcome {
  double gamma = 0.0;
  double alpha = 0.0;
  double t_b = 0.0;
  std::uint64_t workload = 0;
};

struct McGammaResult {
  double gamma = 0.0;
  double re = 0.0;  // batch-means relative error of the estimate
  std::uint64_t workload = 0;
  int batches = 0;
  bool zero_hits = false;
};

// Full outcome of one estimation: the product estimate, its diagnostics, and
// everything needed to rebuild the run.
struct RmsReport {
  double u = 0.0;
  double gamma_hat = 0.0;  // mean of the replica products
  double tb_hat = 0.0;     // mean of the replica time estimates
  double alpha_hat = 0.0;  // mean of the replica recurrence frequencies
  double alpha_pooled = 0.0;  // batch-means estimate from the shared pass
  double alpha_pooled_re = 0.0;

  // Sample relative errors across replicas (relative spread of one replica).
  double re_gamma = 0.0;
  double re_alpha = 0.0;
  double re_tb = 0.0;
  double re_gamma_mean = 0.0;  // re_gamma / sqrt(replicas): error of gamma_hat

  double independence_residual = 0.0;  // |RE^2(g) - RE^2(a) - RE^2(T)|
  double residual_fraction = 0.0;      // residual / RE^2(g)
  double re_tb_target = 0.0;
  double re_tb_ratio = 0.0;       // realized / target
  bool assumption_warning = false;  // realized exceeds target threefold

  PilotResult pilot;
  planner::OptimalPlanOutputs plan_optima;
  SplittingPlan plan;
  std::vector<double> realized_level_probs;  // pooled over replicas and runs
  std::vector<ReplicaOutcome> replicas;

  std::uint64_t workload_alpha = 0;
  std::uint64_t workload_pilot = 0;
  std::uint64_t workload_replicas = 0;
  std::uint64_t workload_total = 0;

  bool has_mc = false;
  McGammaResult mc;
  double efficiency = 0.0;

  std::uint64_t seed = 0;
};

// Runs the full pipeline for the rare set {x1 >= u}: one shared pass that
// estimates the recurrence frequency and stores cycle origins, a
// fixed-number-of-successes pilot, the optimal-parameter plan, and
// `replicas` independent product estimates combined into sample-based error
// estimates. Replica results do not depend on the thread count.
RmsReport run_rms(const ModelSpec& model, const RecurrencySet& a, const ImportanceFunction& h,
                  double u, const EstimationSettings& settings, std::uint64_t seed);

// Long-run fraction of observed steps with x1 >= u, with batch-means error.
McGammaResult run_mc_gamma(const ModelSpec& model, double u, std::int64_t n_steps, int batches,
                           std::uint64_t seed, std::int64_t burn_in = 10000);

// Attaches the Monte Carlo baseline to the report and returns the
// work-normalized efficiency ratio.
double compare(RmsReport& report, const McGammaResult& mc);

}  // namespace rms
