#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rms/config.hpp"
#include "rms/driver.hpp"
#include "rms/errors.hpp"
#include "rms/oracle.hpp"
#include "rms/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitBudget = 4;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "experiment configuration file")->required();
  cmd->add_option("--seed", opts.seed, "override the configured seed");
  cmd->add_option("--threads", opts.threads, "worker threads (default: available cores)");
  cmd->add_option("--out-dir", opts.out_dir, "override the configured output directory");
  cmd->add_option("--format", opts.format, "restrict outputs to one format")
      ->check(CLI::IsMember({"json", "csv"}));
}

rms::ExperimentConfig load(const CommonOptions& opts) {
  rms::ExperimentConfig cfg = rms::load_config(opts.config_path);
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.seed_given = true;
    cfg.echo["seed"] = cfg.seed;
  }
  if (!cfg.seed_given)
    std::cerr << "note: no seed configured, using the default seed 0\n";
  if (opts.threads) cfg.estimation.threads = *opts.threads;
  if (opts.out_dir) {
    cfg.out_dir = *opts.out_dir;
    cfg.echo["output"]["dir"] = cfg.out_dir;
  }
  if (opts.format) {
    cfg.write_json = *opts.format == "json";
    cfg.write_csv = *opts.format == "csv";
  }
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

std::string out_path(const rms::ExperimentConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / (cfg.prefix + "_" + name)).string();
}

rms::ImportanceFunction importance_for(const rms::ExperimentConfig& cfg, double u) {
  return rms::ImportanceFunction::distance(u, cfg.importance_offset);
}

void require_thresholds(const rms::ExperimentConfig& cfg) {
  if (cfg.thresholds.empty())
    throw rms::ConfigError("config: recurrency.u_values or gamma_targets must be non-empty");
}

int cmd_estimate(const CommonOptions& opts) {
  rms::ExperimentConfig cfg = load(opts);
  require_thresholds(cfg);
  std::vector<rms::RmsReport> reports;
  for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) {
    const double u = cfg.thresholds[i].u;
    rms::RmsReport report = rms::run_rms(cfg.model, cfg.set, importance_for(cfg, u), u,
                                         cfg.estimation, cfg.seed);
    if (cfg.attach_mc) {
      const rms::McGammaResult mc = rms::run_mc_gamma(cfg.model, u, cfg.mc_steps, cfg.mc_batches,
                                                      cfg.seed, cfg.estimation.burn_in);
      rms::compare(report, mc);
    }
    if (report.assumption_warning)
      std::cerr << "warning: realized RE(T_B) " << report.re_tb << " exceeds the target "
                << report.re_tb_target << " threefold at u=" << u
                << "; the recurrency set or importance function may be inadequate\n";
    if (cfg.write_json) {
      const auto j = rms::report_to_json(report, cfg.echo);
      rms::write_text_file(out_path(cfg, "u" + std::to_string(i) + ".json"), j.dump(2) + "\n");
    }
    std::cout << "u=" << rms::format_double(u) << " gamma=" << rms::format_double(report.gamma_hat)
              << " re=" << rms::format_double(report.re_gamma)
              << " re_tb=" << rms::format_double(report.re_tb);
    if (report.has_mc) std::cout << " eff=" << rms::format_double(report.efficiency);
    std::cout << "\n";
    reports.push_back(std::move(report));
  }
  if (cfg.write_csv) rms::write_text_file(out_path(cfg, "table.csv"), rms::table_csv(reports));
  return kExitOk;
}

int cmd_mc(const CommonOptions& opts) {
  rms::ExperimentConfig cfg = load(opts);
  require_thresholds(cfg);
  nlohmann::json all = nlohmann::json::array();
  for (const auto& t : cfg.thresholds) {
    const rms::McGammaResult mc = rms::run_mc_gamma(cfg.model, t.u, cfg.mc_steps, cfg.mc_batches,
                                                    cfg.seed, cfg.estimation.burn_in);
    if (mc.zero_hits)
      std::cerr << "warning: no visit to the rare set at u=" << t.u << " within " << cfg.mc_steps
                << " steps\n";
    all.push_back(rms::mc_to_json(mc, t.u, cfg.echo));
    std::cout << "u=" << rms::format_double(t.u) << " gamma_mc=" << rms::format_double(mc.gamma)
              << " re=" << rms::format_double(mc.re) << " workload=" << mc.workload << "\n";
  }
  if (cfg.write_json)
    rms::write_text_file(out_path(cfg, "mc.json"), all.dump(2) + "\n");
  return kExitOk;
}

int cmd_oracle(const CommonOptions& opts) {
  rms::ExperimentConfig cfg = load(opts);
  if (cfg.model.kind() == rms::ModelKind::Franzke)
    throw rms::ConfigError("oracle: no closed-form stationary law for the franzke model");
  const rms::StationaryCovariance cov =
      rms::solve_stationary_covariance(cfg.model.drift(), cfg.model.h0());
  nlohmann::json j;
  j["schema"] = "rms-oracle-v1";
  j["residual"] = cov.residual;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < cov.m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < cov.m.cols(); ++k) row.push_back(cov.m(i, k));
    rows.push_back(row);
  }
  j["covariance"] = rows;
  nlohmann::json table = nlohmann::json::array();
  for (const auto& t : cfg.thresholds)
    table.push_back({{"u", t.u}, {"gamma", rms::gamma_oracle(cov, t.u)}});
  j["thresholds"] = table;
  std::cout << "M11=" << rms::format_double(cov.m(0, 0))
            << " residual=" << rms::format_double(cov.residual) << "\n";
  for (const auto& t : cfg.thresholds)
    std::cout << "u=" << rms::format_double(t.u)
              << " gamma=" << rms::format_double(rms::gamma_oracle(cov, t.u)) << "\n";
  if (cfg.write_json) rms::write_text_file(out_path(cfg, "oracle.json"), j.dump(2) + "\n");
  return kExitOk;
}

int cmd_tune_level(const CommonOptions& opts) {
  rms::ExperimentConfig cfg = load(opts);
  if (!cfg.level_grid)
    throw rms::ConfigError("config: recurrency.level_grid is required for tune-level");
  rms::RngStream rng(cfg.seed, 0x71);
  rms::CrossingCounter counter(cfg.level_grid->values());
  rms::State x = rms::simulate_path(cfg.model, rms::State::Zero(cfg.model.dimension()),
                                    cfg.estimation.burn_in, rng);
  counter.observe(x[0]);
  rms::simulate_path(cfg.model, x, cfg.tune_steps, rng,
                     [&](const rms::State& s, std::int64_t) { counter.observe(s[0]); });
  const rms::LevelSearchResult res = counter.result();
  if (res.zero_crossings)
    std::cerr << "warning: no inward crossing at any grid level; widen the grid\n";
  for (std::size_t i = 0; i < res.grid.size(); ++i)
    std::cout << "level=" << rms::format_double(res.grid[i]) << " crossings=" << res.counts[i]
              << "\n";
  std::cout << "best_level=" << rms::format_double(res.best_level)
            << " crossings=" << res.best_count << "\n";
  if (cfg.write_json) {
    nlohmann::json j;
    j["schema"] = "rms-tune-v1";
    j["best_level"] = res.best_level;
    j["best_count"] = res.best_count;
    j["zero_crossings"] = res.zero_crossings;
    j["grid"] = res.grid;
    j["counts"] = res.counts;
    j["config"] = cfg.echo;
    rms::write_text_file(out_path(cfg, "tune.json"), j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_validate(const CommonOptions& opts, double q_override) {
  rms::ExperimentConfig cfg = load(opts);
  const double q = q_override > 0.0 ? q_override : cfg.quantile_q;
  const double u = cfg.thresholds.empty() ? cfg.importance_offset + 1.0 : cfg.thresholds.front().u;
  rms::RngStream rng(cfg.seed, 0x7a);
  rms::CollectOptions copts;
  copts.burn_in = cfg.estimation.burn_in;
  copts.first_crossing_budget = cfg.estimation.first_crossing_budget;
  rms::CollectResult collected =
      rms::collect_cycles(cfg.model, cfg.set, importance_for(cfg, u),
                          rms::State::Zero(cfg.model.dimension()), cfg.estimation.n_rec, rng, copts);
  const rms::QuantileValidation v = rms::quantile_validation(collected.store, q, cfg.seed);
  std::cout << "divergence=" << rms::format_double(v.divergence)
            << " null_threshold=" << rms::format_double(v.null_threshold)
            << " flagged=" << (v.flagged ? "yes" : "no") << "\n";
  if (cfg.write_json)
    rms::write_text_file(out_path(cfg, "validation.json"),
                         rms::validation_to_json(v, q).dump(2) + "\n");
  if (cfg.write_csv)
    rms::write_text_file(out_path(cfg, "histograms.csv"),
                         rms::validation_histograms_csv(collected.store, q));
  return kExitOk;
}

int cmd_pilot(const CommonOptions& opts) {
  rms::ExperimentConfig cfg = load(opts);
  require_thresholds(cfg);
  const double u = cfg.thresholds.front().u;
  const rms::ImportanceFunction h = importance_for(cfg, u);
  rms::RngStream rng(cfg.seed, 0x21);
  rms::CollectOptions copts;
  copts.burn_in = cfg.estimation.burn_in;
  copts.first_crossing_budget = cfg.estimation.first_crossing_budget;
  rms::CollectResult collected = rms::collect_cycles(
      cfg.model, cfg.set, h, rms::State::Zero(cfg.model.dimension()), cfg.estimation.n_rec, rng, copts);
  rms::PilotResult pilot =
      rms::run_pilot_fns(cfg.model, cfg.set, h, cfg.estimation.pilot_levels,
                         cfg.estimation.pilot_successes, rms::store_sampler(collected.store),
                         rng.child(1), cfg.estimation.stage_step_budget);
  rms::planner::OptimalPlanInputs in{pilot.p_b, pilot.re_r_plus,
                                     cfg.estimation.target_re_tb * cfg.estimation.target_re_tb};
  const rms::planner::OptimalPlanOutputs plan = rms::planner::optimal_plan(in);
  std::cout << "p_b=" << rms::format_double(pilot.p_b)
            << " t_b=" << rms::format_double(pilot.t_b)
            << " re_r_plus=" << rms::format_double(pilot.re_r_plus) << "\n";
  std::cout << "plan: m=" << plan.m << " n0=" << plan.n0 << " nk=" << plan.nk << " nm=" << plan.nm
            << " predicted_workload=" << rms::format_double(plan.workload) << "\n";
  if (cfg.write_json) {
    nlohmann::json j;
    j["schema"] = "rms-pilot-v1";
    j["p_b"] = pilot.p_b;
    j["t_b"] = pilot.t_b;
    j["mean_r_plus"] = pilot.mean_r_plus;
    j["re_r_plus"] = pilot.re_r_plus;
    j["levels"] = pilot.levels;
    j["level_probs"] = pilot.level_probs;
    j["cum_probs"] = pilot.cum_probs;
    j["plan"] = {{"m", plan.m},   {"n0", plan.n0}, {"nk", plan.nk},
                 {"nm", plan.nm}, {"c", plan.c},   {"predicted_workload", plan.workload}};
    j["config"] = cfg.echo;
    rms::write_text_file(out_path(cfg, "pilot.json"), j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_compare(const std::string& rms_path, const std::string& mc_path) {
  std::ifstream rin(rms_path);
  if (!rin) throw rms::ConfigError("compare: cannot open " + rms_path);
  std::ifstream min(mc_path);
  if (!min) throw rms::ConfigError("compare: cannot open " + mc_path);
  nlohmann::json rj = nlohmann::json::parse(rin);
  nlohmann::json mj = nlohmann::json::parse(min);
  if (mj.is_array()) {
    if (mj.empty()) throw rms::ConfigError("compare: the baseline file holds no runs");
    mj = mj.front();
  }
  const double re_rms = rj.at("re_gamma_mean").get<double>();
  const double w_rms = rj.at("workload").at("total").get<double>();
  const double re_mc = mj.at("re_gamma").get<double>();
  const double w_mc = mj.at("workload").get<double>();
  const double eff =
      rms::planner::efficiency_ratio(w_rms, re_rms * re_rms, w_mc, re_mc * re_mc);
  std::cout << "eff=" << rms::format_double(eff) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steady-state rare-event estimation by recurrent multilevel splitting"};
  app.require_subcommand(1);

  CommonOptions estimate_opts, mc_opts, oracle_opts, tune_opts, validate_opts, pilot_opts;
  double validate_q = 0.0;
  std::string compare_rms, compare_mc;

  add_common(app.add_subcommand("estimate", "full pipeline per threshold"), estimate_opts);
  add_common(app.add_subcommand("mc", "plain Monte Carlo baseline per threshold"), mc_opts);
  add_common(app.add_subcommand("oracle", "stationary covariance and exact tail for OU kinds"),
             oracle_opts);
  add_common(app.add_subcommand("tune-level", "recurrency-level grid search"), tune_opts);
  auto* validate = app.add_subcommand("validate", "quantile validation of the recurrency set");
  add_common(validate, validate_opts);
  validate->add_option("--q", validate_q, "top fraction by maximum importance");
  auto* pilot = app.add_subcommand("pilot", "pilot run and suggested plan only");
  add_common(pilot, pilot_opts);
  auto* compare = app.add_subcommand("compare", "efficiency ratio from two report files");
  compare->add_option("--rms", compare_rms, "estimate report (json)")->required();
  compare->add_option("--mc", compare_mc, "baseline report (json)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("estimate")) return cmd_estimate(estimate_opts);
    if (app.got_subcommand("mc")) return cmd_mc(mc_opts);
    if (app.got_subcommand("oracle")) return cmd_oracle(oracle_opts);
    if (app.got_subcommand("tune-level")) return cmd_tune_level(tune_opts);
    if (app.got_subcommand("validate")) return cmd_validate(validate_opts, validate_q);
    if (app.got_subcommand("pilot")) return cmd_pilot(pilot_opts);
    if (app.got_subcommand("compare")) return cmd_compare(compare_rms, compare_mc);
  } catch (const rms::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rms::BudgetExceededError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
