#include "rms/config.hpp"

#include <fstream>

#include "rms/errors.hpp"
#include "rms/oracle.hpp"

namespace rms {

namespace {

using nlohmann::json;

const json& need(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("config: missing field " + where + "." + key);
  return *it;
}

double get_number(const json& j, const std::string& key, const std::string& where, double fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw ConfigError("config: " + where + "." + key + " must be a number");
  return it->get<double>();
}

std::int64_t get_int(const json& j, const std::string& key, const std::string& where,
                     std::int64_t fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer())
    throw ConfigError("config: " + where + "." + key + " must be an integer");
  return it->get<std::int64_t>();
}

ModelSpec parse_model(const json& m) {
  const std::string kind = need(m, "kind", "model").get<std::string>();
  const int stride = static_cast<int>(get_int(m, "stride", "model", kind == "franzke" ? 100 : 1));
  const double h0 = get_number(m, "h0", "model", kind == "franzke" ? 1e-4 : 0.01);
  if (kind == "ou1d") {
    return ModelSpec::ou1d(get_number(m, "q", "model", 1.0), h0, stride);
  }
  if (kind == "ou") {
    const json& rows = need(m, "drift", "model");
    if (!rows.is_array() || rows.empty())
      throw ConfigError("config: model.drift must be a non-empty array of rows");
    const int d = static_cast<int>(rows.size());
    Eigen::MatrixXd q(d, d);
    for (int i = 0; i < d; ++i) {
      if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != d)
        throw ConfigError("config: model.drift row " + std::to_string(i) + " must hold " +
                          std::to_string(d) + " numbers");
      for (int j = 0; j < d; ++j) q(i, j) = rows[i][j].get<double>();
    }
    return ModelSpec::ou(q, h0, stride);
  }
  if (kind == "ou-spiral") {
    return ModelSpec::ou_spiral(need(m, "theta", "model").get<double>(), h0, stride);
  }
  if (kind == "franzke") {
    FranzkeParams p;
    if (auto it = m.find("franzke"); it != m.end()) {
      const json& f = *it;
      p.mu = get_number(f, "mu", "model.franzke", p.mu);
      p.eps = get_number(f, "eps", "model.franzke", p.eps);
      p.gamma1 = get_number(f, "gamma1", "model.franzke", p.gamma1);
      p.gamma2 = get_number(f, "gamma2", "model.franzke", p.gamma2);
      p.sigma1 = get_number(f, "sigma1", "model.franzke", p.sigma1);
      p.sigma2 = get_number(f, "sigma2", "model.franzke", p.sigma2);
      if (auto fo = f.find("forcing"); fo != f.end()) {
        if (!fo->is_array() || fo->size() != 4)
          throw ConfigError("config: model.franzke.forcing must hold 4 numbers");
        for (int i = 0; i < 4; ++i) p.forcing[i] = (*fo)[i].get<double>();
      }
    }
    return ModelSpec::franzke(h0, stride, p);
  }
  throw ConfigError("config: unknown model.kind '" + kind +
                    "' (expected ou1d, ou, ou-spiral, or franzke)");
}

json model_echo(const ModelSpec& m) {
  json out;
  switch (m.kind()) {
    case ModelKind::Ou1d:
      out["kind"] = "ou1d";
      out["q"] = m.drift()(0, 0);
      break;
    case ModelKind::Ou: {
      out["kind"] = "ou";
      json rows = json::array();
      for (int i = 0; i < m.dimension(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.dimension(); ++j) row.push_back(m.drift()(i, j));
        rows.push_back(row);
      }
      out["drift"] = rows;
      break;
    }
    case ModelKind::OuSpiral:
      out["kind"] = "ou-spiral";
      out["theta"] = m.theta();
      break;
    case ModelKind::Franzke: {
      out["kind"] = "franzke";
      const FranzkeParams& p = m.franzke_params();
      out["franzke"] = {{"mu", p.mu},         {"eps", p.eps},       {"gamma1", p.gamma1},
                        {"gamma2", p.gamma2}, {"sigma1", p.sigma1}, {"sigma2", p.sigma2},
                        {"forcing", {p.forcing[0], p.forcing[1], p.forcing[2], p.forcing[3]}}};
      break;
    }
    case ModelKind::Custom:
      out["kind"] = "custom";
      break;
  }
  out["h0"] = m.h0();
  out["stride"] = m.stride();
  return out;
}

}  // namespace

std::vector<double> LevelGrid::values() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(count == 1 ? min : min + (max - min) * i / (count - 1));
  return out;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_integer()) throw ConfigError("config: seed must be an integer");
    cfg.seed = it->get<std::uint64_t>();
    cfg.seed_given = true;
  }

  cfg.model = parse_model(need(j, "model", "<root>"));

  const json& rec = need(j, "recurrency", "<root>");
  if (auto it = rec.find("set"); it != rec.end()) {
    const std::string kind = need(*it, "kind", "recurrency.set").get<std::string>();
    const double level = get_number(*it, "level", "recurrency.set", 0.0);
    if (kind == "half-space")
      cfg.set = RecurrencySet::half_space(level);
    else
      throw ConfigError("config: recurrency.set.kind '" + kind +
                        "' is not supported in files (use half-space)");
  }
  if (auto it = rec.find("importance"); it != rec.end()) {
    const std::string kind = need(*it, "kind", "recurrency.importance").get<std::string>();
    if (kind != "distance")
      throw ConfigError("config: recurrency.importance.kind must be 'distance' in files");
    cfg.importance_offset = get_number(*it, "offset", "recurrency.importance", 0.0);
  }
  if (auto it = rec.find("u_values"); it != rec.end()) {
    if (!it->is_array()) throw ConfigError("config: recurrency.u_values must be an array");
    for (const auto& v : *it) cfg.thresholds.push_back({v.get<double>(), std::nullopt});
  }
  if (auto it = rec.find("gamma_targets"); it != rec.end()) {
    if (!it->is_array()) throw ConfigError("config: recurrency.gamma_targets must be an array");
    if (cfg.model.kind() == ModelKind::Franzke)
      throw ConfigError("config: gamma_targets needs the OU oracle; give u_values for franzke");
    const StationaryCovariance cov =
        solve_stationary_covariance(cfg.model.drift(), cfg.model.h0());
    for (const auto& v : *it) {
      const double g = v.get<double>();
      cfg.thresholds.push_back({invert_gamma(cov, g), g});
    }
  }
  if (auto it = rec.find("level_grid"); it != rec.end()) {
    LevelGrid grid;
    grid.min = need(*it, "min", "recurrency.level_grid").get<double>();
    grid.max = need(*it, "max", "recurrency.level_grid").get<double>();
    grid.count = static_cast<int>(need(*it, "count", "recurrency.level_grid").get<std::int64_t>());
    if (grid.count < 1 || !(grid.max >= grid.min))
      throw ConfigError("config: recurrency.level_grid must satisfy count >= 1 and max >= min");
    cfg.level_grid = grid;
  }

  if (auto it = j.find("estimation"); it != j.end()) {
    const json& e = *it;
    EstimationSettings& s = cfg.estimation;
    s.target_re_tb = get_number(e, "target_re_tb", "estimation", s.target_re_tb);
    s.replicas = static_cast<int>(get_int(e, "replicas", "estimation", s.replicas));
    s.n_rec = get_int(e, "n_rec", "estimation", s.n_rec);
    s.replica_alpha_crossings =
        get_int(e, "replica_alpha_crossings", "estimation", s.replica_alpha_crossings);
    s.pilot_levels = static_cast<int>(get_int(e, "pilot_levels", "estimation", s.pilot_levels));
    s.pilot_successes =
        static_cast<int>(get_int(e, "pilot_successes", "estimation", s.pilot_successes));
    s.batches = static_cast<int>(get_int(e, "batches", "estimation", s.batches));
    s.burn_in = get_int(e, "burn_in", "estimation", s.burn_in);
    s.stage_step_budget = get_int(e, "stage_step_budget", "estimation", s.stage_step_budget);
    s.first_crossing_budget =
        get_int(e, "first_crossing_budget", "estimation", s.first_crossing_budget);
    s.r_plus_cap = get_int(e, "r_plus_cap", "estimation", s.r_plus_cap);
    cfg.attach_mc = e.value("attach_mc", cfg.attach_mc);
    cfg.mc_steps = get_int(e, "mc_steps", "estimation", cfg.mc_steps);
    cfg.mc_batches = static_cast<int>(get_int(e, "mc_batches", "estimation", cfg.mc_batches));
    cfg.quantile_q = get_number(e, "quantile_q", "estimation", cfg.quantile_q);
    cfg.tune_steps = get_int(e, "tune_steps", "estimation", cfg.tune_steps);
  }

  if (auto it = j.find("output"); it != j.end()) {
    const json& o = *it;
    cfg.out_dir = o.value("dir", cfg.out_dir);
    cfg.prefix = o.value("prefix", cfg.prefix);
    if (auto f = o.find("formats"); f != o.end()) {
      cfg.write_json = false;
      cfg.write_csv = false;
      for (const auto& v : *f) {
        const std::string fmt = v.get<std::string>();
        if (fmt == "json")
          cfg.write_json = true;
        else if (fmt == "csv")
          cfg.write_csv = true;
        else
          throw ConfigError("config: output.formats entries must be 'json' or 'csv'");
      }
    }
  }

  // Defaults-filled echo for provenance; reports embed it verbatim.
  json echo;
  echo["seed"] = cfg.seed;
  echo["model"] = model_echo(cfg.model);
  json rec_echo;
  rec_echo["set"] = {{"kind", "half-space"}, {"level", cfg.set.level()}};
  rec_echo["importance"] = {{"kind", "distance"}, {"offset", cfg.importance_offset}};
  json us = json::array();
  json gs = json::array();
  for (const auto& t : cfg.thresholds) {
    us.push_back(t.u);
    if (t.gamma_target) gs.push_back(*t.gamma_target);
  }
  rec_echo["u_values"] = us;
  if (!gs.empty()) rec_echo["gamma_targets"] = gs;
  if (cfg.level_grid)
    rec_echo["level_grid"] = {{"min", cfg.level_grid->min},
                              {"max", cfg.level_grid->max},
                              {"count", cfg.level_grid->count}};
  echo["recurrency"] = rec_echo;
  echo["estimation"] = {{"target_re_tb", cfg.estimation.target_re_tb},
                        {"replicas", cfg.estimation.replicas},
                        {"n_rec", cfg.estimation.n_rec},
                        {"replica_alpha_crossings", cfg.estimation.replica_alpha_crossings},
                        {"pilot_levels", cfg.estimation.pilot_levels},
                        {"pilot_successes", cfg.estimation.pilot_successes},
                        {"batches", cfg.estimation.batches},
                        {"burn_in", cfg.estimation.burn_in},
                        {"stage_step_budget", cfg.estimation.stage_step_budget},
                        {"first_crossing_budget", cfg.estimation.first_crossing_budget},
                        {"r_plus_cap", cfg.estimation.r_plus_cap},
                        {"attach_mc", cfg.attach_mc},
                        {"mc_steps", cfg.mc_steps},
                        {"mc_batches", cfg.mc_batches},
                        {"quantile_q", cfg.quantile_q},
                        {"tune_steps", cfg.tune_steps}};
  json formats = json::array();
  if (cfg.write_json) formats.push_back("json");
  if (cfg.write_csv) formats.push_back("csv");
  echo["output"] = {{"dir", cfg.out_dir}, {"prefix", cfg.prefix}, {"formats", formats}};
  cfg.echo = echo;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
}

}  // namespace rms
