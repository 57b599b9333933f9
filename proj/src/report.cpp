#include "rms/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace rms {

namespace {

using nlohmann::json;

json vector_to_json(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

json vector_to_json(const std::vector<std::int64_t>& v) {
  json arr = json::array();
  for (auto x : v) arr.push_back(x);
  return arr;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json report_to_json(const RmsReport& r, const json& config_echo) {
  json j;
  j["schema"] = "rms-report-v1";
  j["seed"] = r.seed;
  j["u"] = r.u;
  j["gamma_hat"] = r.gamma_hat;
  j["alpha_hat"] = r.alpha_hat;
  j["alpha_pooled"] = r.alpha_pooled;
  j["alpha_pooled_re"] = r.alpha_pooled_re;
  j["tb_hat"] = r.tb_hat;
  j["re_gamma"] = r.re_gamma;
  j["re_alpha"] = r.re_alpha;
  j["re_tb"] = r.re_tb;
  j["re_gamma_mean"] = r.re_gamma_mean;
  j["independence_residual"] = r.independence_residual;
  j["residual_fraction"] = r.residual_fraction;
  j["re_tb_target"] = r.re_tb_target;
  j["re_tb_ratio"] = r.re_tb_ratio;
  j["assumption_warning"] = r.assumption_warning;

  j["pilot"] = {{"p_b", r.pilot.p_b},
                {"t_b", r.pilot.t_b},
                {"mean_r_plus", r.pilot.mean_r_plus},
                {"re_r_plus", r.pilot.re_r_plus},
                {"levels", vector_to_json(r.pilot.levels)},
                {"level_probs", vector_to_json(r.pilot.level_probs)},
                {"cum_probs", vector_to_json(r.pilot.cum_probs)},
                {"trials", vector_to_json(r.pilot.trials)},
                {"workload", r.pilot.workload}};

  j["plan"] = {{"m", r.plan_optima.m},
               {"m_real", r.plan_optima.m_real},
               {"c", r.plan_optima.c},
               {"p_stage", r.plan_optima.p_stage},
               {"n0", r.plan_optima.n0},
               {"n0_real", r.plan_optima.n0_real},
               {"nk", r.plan_optima.nk},
               {"nm", r.plan_optima.nm},
               {"nm_real", r.plan_optima.nm_real},
               {"predicted_workload", r.plan_optima.workload},
               {"levels", vector_to_json(r.plan.levels)},
               {"factors", vector_to_json(r.plan.factors)}};

  j["realized_level_probs"] = vector_to_json(r.realized_level_probs);

  json reps = json::array();
  for (const auto& rep : r.replicas)
    reps.push_back({{"gamma", rep.gamma},
                    {"alpha", rep.alpha},
                    {"t_b", rep.t_b},
                    {"workload", rep.workload}});
  j["replicas"] = reps;

  j["workload"] = {{"alpha", r.workload_alpha},
                   {"pilot", r.workload_pilot},
                   {"replicas", r.workload_replicas},
                   {"total", r.workload_total}};

  if (r.has_mc) {
    j["mc"] = {{"gamma", r.mc.gamma},
               {"re", r.mc.re},
               {"workload", r.mc.workload},
               {"batches", r.mc.batches},
               {"zero_hits", r.mc.zero_hits}};
    j["efficiency"] = r.efficiency;
  }
  j["config"] = config_echo;
  return j;
}

json mc_to_json(const McGammaResult& mc, double u, const json& config_echo) {
  json j;
  j["schema"] = "rms-mc-v1";
  j["u"] = u;
  j["gamma_hat"] = mc.gamma;
  j["re_gamma"] = mc.re;
  j["workload"] = mc.workload;
  j["batches"] = mc.batches;
  j["zero_hits"] = mc.zero_hits;
  j["config"] = config_echo;
  return j;
}

std::string table_csv(const std::vector<RmsReport>& rows) {
  std::string out = "# rms-table-v1\nu,gamma_hat,re_gamma,eff,re_tb\n";
  for (const auto& r : rows) {
    out += format_double(r.u);
    out += ',';
    out += format_double(r.gamma_hat);
    out += ',';
    out += format_double(r.re_gamma);
    out += ',';
    if (r.has_mc) out += format_double(r.efficiency);
    out += ',';
    out += format_double(r.re_tb);
    out += '\n';
  }
  return out;
}

json validation_to_json(const QuantileValidation& v, double q) {
  auto summary = [](const CoordinateSummary& s) {
    json out;
    out["count"] = s.count;
    json mean = json::array(), var = json::array();
    for (Eigen::Index i = 0; i < s.mean.size(); ++i) {
      mean.push_back(s.mean[i]);
      var.push_back(s.variance[i]);
    }
    out["mean"] = mean;
    out["variance"] = var;
    return out;
  };
  json j;
  j["schema"] = "rms-validation-v1";
  j["q"] = q;
  j["divergence"] = v.divergence;
  j["null_threshold"] = v.null_threshold;
  j["flagged"] = v.flagged;
  j["top_count"] = v.top_count;
  j["full"] = summary(v.full);
  j["top"] = summary(v.top);
  return j;
}

std::string validation_histograms_csv(const OriginStore& store, double q, int bins) {
  const auto& records = store.records();
  if (records.empty()) return "# rms-hist-v1\ncoordinate,bin_lo,bin_hi,density_full,density_top\n";
  const std::int64_t n = store.size();
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return records[static_cast<std::size_t>(a)].h_max < records[static_cast<std::size_t>(b)].h_max;
  });
  const std::int64_t top_count = n - static_cast<std::int64_t>(std::floor((1.0 - q) * n));
  std::vector<bool> in_top(static_cast<std::size_t>(n), false);
  for (auto it = order.end() - top_count; it != order.end(); ++it)
    in_top[static_cast<std::size_t>(*it)] = true;

  std::string out = "# rms-hist-v1\ncoordinate,bin_lo,bin_hi,density_full,density_top\n";
  const Eigen::Index d = records.front().origin.size();
  for (Eigen::Index c = 0; c < d; ++c) {
    double lo = records.front().origin[c], hi = lo;
    for (const auto& r : records) {
      lo = std::min(lo, r.origin[c]);
      hi = std::max(hi, r.origin[c]);
    }
    if (hi <= lo) hi = lo + 1.0;
    const double width = (hi - lo) / bins;
    std::vector<std::int64_t> full(static_cast<std::size_t>(bins), 0);
    std::vector<std::int64_t> top(static_cast<std::size_t>(bins), 0);
    for (std::int64_t i = 0; i < n; ++i) {
      const double x = records[static_cast<std::size_t>(i)].origin[c];
      int b = static_cast<int>((x - lo) / width);
      b = std::clamp(b, 0, bins - 1);
      ++full[static_cast<std::size_t>(b)];
      if (in_top[static_cast<std::size_t>(i)]) ++top[static_cast<std::size_t>(b)];
    }
    for (int b = 0; b < bins; ++b) {
      out += std::to_string(c);
      out += ',';
      out += format_double(lo + b * width);
      out += ',';
      out += format_double(lo + (b + 1) * width);
      out += ',';
      out += format_double(static_cast<double>(full[static_cast<std::size_t>(b)]) /
                           (static_cast<double>(n) * width));
      out += ',';
      out += format_double(static_cast<double>(top[static_cast<std::size_t>(b)]) /
                           (static_cast<double>(top_count) * width));
      out += '\n';
    }
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
}

}  // namespace rms
