#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "rms/driver.hpp"
#include "rms/recurrency.hpp"

namespace rms {

// 17 significant digits; round-trips doubles exactly.
std::string format_double(double v);

nlohmann::json report_to_json(const RmsReport& report, const nlohmann::json& config_echo);

nlohmann::json mc_to_json(const McGammaResult& mc, double u, const nlohmann::json& config_echo);

// Table with one row per threshold: u, gamma_hat, re_gamma, eff, re_tb.
// The eff column stays empty for runs without an attached baseline.
std::string table_csv(const std::vector<RmsReport>& rows);

nlohmann::json validation_to_json(const QuantileValidation& v, double q);

// Normalized per-coordinate histograms of all origins versus the top-q
// origins, long format: coordinate, bin_lo, bin_hi, density_full, density_top.
std::string validation_histograms_csv(const OriginStore& store, double q, int bins = 40);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace rms
