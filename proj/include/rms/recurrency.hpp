#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rms/errors.hpp"
#include "rms/model.hpp"
#include "rms/rng.hpp"

namespace rms {

// Importance map H: R^d -> [0, 1]. H(x) = 1 exactly on the rare set and
// H(x) = 0 at or below the offset level. The distance-based kind grades the
// first coordinate linearly between offset and the rare threshold u.
class ImportanceFunction {
 public:
  static ImportanceFunction distance(double u, double offset = 0.0);
  static ImportanceFunction custom(std::function<double(const State&)> h, double u);

  double operator()(const State& x) const {
    if (custom_) {
      const double v = custom_(x);
      return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    const double x1 = x[0];
    if (x1 <= offset_) return 0.0;
    if (x1 >= u_) return 1.0;
    return (x1 - offset_) / (u_ - offset_);
  }

  double rare_threshold() const { return u_; }
  double offset() const { return offset_; }

 private:
  ImportanceFunction() = default;
  double u_ = 1.0;
  double offset_ = 0.0;
  std::function<double(const State&)> custom_;
};

// Recurrency set whose inward crossings delimit cycles. Half-space kind is
// {x : x1 <= level}; the importance-level kind is {x : H(x) <= level}.
class RecurrencySet {
 public:
  static RecurrencySet half_space(double level);
  static RecurrencySet importance_level(ImportanceFunction h, double level);

  bool contains(const State& x) const {
    if (importance_) return (*importance_)(x) <= level_;
    return x[0] <= level_;
  }

  double level() const { return level_; }
  bool is_half_space() const { return !importance_.has_value(); }

 private:
  RecurrencySet() = default;
  double level_ = 0.0;
  std::optional<ImportanceFunction> importance_;
};

// True iff the transition prev -> cur enters the set from the outside.
inline bool detect_inward_crossing(const State& prev, const State& cur, const RecurrencySet& a) {
  return !a.contains(prev) && a.contains(cur);
}

struct CycleRecord {
  State origin;            // state at the opening inward crossing
  std::int64_t length = 0;     // observed steps until the next crossing
  std::int64_t time_in_b = 0;  // steps with importance 1 within the cycle
  double h_max = 0.0;          // maximum importance attained within the cycle
};

// Completed cycles in simulation order. Immutable once collected; shared
// read-only by all splitting replicas.
class OriginStore {
 public:
  void add(CycleRecord rec) { records_.push_back(std::move(rec)); }
  std::int64_t size() const { return static_cast<std::int64_t>(records_.size()); }
  const std::vector<CycleRecord>& records() const { return records_; }
  const State& sample(RngStream& rng) const;  // uniform with replacement
  double mean_length() const;
  std::int64_t total_length() const;
  std::int64_t total_time_in_b() const;

  // Versioned CSV table: one row per cycle with the d origin coordinates,
  // the cycle length, the time in B, and the maximum importance.
  void save_csv(const std::string& path) const;
  static OriginStore load_csv(const std::string& path);

 private:
  std::vector<CycleRecord> records_;
};

// Streamed cycle bookkeeping: feed observed states in order and completed
// records accumulate. The constructor takes the state preceding the window
// so the first transition can be classified.
class CycleAccumulator {
 public:
  CycleAccumulator(const RecurrencySet& a, const ImportanceFunction& h, const State& before_window)
      : a_(&a), h_(&h), prev_in_a_(a.contains(before_window)) {}

  // Returns true when x completes an inward crossing.
  bool observe(const State& x);

  bool in_cycle() const { return in_cycle_; }
  std::int64_t crossings() const { return crossings_; }
  std::vector<CycleRecord>& records() { return records_; }
  const std::vector<CycleRecord>& records() const { return records_; }

 private:
  const RecurrencySet* a_;
  const ImportanceFunction* h_;
  bool prev_in_a_;
  bool in_cycle_ = false;
  std::int64_t crossings_ = 0;
  CycleRecord open_;
  std::vector<CycleRecord> records_;
};

struct CollectOptions {
  std::int64_t burn_in = 10000;
  std::int64_t first_crossing_budget = 10'000'000;
};

struct CollectResult {
  OriginStore store;
  State final_state;
  std::uint64_t workload = 0;   // observed steps simulated, burn-in included
  std::int64_t spanned_steps = 0;  // steps between first and last crossing
};

// Simulates until `target_cycles` completed cycles have been recorded after
// burn-in. Throws BudgetExceededError if no crossing occurs within the
// first-crossing budget.
CollectResult collect_cycles(const ModelSpec& model, const RecurrencySet& a,
                             const ImportanceFunction& h, const State& x0,
                             std::int64_t target_cycles, RngStream& rng,
                             const CollectOptions& opts = {});

struct LevelSearchResult {
  std::vector<double> grid;
  std::vector<std::int64_t> counts;
  double best_level = 0.0;
  std::int64_t best_count = 0;
  bool zero_crossings = false;
};

// Counts inward crossings of the half-space family A(l) = {x1 <= l} along a
// path, one count per grid level; feed first coordinates in path order.
class CrossingCounter {
 public:
  explicit CrossingCounter(std::vector<double> grid);
  void observe(double x1);
  LevelSearchResult result() const;  // smallest maximizer wins ties

 private:
  std::vector<double> grid_;  // ascending
  std::vector<std::int64_t> counts_;
  double prev_ = 0.0;
  bool have_prev_ = false;
};

// Grid search for the recurrency level maximizing the crossing count over a
// recorded first-coordinate trace.
LevelSearchResult optimize_recurrency_level(const std::vector<double>& first_coordinate_trace,
                                            std::vector<double> grid);

struct CoordinateSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  std::int64_t count = 0;
};

struct QuantileValidation {
  CoordinateSummary full;  // all cycle origins
  CoordinateSummary top;   // origins of the top-q fraction by max importance
  double divergence = 0.0;      // max over coordinates of the two-sample KS statistic
  double null_threshold = 0.0;  // 99th percentile of the same statistic on random subsets
  bool flagged = false;
  std::int64_t top_count = 0;
};

// Compares the origins of the highest-importance cycles against all origins.
// Under a well-chosen recurrency set the two samples share a distribution;
// the null threshold is calibrated from seeded random subsets of equal size.
QuantileValidation quantile_validation(const OriginStore& store, double q,
                                       std::uint64_t seed = 0, int null_samples = 200);

}  // namespace rms
