#include "rms/recurrency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rms {

ImportanceFunction ImportanceFunction::distance(double u, double offset) {
  if (!(u > offset))
    throw std::invalid_argument("distance importance: rare threshold must exceed the offset");
  ImportanceFunction h;
  h.u_ = u;
  h.offset_ = offset;
  return h;
}

ImportanceFunction ImportanceFunction::custom(std::function<double(const State&)> h, double u) {
  if (!h) throw std::invalid_argument("custom importance: callable required");
  ImportanceFunction f;
  f.custom_ = std::move(h);
  f.u_ = u;
  return f;
}

RecurrencySet RecurrencySet::half_space(double level) {
  RecurrencySet a;
  a.level_ = level;
  return a;
}

RecurrencySet RecurrencySet::importance_level(ImportanceFunction h, double level) {
  RecurrencySet a;
  a.level_ = level;
  a.importance_ = std::move(h);
  return a;
}

const State& OriginStore::sample(RngStream& rng) const {
  if (records_.empty()) throw std::logic_error("OriginStore::sample: store is empty");
  return records_[static_cast<std::size_t>(rng.uniform_below(size()))].origin;
}

std::int64_t OriginStore::total_length() const {
  std::int64_t sum = 0;
  for (const auto& r : records_) sum += r.length;
  return sum;
}

std::int64_t OriginStore::total_time_in_b() const {
  std::int64_t sum = 0;
  for (const auto& r : records_) sum += r.time_in_b;
  return sum;
}

double OriginStore::mean_length() const {
  if (records_.empty()) return 0.0;
  return static_cast<double>(total_length()) / static_cast<double>(size());
}

void OriginStore::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const int d = records_.empty() ? 0 : static_cast<int>(records_.front().origin.size());
  out << "# rms-origins-v1 d=" << d << "\n";
  for (int i = 0; i < d; ++i) out << "x" << i << ",";
  out << "length,time_in_b,h_max\n";
  char buf[64];
  for (const auto& r : records_) {
    for (int i = 0; i < d; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", r.origin[i]);
      out << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", r.h_max);
    out << r.length << "," << r.time_in_b << "," << buf << "\n";
  }
}

OriginStore OriginStore::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# rms-origins-v1", 0) != 0)
    throw std::runtime_error(path + ": not an rms-origins-v1 file");
  int d = 0;
  const auto pos = line.find("d=");
  if (pos == std::string::npos || std::sscanf(line.c_str() + pos, "d=%d", &d) != 1 || d < 1)
    throw std::runtime_error(path + ": malformed dimension header");
  std::getline(in, line);  // column header
  OriginStore store;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    CycleRecord rec;
    rec.origin.resize(d);
    for (int i = 0; i < d; ++i) {
      if (!std::getline(ss, cell, ',')) throw std::runtime_error(path + ": truncated row");
      rec.origin[i] = std::stod(cell);
    }
    if (!std::getline(ss, cell, ',')) throw std::runtime_error(path + ": truncated row");
    rec.length = std::stoll(cell);
    if (!std::getline(ss, cell, ',')) throw std::runtime_error(path + ": truncated row");
    rec.time_in_b = std::stoll(cell);
    if (!std::getline(ss, cell, ',')) throw std::runtime_error(path + ": truncated row");
    rec.h_max = std::stod(cell);
    store.add(std::move(rec));
  }
  return store;
}

bool CycleAccumulator::observe(const State& x) {
  const bool in_a = a_->contains(x);
  const bool crossing = !prev_in_a_ && in_a;
  prev_in_a_ = in_a;
  if (crossing) {
    ++crossings_;
    if (in_cycle_) records_.push_back(std::move(open_));
    open_ = CycleRecord{};
    open_.origin = x;
    in_cycle_ = true;
  }
  if (in_cycle_) {
    // The state at a crossing belongs to the cycle it opens.
    open_.length += 1;
    const double importance = (*h_)(x);
    if (importance >= 1.0) open_.time_in_b += 1;
    if (importance > open_.h_max) open_.h_max = importance;
  }
  return crossing;
}

CollectResult collect_cycles(const ModelSpec& model, const RecurrencySet& a,
                             const ImportanceFunction& h, const State& x0,
                             std::int64_t target_cycles, RngStream& rng,
                             const CollectOptions& opts) {
  if (target_cycles < 1)
    throw std::invalid_argument("collect_cycles: target_cycles must be >= 1");
  CollectResult result;
  State x = simulate_path(model, x0, opts.burn_in, rng, &result.workload);

  CycleAccumulator acc(a, h, x);
  std::int64_t since_start = 0;
  // Wait for the first crossing within the budget.
  while (acc.crossings() == 0) {
    if (since_start >= opts.first_crossing_budget)
      throw BudgetExceededError("collect_cycles: no inward crossing within " +
                                std::to_string(opts.first_crossing_budget) +
                                " observed steps; the recurrency set is likely misplaced");
    model.step_inplace(x, rng);
    ++since_start;
    ++result.workload;
    acc.observe(x);
  }
  const std::int64_t first_crossing_step = since_start;
  while (static_cast<std::int64_t>(acc.records().size()) < target_cycles) {
    model.step_inplace(x, rng);
    ++since_start;
    ++result.workload;
    acc.observe(x);
  }
  result.spanned_steps = since_start - first_crossing_step;
  for (auto& rec : acc.records()) result.store.add(std::move(rec));
  result.final_state = x;
  return result;
}

CrossingCounter::CrossingCounter(std::vector<double> grid) : grid_(std::move(grid)) {
  if (grid_.empty()) throw std::invalid_argument("CrossingCounter: grid must be non-empty");
  std::sort(grid_.begin(), grid_.end());
  counts_.assign(grid_.size(), 0);
}

void CrossingCounter::observe(double x1) {
  if (have_prev_) {
    // A(l) is entered inward at this step iff cur <= l < prev.
    if (x1 < prev_) {
      const auto lo = std::lower_bound(grid_.begin(), grid_.end(), x1);
      const auto hi = std::lower_bound(grid_.begin(), grid_.end(), prev_);
      for (auto it = lo; it != hi; ++it) ++counts_[static_cast<std::size_t>(it - grid_.begin())];
    }
  }
  prev_ = x1;
  have_prev_ = true;
}

LevelSearchResult CrossingCounter::result() const {
  LevelSearchResult res;
  res.grid = grid_;
  res.counts = counts_;
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts_.size(); ++i)
    if (counts_[i] > counts_[best]) best = i;  // strict: ties keep the smaller level
  res.best_level = grid_[best];
  res.best_count = counts_[best];
  res.zero_crossings = (res.best_count == 0);
  return res;
}

LevelSearchResult optimize_recurrency_level(const std::vector<double>& first_coordinate_trace,
                                            std::vector<double> grid) {
  if (first_coordinate_trace.size() < 2)
    throw std::invalid_argument("optimize_recurrency_level: trace needs at least two states");
  CrossingCounter counter(std::move(grid));
  for (double x1 : first_coordinate_trace) counter.observe(x1);
  return counter.result();
}

namespace {

CoordinateSummary summarize(const std::vector<CycleRecord>& records,
                            const std::vector<std::int64_t>& idx) {
  CoordinateSummary s;
  const Eigen::Index d = records.empty() ? 0 : records.front().origin.size();
  s.mean = Eigen::VectorXd::Zero(d);
  s.variance = Eigen::VectorXd::Zero(d);
  s.count = static_cast<std::int64_t>(idx.size());
  if (idx.empty()) return s;
  for (auto i : idx) s.mean += records[static_cast<std::size_t>(i)].origin;
  s.mean /= static_cast<double>(idx.size());
  if (idx.size() > 1) {
    for (auto i : idx) {
      const Eigen::VectorXd dev = records[static_cast<std::size_t>(i)].origin - s.mean;
      s.variance += dev.cwiseProduct(dev);
    }
    s.variance /= static_cast<double>(idx.size() - 1);
  }
  return s;
}

// Two-sample Kolmogorov-Smirnov statistic on already-sorted samples.
double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  std::size_t i = 0, j = 0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double max_coordinate_ks(const std::vector<CycleRecord>& records,
                         const std::vector<std::int64_t>& subset,
                         const std::vector<std::vector<double>>& full_sorted) {
  const Eigen::Index d = records.front().origin.size();
  double worst = 0.0;
  std::vector<double> coord(subset.size());
  for (Eigen::Index c = 0; c < d; ++c) {
    for (std::size_t k = 0; k < subset.size(); ++k)
      coord[k] = records[static_cast<std::size_t>(subset[k])].origin[c];
    std::sort(coord.begin(), coord.end());
    worst = std::max(worst, ks_statistic(coord, full_sorted[static_cast<std::size_t>(c)]));
  }
  return worst;
}

}  // namespace

QuantileValidation quantile_validation(const OriginStore& store, double q, std::uint64_t seed,
                                       int null_samples) {
  if (!(q > 0.0 && q <= 1.0))
    throw std::invalid_argument("quantile_validation: q must lie in (0, 1]");
  const std::int64_t n = store.size();
  if (n < static_cast<std::int64_t>(std::ceil(1.0 / q)))
    throw std::invalid_argument("quantile_validation: store smaller than 1/q");
  const std::int64_t top_count = n - static_cast<std::int64_t>(std::floor((1.0 - q) * n));
  if (static_cast<std::int64_t>(std::ceil(q * static_cast<double>(n))) < 30)
    throw InsufficientSamplesError("quantile_validation: top-q subset would hold fewer than 30 "
                                   "cycles; collect more crossings or increase q");

  const auto& records = store.records();
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return records[static_cast<std::size_t>(a)].h_max < records[static_cast<std::size_t>(b)].h_max;
  });

  std::vector<std::int64_t> all = order;
  std::vector<std::int64_t> top(order.end() - top_count, order.end());

  const Eigen::Index d = records.front().origin.size();
  std::vector<std::vector<double>> full_sorted(static_cast<std::size_t>(d));
  for (Eigen::Index c = 0; c < d; ++c) {
    auto& col = full_sorted[static_cast<std::size_t>(c)];
    col.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
      col[static_cast<std::size_t>(i)] = records[static_cast<std::size_t>(i)].origin[c];
    std::sort(col.begin(), col.end());
  }

  QuantileValidation result;
  result.full = summarize(records, all);
  result.top = summarize(records, top);
  result.top_count = top_count;
  result.divergence = (top_count == n) ? 0.0 : max_coordinate_ks(records, top, full_sorted);

  // Null distribution: the same statistic for random subsets of equal size.
  RngStream rng(seed, 0x7156);
  std::vector<double> null_stats;
  null_stats.reserve(static_cast<std::size_t>(null_samples));
  std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
  for (int b = 0; b < null_samples; ++b) {
    std::iota(pool.begin(), pool.end(), 0);
    for (std::int64_t k = 0; k < top_count; ++k) {
      const std::int64_t j = k + rng.uniform_below(n - k);
      std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(j)]);
    }
    std::vector<std::int64_t> subset(pool.begin(), pool.begin() + top_count);
    null_stats.push_back(top_count == n ? 0.0 : max_coordinate_ks(records, subset, full_sorted));
  }
  std::sort(null_stats.begin(), null_stats.end());
  const std::size_t idx99 =
      std::min(null_stats.size() - 1,
               static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(null_stats.size()))) -
                   1);
  result.null_threshold = null_stats.empty() ? 0.0 : null_stats[idx99];
  result.flagged = result.divergence > result.null_threshold;
  return result;
}

}  // namespace rms
