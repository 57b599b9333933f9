#include "rms/alpha.hpp"

#include <cmath>
#include <stdexcept>

namespace rms {

BatchMeansResult alpha_batch_means(const ModelSpec& model, const RecurrencySet& a,
                                   const ImportanceFunction& h, const State& x0,
                                   std::int64_t total_steps, int batches, RngStream& rng,
                                   const BatchMeansOptions& opts) {
  if (batches < 2) throw std::invalid_argument("alpha_batch_means: need at least 2 batches");
  if (total_steps < batches)
    throw std::invalid_argument("alpha_batch_means: total_steps must be >= batches");

  BatchMeansResult result;
  State x = simulate_path(model, x0, opts.burn_in, rng, &result.alpha.workload);

  const std::int64_t block = total_steps / batches;
  CycleAccumulator acc(a, h, x);
  std::vector<std::int64_t> crossings(static_cast<std::size_t>(batches), 0);
  for (int k = 0; k < batches; ++k) {
    for (std::int64_t n = 0; n < block; ++n) {
      model.step_inplace(x, rng);
      if (acc.observe(x)) ++crossings[static_cast<std::size_t>(k)];
    }
  }
  result.alpha.workload += static_cast<std::uint64_t>(block) * static_cast<std::uint64_t>(batches);

  std::int64_t total = 0;
  for (auto c : crossings) total += c;
  if (total == 0)
    throw ZeroCrossingsError("alpha_batch_means: no inward crossing in any batch");

  result.alpha.batches = batches;
  result.alpha.batch_length = block;
  result.alpha.batch_values.resize(static_cast<std::size_t>(batches));
  double mean = 0.0;
  for (int k = 0; k < batches; ++k) {
    result.alpha.batch_values[static_cast<std::size_t>(k)] =
        static_cast<double>(crossings[static_cast<std::size_t>(k)]) / static_cast<double>(block);
    mean += result.alpha.batch_values[static_cast<std::size_t>(k)];
  }
  mean /= batches;
  double var = 0.0;
  for (double v : result.alpha.batch_values) var += (v - mean) * (v - mean);
  var /= (batches - 1);
  result.alpha.value = mean;
  result.alpha.re = std::sqrt(var / batches) / mean;

  for (auto& rec : acc.records()) result.origins.add(std::move(rec));
  result.final_state = x;
  return result;
}

AlphaEstimate alpha_exact_mc(const StationarySampler& sampler, const ModelSpec& model,
                             const RecurrencySet& a, std::int64_t pairs, RngStream& rng) {
  if (pairs < 1) throw std::invalid_argument("alpha_exact_mc: need at least one pair");
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < pairs; ++i) {
    const State x0 = sampler(rng);
    const State x1 = model.step(x0, rng);
    if (detect_inward_crossing(x0, x1, a)) ++hits;
  }
  AlphaEstimate est;
  est.value = static_cast<double>(hits) / static_cast<double>(pairs);
  est.batches = 0;
  est.batch_length = pairs;
  est.workload = static_cast<std::uint64_t>(pairs);
  if (hits > 0 && pairs > 1) {
    const double p = est.value;
    const double sample_var = p * (1.0 - p) * static_cast<double>(pairs) /
                              static_cast<double>(pairs - 1);
    est.re = std::sqrt(sample_var / static_cast<double>(pairs)) / p;
  }
  return est;
}

}  // namespace rms
