#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rms/model.hpp"
#include "rms/recurrency.hpp"
#include "rms/rng.hpp"

namespace rms {

// Estimate of the frequency of recurrence: the stationary probability of an
// inward crossing in one observed step.
struct AlphaEstimate {
  double value = 0.0;
  double re = 0.0;  // relative standard error of the estimate
  int batches = 0;
  std::int64_t batch_length = 0;
  std::uint64_t workload = 0;
  std::vector<double> batch_values;
};

struct BatchMeansOptions {
  std::int64_t burn_in = 10000;
};

struct BatchMeansResult {
  AlphaEstimate alpha;
  OriginStore origins;  // cycles recorded in the same pass
  State final_state;
};

// Batch-means estimator on one long path: the post-burn-in window is split
// into `batches` blocks of equal length, the per-block crossing frequency is
// averaged, and the relative error comes from the between-block sample
// variance (Student-t with batches - 1 degrees of freedom as reference law).
// Crossings are attributed to the block containing the entry step. Throws
// ZeroCrossingsError when no block records a crossing.
BatchMeansResult alpha_batch_means(const ModelSpec& model, const RecurrencySet& a,
                                   const ImportanceFunction& h, const State& x0,
                                   std::int64_t total_steps, int batches, RngStream& rng,
                                   const BatchMeansOptions& opts = {});

using StationarySampler = std::function<State(RngStream&)>;

// Exact-sampling Monte Carlo estimator: `pairs` independent draws of a
// stationary state and its successor; unbiased, with the binomial relative
// error. Usable only where an exact stationary sampler exists.
AlphaEstimate alpha_exact_mc(const StationarySampler& sampler, const ModelSpec& model,
                             const RecurrencySet& a, std::int64_t pairs, RngStream& rng);

}  // namespace rms
