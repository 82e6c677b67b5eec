#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "natfx/dataset.hpp"
#include "natfx/decomp.hpp"

namespace natfx {

struct BootstrapConfig {
  std::size_t replicates = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
  double max_fail = 0.01;  // tolerated fraction of failed replicates
  unsigned workers = 1;    // 0 = hardware concurrency

  void validate() const;  // throws InvalidArgument
};

using Estimator = std::function<DecompositionResult(const Dataset&)>;

struct BootstrapResult {
  DecompositionResult result;  // full-data estimates with percentile CIs
  std::size_t replicates = 0;
  std::size_t failed = 0;
  /// Replicate estimates per component, by replicate index (failed ones
  /// removed), same order as result.components.
  std::vector<std::vector<double>> draws;
};

/// Row indices of resample `replicate`; depends only on (seed, replicate, n).
std::vector<std::size_t> resample_indices(std::uint64_t seed, std::size_t replicate, std::size_t n);

/// Percentile bootstrap. The estimator must be safe to call concurrently.
/// Throws TooManyFailedReplicates when more than max_fail * B replicates
/// throw; errors on the full data propagate unchanged.
BootstrapResult bootstrap(const Dataset& data, const Estimator& estimator,
                          const BootstrapConfig& cfg);

/// Linear-interpolation quantile of sorted values (Hyndman-Fan type 7).
double quantile_sorted(const std::vector<double>& sorted, double prob);

}  // namespace natfx
