#pragma once

#include <span>
#include <vector>

namespace varx::sampler {

struct BatchMeans {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t batch_size = 0;
  std::size_t batches = 0;
};

/// Batch-means Monte Carlo standard error with batch size floor(sqrt(N)).
/// Trailing draws that do not fill a batch are dropped from the variance
/// estimate but not from the mean.
BatchMeans batch_means(std::span<const double> series);

/// Potential scale reduction factor sqrt(((N-1)/N W + B/N) / W) over chains of
/// equal length.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

}  // namespace varx::sampler
