#include "varx/chain_stats.hpp"

#include <cmath>
#include <numeric>

#include "varx/error.hpp"

namespace varx::sampler {

BatchMeans batch_means(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) throw DimensionError("batch_means: need at least 4 draws");
  BatchMeans out;
  out.mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  out.batch_size = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  out.batches = n / out.batch_size;
  const std::size_t used = out.batches * out.batch_size;
  const double used_mean =
      std::accumulate(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(used), 0.0) /
      static_cast<double>(used);
  double ss = 0.0;
  for (std::size_t k = 0; k < out.batches; ++k) {
    const auto first = series.begin() + static_cast<std::ptrdiff_t>(k * out.batch_size);
    const double m = std::accumulate(first, first + static_cast<std::ptrdiff_t>(out.batch_size), 0.0) /
                     static_cast<double>(out.batch_size);
    ss += (m - used_mean) * (m - used_mean);
  }
  const double sigma2 =
      static_cast<double>(out.batch_size) * ss / static_cast<double>(out.batches - 1);
  out.std_error = std::sqrt(sigma2 / static_cast<double>(used));
  return out;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw DimensionError("gelman_rubin: need at least two chains");
  const std::size_t n = chains.front().size();
  if (n < 2) throw DimensionError("gelman_rubin: chains too short");
  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (chains[j].size() != n) throw DimensionError("gelman_rubin: chains differ in length");
    means[j] = std::accumulate(chains[j].begin(), chains[j].end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : chains[j]) ss += (v - means[j]) * (v - means[j]);
    vars[j] = ss / static_cast<double>(n - 1);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
  double between = 0.0;
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between *= static_cast<double>(n) / static_cast<double>(m - 1);
  const double within = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double pooled = (nd - 1.0) / nd * within + between / nd;
  return std::sqrt(pooled / within);
}

}  // namespace varx::sampler
