#pragma once

// Samplers and densities for the conditional families used by the collapsed
// Gibbs sampler: inverse Wishart, matrix normal, and a Gaussian given by its
// precision matrix and shift (canonical parameters).

#include <cstdint>
#include <random>

#include "varx/linalg.hpp"

namespace varx::dist {

using linalg::Mat;
using linalg::SpdMat;
using linalg::Vec;

/// Seedable random stream. The engine is a 64-bit Mersenne twister whose state
/// is initialized from std::seed_seq over the four 32-bit halves of
/// (seed, stream), so each (seed, stream) pair selects its own sequence and
/// identical pairs reproduce identical draws.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double normal();
  double uniform(double lo, double hi);
  double chi_squared(double dof);
  Vec normal_vec(linalg::Index n);
  Mat normal_mat(linalg::Index rows, linalg::Index cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// W^{-1}(scale, dof): density proportional to
/// |S|^{-(dof + r + 1)/2} etr(-S^{-1} scale / 2), normalized by
/// |scale|^{dof/2} / (2^{dof r / 2} Gamma_r(dof / 2)).
struct InvWishart {
  InvWishart(SpdMat scale, double dof);

  SpdMat scale;
  double dof;

  linalg::Index dim() const { return scale.dim(); }
};

/// Matrix normal: vec of a draw is N(vec(mean), col_scale (x) row_scale).
struct MatrixNormal {
  MatrixNormal(Mat mean, SpdMat row_scale, SpdMat col_scale);

  Mat mean;
  SpdMat row_scale;
  SpdMat col_scale;
};

/// N(precision^{-1} shift, precision^{-1}).
struct PrecisionGaussian {
  PrecisionGaussian(SpdMat precision, Vec shift);

  SpdMat precision;
  Vec shift;

  Vec mean() const { return precision.solve(shift); }
};

SpdMat draw_inv_wishart(const InvWishart& d, RngStream& rng);
Mat draw_matrix_normal(const MatrixNormal& d, RngStream& rng);
Vec draw_precision_gaussian(const PrecisionGaussian& d, RngStream& rng);

double logpdf_inv_wishart(const InvWishart& d, const SpdMat& x);

/// log Gamma_r(x), the multivariate gamma function.
double log_multigamma(double x, linalg::Index r);

}  // namespace varx::dist
