#include "varx/distributions.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "varx/error.hpp"

namespace varx::dist {

using linalg::Index;

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream),
                       static_cast<std::uint32_t>(stream >> 32)};
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  auto seq = make_seed_seq(seed, stream);
  engine_.seed(seq);
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double RngStream::chi_squared(double dof) {
  return std::chi_squared_distribution<double>(dof)(engine_);
}

Vec RngStream::normal_vec(Index n) {
  Vec z(n);
  for (Index i = 0; i < n; ++i) z(i) = normal();
  return z;
}

Mat RngStream::normal_mat(Index rows, Index cols) {
  Mat z(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) z(i, j) = normal();
  }
  return z;
}

InvWishart::InvWishart(SpdMat s, double c) : scale(std::move(s)), dof(c) {
  if (!(dof > static_cast<double>(scale.dim()) - 1.0)) {
    std::ostringstream os;
    os << "inverse Wishart: degrees of freedom " << dof << " must exceed dim - 1 = "
       << scale.dim() - 1;
    throw ProprietyError(os.str());
  }
}

MatrixNormal::MatrixNormal(Mat m, SpdMat row, SpdMat col)
    : mean(std::move(m)), row_scale(std::move(row)), col_scale(std::move(col)) {
  if (row_scale.dim() != mean.rows() || col_scale.dim() != mean.cols()) {
    throw DimensionError("matrix normal: scale dimensions do not match the mean");
  }
}

PrecisionGaussian::PrecisionGaussian(SpdMat p, Vec s) : precision(std::move(p)), shift(std::move(s)) {
  if (precision.dim() != shift.size()) {
    throw DimensionError("precision Gaussian: shift length does not match precision");
  }
}

// Bartlett construction. With scale = G G^T and A the lower-triangular
// Bartlett factor of a standard Wishart, A A^T ~ W(I, dof) and
// Sigma = G (A A^T)^{-1} G^T = M M^T with M = G A^{-T}.
SpdMat draw_inv_wishart(const InvWishart& d, RngStream& rng) {
  const Index r = d.dim();
  Mat a = Mat::Zero(r, r);
  for (Index i = 0; i < r; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(d.dof - static_cast<double>(i)));
    for (Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Mat g = d.scale.chol_lower();
  // M A^T = G, solved from the right with the upper-triangular A^T.
  const Mat m = a.triangularView<Eigen::Lower>()
                    .transpose()
                    .solve<Eigen::OnTheRight>(g);
  return SpdMat(m * m.transpose());
}

Mat draw_matrix_normal(const MatrixNormal& d, RngStream& rng) {
  const Mat z = rng.normal_mat(d.mean.rows(), d.mean.cols());
  const Mat p = d.row_scale.chol_lower();
  const Mat q = d.col_scale.chol_lower();
  return d.mean + p * z * q.transpose();
}

Vec draw_precision_gaussian(const PrecisionGaussian& d, RngStream& rng) {
  const Vec u = d.precision.solve(d.shift);
  const Vec z = rng.normal_vec(d.shift.size());
  // B = L L^T, so L^{-T} z has covariance B^{-1}.
  const Vec noise = d.precision.llt().matrixU().solve(z);
  return u + noise;
}

double log_multigamma(double x, Index r) {
  const double rd = static_cast<double>(r);
  double out = rd * (rd - 1.0) / 4.0 * std::log(std::numbers::pi);
  for (Index j = 0; j < r; ++j) out += std::lgamma(x - static_cast<double>(j) / 2.0);
  return out;
}

double logpdf_inv_wishart(const InvWishart& d, const SpdMat& x) {
  const Index r = d.dim();
  if (x.dim() != r) throw DimensionError("logpdf_inv_wishart: dimension mismatch");
  const double rd = static_cast<double>(r);
  const double c = d.dof;
  const double trace_term = x.solve(d.scale.matrix()).trace();
  return 0.5 * c * d.scale.log_det() - 0.5 * c * rd * std::numbers::ln2 -
         log_multigamma(0.5 * c, r) - 0.5 * (c + rd + 1.0) * x.log_det() - 0.5 * trace_term;
}

}  // namespace varx::dist
