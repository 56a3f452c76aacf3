#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

using varx::dist::RngStream;
namespace la = varx::linalg;

Mat random_matrix(Index rows, Index cols, RngStream& rng) { return rng.normal_mat(rows, cols); }

Mat random_spd(Index dim, RngStream& rng) {
  Eigen::HouseholderQR<Mat> qr(rng.normal_mat(dim, dim));
  const Mat q = qr.householderQ();
  Vec ev(dim);
  for (Index i = 0; i < dim; ++i) ev(i) = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
  Mat out = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

Mat random_spsd(Index dim, Index rank, RngStream& rng) {
  const Mat f = rng.normal_mat(dim, rank);
  return f * f.transpose();
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lam = (ne + 0.12 + 0.11 / ne) * d;
  double p = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lam * lam);
    p += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  if (lam < 1e-3) p = 1.0;
  return {d, std::clamp(p, 0.0, 1.0)};
}

double dense_grid_rho(double lambda, double big_l, double epsilon, double big_t, Index points) {
  const double log_first = std::log1p(-epsilon);
  const double log_a = std::log((1.0 + 2.0 * big_l + lambda * big_t) / (1.0 + big_t));
  const double log_b = std::log(1.0 + 2.0 * big_l + 2.0 * lambda * big_t);
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 1; k <= points; ++k) {
    const double c = static_cast<double>(k) / static_cast<double>(points + 1);
    const double v = std::max(c * log_first, (1.0 - c) * log_a + c * log_b);
    best = std::min(best, v);
  }
  return std::exp(best);
}

Mat lyapunov_covariance(const Mat& a, const Mat& sigma) {
  const Index r = a.rows();
  const Mat at = a.transpose();
  Mat k(r * r, r * r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j) k.block(i * r, j * r, r, r) = at(i, j) * at;
  const Mat lhs = Mat::Identity(r * r, r * r) - k;
  const Vec vs = Eigen::Map<const Vec>(sigma.data(), r * r);
  const Vec vg = lhs.fullPivLu().solve(vs);
  return Eigen::Map<const Mat>(vg.data(), r, r);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, syy > 0 ? sxy * sxy / (sxx * syy) : 1.0};
}

namespace {

double rel_excess(double bigger_claimed, double smaller_claimed) {
  // Positive when smaller_claimed exceeds bigger_claimed, relative to scale.
  const double scale = std::max({std::abs(bigger_claimed), std::abs(smaller_claimed), 1e-300});
  return (smaller_claimed - bigger_claimed) / scale;
}

double rel_frob(const Mat& a, const Mat& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace

InequalityResult check_trace_norm_det_monotonicity(int instances, Index max_dim, std::uint64_t seed) {
  RngStream rng(seed, 11);
  InequalityResult res;
  for (int it = 0; it < instances; ++it) {
    const Index n = 1 + it % max_dim;
    const Index rank = it % (n + 1);
    const la::SpdMat a(random_spd(n, rng));
    const Mat b = rank == 0 ? Mat::Zero(n, n) : random_spsd(n, rank, rng);
    Mat c = rng.normal_mat(n, n);
    while (std::abs(c.determinant()) < 1e-3) c = rng.normal_mat(n, n);
    const la::SpdMat ab(a.matrix() + b);
    const Mat m0 = c.transpose() * a.inverse() * c;
    const Mat m1 = c.transpose() * ab.inverse() * c;
    double w = rel_excess(m0.trace(), m1.trace());
    w = std::max(w, rel_excess(la::spectral_norm(m0), la::spectral_norm(m1)));
    // |C^T (A+B) C| >= |C^T A C| and |C^T (A+B)^-1 C| <= |C^T A^-1 C|.
    const double det_a = (c.transpose() * a.matrix() * c).determinant();
    const double det_ab = (c.transpose() * ab.matrix() * c).determinant();
    w = std::max(w, rel_excess(det_ab, det_a));
    w = std::max(w, rel_excess(m0.determinant(), m1.determinant()));
    res.worst = std::max(res.worst, w);
    ++res.instances;
  }
  return res;
}

InequalityResult check_ridge_shrinkage(int instances, Index max_dim, std::uint64_t seed) {
  RngStream rng(seed, 12);
  InequalityResult res;
  for (int it = 0; it < instances; ++it) {
    const Index p = 1 + it % max_dim;
    const Index n = 1 + (it / max_dim) % (max_dim + 2);
    const Index k = 1 + it % p;  // rank at most k
    const Mat x = rng.normal_mat(n, k) * rng.normal_mat(k, p);
    const Vec y = rng.normal_vec(n);
    const double c = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
    const Mat xtx = x.transpose() * x;
    const Vec ridge = (c * Mat::Identity(p, p) + xtx).ldlt().solve(x.transpose() * y);
    const Vec ls = la::pinv(xtx) * (x.transpose() * y);
    const double excess = (ridge.norm() - ls.norm() - 1e-10) / std::max(ls.norm(), 1.0);
    res.worst = std::max(res.worst, excess);
    ++res.instances;
  }
  return res;
}

InequalityResult check_generalized_inverse_sandwich(int instances, Index max_dim, std::uint64_t seed) {
  RngStream rng(seed, 13);
  InequalityResult res;
  for (int it = 0; it < instances; ++it) {
    const Index n = 1 + it % max_dim;
    const Index rank = 1 + (it / max_dim) % n;
    const Mat a = rng.normal_mat(n, rank) * rng.normal_mat(rank, n);
    const la::SpdMat b(random_spd(n, rng));
    const Mat bab = b.matrix() * a * b.matrix();
    const Mat binv = b.inverse();
    const Mat g = binv * la::pinv(a) * binv;
    res.worst = std::max(res.worst, rel_frob(bab * g * bab, bab));
    ++res.instances;
  }
  return res;
}

InequalityResult check_partitioned_projection(int instances, Index max_dim, std::uint64_t seed) {
  RngStream rng(seed, 14);
  InequalityResult res;
  for (int it = 0; it < instances; ++it) {
    const Index k1 = 1 + it % 3;
    const Index k2 = 1 + (it / 3) % 3;
    const Index k3 = 1 + (it / 9) % 2;
    const Index n = std::min<Index>(k1 + k2 + k3 + 1 + it % 4, std::max<Index>(max_dim, k1 + k2 + k3 + 1));
    const Mat x1 = rng.normal_mat(n, k1), x2 = rng.normal_mat(n, k2), x3 = rng.normal_mat(n, k3);
    Mat x23(n, k2 + k3);
    x23 << x2, x3;
    const Mat q2 = la::proj(x2).q;
    const Mat q23 = la::proj(x23).q;
    const Mat g2 = x1.transpose() * q2 * x1;
    const Mat g23 = x1.transpose() * q23 * x1;
    double w = 0.0;
    if (!(la::extreme_eigs(g2).min > 0.0) || !(la::extreme_eigs(g23).min > 0.0)) w = 1.0;
    const Mat t1 = q2 * x1, t3 = q2 * x3;
    const Mat fwl = t1.transpose() * la::proj(t3).q * t1;
    w = std::max(w, rel_frob(fwl, g23));
    res.worst = std::max(res.worst, w);
    ++res.instances;
  }
  return res;
}

Mat explicit_residual_gram(const Mat& m, const Mat& y) {
  const Index n = y.rows();
  if (m.cols() == 0) return y.transpose() * y;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(m.transpose() * m);
  const Mat p = m * cod.pseudoInverse() * m.transpose();
  const Mat q = Mat::Identity(n, n) - p;
  return y.transpose() * q * y;
}

}  // namespace oracle
