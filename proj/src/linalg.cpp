#include "varx/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "varx/error.hpp"

namespace varx::linalg {

namespace {

void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

void require_symmetric(const Mat& m, const char* what) {
  const double scale = m.norm();
  if ((m - m.transpose()).norm() > kSymmetryTol * scale) {
    throw NumericError(std::string(what) + ": matrix is not symmetric");
  }
}

double svd_cutoff(const Mat& m, double smax) {
  return static_cast<double>(std::max(m.rows(), m.cols())) *
         std::numeric_limits<double>::epsilon() * smax;
}

}  // namespace

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

SpsdMat project_spsd(const Mat& m) {
  require_square(m, "project_spsd");
  require_finite(m, "project_spsd");
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m));
  if (es.info() != Eigen::Success) throw NumericError("project_spsd: eigendecomposition failed");
  const Vec clamped = es.eigenvalues().cwiseMax(0.0);
  const Mat& u = es.eigenvectors();
  return SpsdMat(symmetrize(u * clamped.asDiagonal() * u.transpose()));
}

SpdMat::SpdMat(const Mat& m) {
  require_square(m, "SpdMat");
  require_finite(m, "SpdMat");
  require_symmetric(m, "SpdMat");
  m_ = symmetrize(m);
  llt_.compute(m_);
  if (llt_.info() != Eigen::Success) {
    throw NumericError("SpdMat: matrix is not positive definite (Cholesky failed)");
  }
  const auto diag = llt_.matrixLLT().diagonal();
  if ((diag.array() <= 0.0).any() || !diag.allFinite()) {
    throw NumericError("SpdMat: matrix is not positive definite");
  }
}

Mat SpdMat::inverse() const {
  return symmetrize(llt_.solve(Mat::Identity(dim(), dim())));
}

double SpdMat::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

SpsdMat::SpsdMat(const Mat& m) {
  require_square(m, "SpsdMat");
  require_finite(m, "SpsdMat");
  require_symmetric(m, "SpsdMat");
  m_ = symmetrize(m);
  Eigen::SelfAdjointEigenSolver<Mat> es(m_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("SpsdMat: eigendecomposition failed");
  const double gmin = es.eigenvalues().minCoeff();
  const double gmax = es.eigenvalues().maxCoeff();
  if (gmin < -kEigenClamp * std::max(gmax, 0.0)) {
    throw NumericError("SpsdMat: matrix has a negative eigenvalue");
  }
  eigs_ = {std::max(gmin, 0.0), std::max(gmax, 0.0)};
}

bool SpsdMat::is_positive_definite() const {
  return eigs_.max > 0.0 && eigs_.min > kEigenClamp * eigs_.max;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Projection proj(const Mat& m) {
  const Index n = m.rows();
  if (m.cols() == 0) return {Mat::Zero(n, n), Mat::Identity(n, n)};
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double tol = svd_cutoff(m, s.size() > 0 ? s(0) : 0.0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;
  const Mat u = svd.matrixU().leftCols(rank);
  Mat p = symmetrize(u * u.transpose());
  Mat q = Mat::Identity(n, n) - p;
  return {std::move(p), std::move(q)};
}

Mat pinv(const Mat& m) {
  if (m.size() == 0) return Mat::Zero(m.cols(), m.rows());
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double tol = svd_cutoff(m, s(0));
  Vec inv_s = Vec::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) inv_s(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
}

SpdMat spd_power(const SpdMat& g, double t) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g.matrix());
  if (es.info() != Eigen::Success) throw NumericError("spd_power: eigendecomposition failed");
  const Vec& ev = es.eigenvalues();
  if ((ev.array() <= 0.0).any()) throw NumericError("spd_power: matrix is not positive definite");
  const Vec powered = ev.array().pow(t).matrix();
  const Mat& u = es.eigenvectors();
  return SpdMat(symmetrize(u * powered.asDiagonal() * u.transpose()));
}

ExtremeEigs extreme_eigs(const SpsdMat& g) { return g.eigs(); }

ExtremeEigs extreme_eigs(const Mat& symmetric) {
  require_square(symmetric, "extreme_eigs");
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(symmetric), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("extreme_eigs: eigendecomposition failed");
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

double spectral_norm_from_gram(const Mat& gram) {
  if (gram.size() == 0) return 0.0;
  return std::sqrt(std::max(extreme_eigs(gram).max, 0.0));
}

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return spectral_norm_from_gram(m.transpose() * m);
}

bool gram_full_rank(const Mat& gram, double tol) {
  if (gram.size() == 0) return true;
  const ExtremeEigs e = extreme_eigs(gram);
  return e.max > 0.0 && e.min / e.max > tol;
}

Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat unvec(const Vec& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw DimensionError("unvec: size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

Vec vech(const Mat& m) {
  require_square(m, "vech");
  const Index k = m.rows();
  Vec out(k * (k + 1) / 2);
  Index pos = 0;
  for (Index j = 0; j < k; ++j) {
    for (Index i = j; i < k; ++i) out(pos++) = m(i, j);
  }
  return out;
}

}  // namespace varx::linalg
