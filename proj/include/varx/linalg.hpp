#pragma once

// Dense linear algebra used by the model, sampler and bound computations.
// Everything here is a pure function of its arguments.

#include <Eigen/Dense>

namespace varx::linalg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative asymmetry accepted before a matrix is rejected as non-symmetric.
inline constexpr double kSymmetryTol = 1e-8;
// Eigenvalues down to -kEigenClamp * gmax are treated as zero for SPSD input.
inline constexpr double kEigenClamp = 1e-10;

struct ExtremeEigs {
  double min = 0.0;
  double max = 0.0;
};

/// Symmetric positive definite matrix. Construction symmetrizes the input and
/// verifies definiteness through a Cholesky factorization; the factor is kept
/// for solves and log-determinants.
class SpdMat {
 public:
  explicit SpdMat(const Mat& m);

  static SpdMat identity(Index dim) { return SpdMat(Mat::Identity(dim, dim)); }

  const Mat& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  const Eigen::LLT<Mat>& llt() const { return llt_; }
  /// Lower Cholesky factor L with LL^T equal to the matrix.
  Mat chol_lower() const { return llt_.matrixL(); }

  Mat inverse() const;
  Mat solve(const Mat& rhs) const { return llt_.solve(rhs); }
  double log_det() const;

 private:
  Mat m_;
  Eigen::LLT<Mat> llt_;
};

/// Symmetric positive semi-definite matrix. Small negative eigenvalues from
/// round-off are clamped to zero; larger ones reject the input.
class SpsdMat {
 public:
  explicit SpsdMat(const Mat& m);

  static SpsdMat zero(Index dim) { return SpsdMat(Mat::Zero(dim, dim)); }

  const Mat& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  const ExtremeEigs& eigs() const { return eigs_; }
  bool is_positive_definite() const;

 private:
  Mat m_;
  ExtremeEigs eigs_;
};

Mat symmetrize(const Mat& m);

/// Symmetrizes m and clamps negative eigenvalues to zero. Intended for Grams
/// that are SPSD in exact arithmetic but were formed by subtraction.
SpsdMat project_spsd(const Mat& m);

Mat kron(const Mat& a, const Mat& b);

struct Projection {
  Mat p;  // onto the column space
  Mat q;  // onto its orthogonal complement
};

/// Orthogonal projections for the column space of m. Rank deficiency is
/// resolved by the same singular-value cutoff as pinv.
Projection proj(const Mat& m);

/// Moore-Penrose pseudo-inverse via SVD, cutoff max(rows, cols) * eps * smax.
Mat pinv(const Mat& m);

SpdMat spd_power(const SpdMat& g, double t);

ExtremeEigs extreme_eigs(const SpsdMat& g);
/// Same for a plain symmetric matrix (symmetrized first, no clamping).
ExtremeEigs extreme_eigs(const Mat& symmetric);

/// Spectral norm of m computed as sqrt(gmax(m^T m)).
double spectral_norm(const Mat& m);
/// Spectral norm of a matrix given only its Gram m^T m.
double spectral_norm_from_gram(const Mat& gram);

/// Numerical rank decision for a Gram matrix: gmin / gmax > tol.
bool gram_full_rank(const Mat& gram, double tol = 1e-10);

Vec vec(const Mat& m);
Mat unvec(const Vec& v, Index rows, Index cols);
/// Lower-triangular half of a symmetric matrix, column by column.
Vec vech(const Mat& m);

}  // namespace varx::linalg
