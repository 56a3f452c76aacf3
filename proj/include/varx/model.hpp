#pragma once

// VARX data model
//
//   Y_t = sum_i A_i^T Y_{t-i} + B^T X_t + U_t,   U_t ~ N(0, Sigma),
//
// with the prior f(alpha) ∝ exp(-(alpha - m)^T C (alpha - m) / 2), flat prior
// on B and f(Sigma) ∝ |Sigma|^{-a/2} etr(-D Sigma^{-1} / 2). Stacking gives
// Y = Z A + X B + U with Z_t = [Y_{t-1}^T, ..., Y_{t-q}^T]^T and
// alpha = vec(A).

#include <iosfwd>
#include <optional>
#include <string>

#include "varx/distributions.hpp"
#include "varx/linalg.hpp"

namespace varx::model {

using linalg::Index;
using linalg::Mat;
using linalg::SpdMat;
using linalg::SpsdMat;
using linalg::Vec;

struct VarxDims {
  Index n = 0;  // observations
  Index r = 0;  // series dimension
  Index p = 0;  // predictors, 0 allowed
  Index q = 0;  // lag order

  Index qr() const { return q * r; }
  Index alpha_dim() const { return q * r * r; }
  /// Columns of W = [Y, Z, X].
  Index w_cols() const { return r + q * r + p; }

  void validate() const;
  bool operator==(const VarxDims&) const = default;
};

struct Hyperparams {
  Vec m;
  SpsdMat c;
  SpsdMat d;
  double a = 0.0;
  bool c_spd = false;
  bool d_spd = false;

  static Hyperparams make(Vec m, const Mat& c, const Mat& d, double a);
  /// m = 0, C = I, D = 0, a = 0.
  static Hyperparams unit_precision(Index r, Index q);
  /// m = 0, C = 0 (flat prior on alpha), D = 0, a = 0.
  static Hyperparams flat_alpha(Index r, Index q);

  void check_dims(const VarxDims& dims) const;
};

/// Observed series plus the lag design. presample holds Y_{-q+1}, ..., Y_0
/// in chronological order (last row is Y_0).
struct Dataset {
  VarxDims dims;
  Mat presample;  // q x r
  Mat y;          // n x r
  Mat x;          // n x p
  Mat z;          // n x qr

  /// The first n observations with the same presample.
  Dataset prefix(Index n) const;
};

Dataset build_design(const Mat& presample, const Mat& y_obs, const Mat& x_obs, Index q);

/// Gram matrix of W = [Y, Z, X] with named blocks. All projection-based
/// quantities are derived from it without forming n x n projectors.
struct GramBlocks {
  Mat w;  // full W^T W
  Index r = 0, qr = 0, p = 0;

  auto yy() const { return w.block(0, 0, r, r); }
  auto zy() const { return w.block(r, 0, qr, r); }
  auto zz() const { return w.block(r, r, qr, qr); }
  auto xy() const { return w.block(r + qr, 0, p, r); }
  auto xz() const { return w.block(r + qr, r, p, qr); }
  auto xx() const { return w.block(r + qr, r + qr, p, p); }
};

GramBlocks gram_blocks(const Dataset& ds);

struct LeastSquares {
  Mat a_hat;           // qr x r, (Z^T Q_X Z)^+ Z^T Q_X Y
  Vec alpha_hat;       // vec(a_hat)
  SpsdMat resid_gram;  // Y^T Q_[Z,X] Y
  SpsdMat qxz_gram;    // Z^T Q_X Z
  Mat qxzy;            // Z^T Q_X Y
  SpsdMat qxy_gram;    // Y^T Q_X Y
  Mat xx_pinv;         // (X^T X)^+, p x p
};

LeastSquares least_squares(const Dataset& ds);
LeastSquares least_squares(const GramBlocks& g);

struct ProprietyVerdict {
  // Condition set 1.
  bool d_spd = false;
  bool x_full_rank = false;
  bool count_set1 = false;  // n + a > 2r + p
  bool alpha_prior_proper = false;
  // Condition set 2.
  bool w_full_rank = false;
  bool count_set2 = false;  // n + a > (2 + q) r + p
  bool alpha_prior_bounded = true;

  bool condition_set_1() const { return d_spd && x_full_rank && count_set1 && alpha_prior_proper; }
  bool condition_set_2() const { return w_full_rank && count_set2 && alpha_prior_bounded; }
  bool proper() const { return condition_set_1() || condition_set_2(); }
  /// Names of the failing clauses of each set, empty when the set holds.
  std::string describe() const;
};

ProprietyVerdict check_propriety(const VarxDims& dims, const Hyperparams& hyper, const Dataset& ds);

/// One state theta = (alpha, B, Sigma) of the chain.
struct ChainState {
  Vec alpha;  // vec(A), length q r^2
  Mat b_coef; // p x r
  SpdMat sigma;
};

/// Data, prior and the precomputed statistics every conditional and bound
/// needs. Immutable after construction.
class Posterior {
 public:
  Posterior(Dataset ds, Hyperparams hyper);

  const VarxDims& dims() const { return ds_.dims; }
  const Dataset& data() const { return ds_; }
  const Hyperparams& hyper() const { return hyper_; }
  const GramBlocks& gram() const { return gram_; }
  const LeastSquares& ls() const { return ls_; }
  const ProprietyVerdict& propriety() const { return verdict_; }

  /// Throws ProprietyError naming the failing clauses when improper.
  void require_proper() const;

 private:
  Dataset ds_;
  Hyperparams hyper_;
  GramBlocks gram_;
  LeastSquares ls_;
  ProprietyVerdict verdict_;
};

/// Unnormalized log posterior density
/// -(n+a)/2 log|Sigma| - tr(Sigma^{-1}[D + nS]) / 2 - (alpha-m)^T C (alpha-m) / 2.
double log_posterior_unnorm(const ChainState& theta, const Posterior& post);

struct TrueParams {
  Mat a;      // qr x r
  Mat b;      // p x r
  Mat sigma;  // r x r, sigma2 I (may be zero)
};

struct SimulatedVarx {
  Dataset data;
  TrueParams truth;
};

/// Stable VARX generator. Each A_i is (U + U^T + I) / (||U + U^T + I|| + 0.1)
/// with U iid uniform on [-1/2, 1/2], divided by q when q > 1 so the companion
/// matrix stays stable. X_t has a leading 1 followed by standard normal
/// columns, B is all ones, Sigma = sigma2 I, and the path starts from a zero
/// presample.
SimulatedVarx generate_stable_varx(const VarxDims& dims, double sigma2, dist::RngStream& rng);

/// Spectral radius of the VAR companion matrix built from A.
double companion_spectral_radius(const Mat& a, Index r, Index q);

void write_dataset_csv(std::ostream& os, const Dataset& ds);
Dataset read_dataset_csv(std::istream& is);

}  // namespace varx::model
