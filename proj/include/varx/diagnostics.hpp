#pragma once

// Explicit drift / minorization constants for the alpha-marginal kernel and
// the resulting Rosenthal-type bound on its geometric convergence rate.
//
// Two drift functions are supported:
//   small_n:  V(alpha) = ||alpha||^2, valid for any fixed data set with C SPD
//   large_n:  V(alpha) = ||(I_r (x) Q_X Z)(alpha - alpha_hat)||^2, centered at
//             the least-squares estimate, the one that stays informative as
//             n grows.
//
// Minorization constants underflow long before their logarithms do (think
// exp(-1260)), so everything is carried in log space and the rate bound is
// also reported as log(-log rho_bar).

#include <string>

#include "varx/distributions.hpp"
#include "varx/error.hpp"
#include "varx/model.hpp"

namespace varx::diag {

using linalg::Index;
using linalg::Mat;
using linalg::Vec;
using model::Posterior;

enum class Regime { small_n, large_n };
enum class TRule { theorem, caption_literal };

std::string to_string(Regime r);
std::string to_string(TRule r);
TRule parse_t_rule(const std::string& s);

inline constexpr double kTDelta = 1e-6;
inline constexpr Index kDefaultCGrid = 10000;

struct DriftParams {
  double lambda = 0.0;
  double big_l = 0.0;
  Regime regime = Regime::small_n;
};

struct MinorizationParams {
  double epsilon = 0.0;      // may underflow to 0; log_epsilon stays exact
  double log_epsilon = 0.0;
  double big_t = 0.0;
  // Large-n only: the same log epsilon from the eigenvalues tau_j of
  // (D + Y^T Q_[Z,X] Y) / n. NaN for the small-n regime.
  double log_epsilon_eigen = 0.0;
};

struct BoundReport {
  DriftParams drift;
  MinorizationParams minor;
  double c_star = 0.0;
  double rho_bar = 1.0;
  double log_rho_bar = 0.0;
  double log_neg_log_rho = 0.0;  // log(-log rho_bar); finite iff rho_bar < 1
  double tv_coefficient = 0.0;   // 2 + L / (1 - lambda) + V(start)
  double v_at_start = 0.0;
};

/// A hypothesis of the rate bound is violated by the supplied constants.
class BoundHypothesisError : public Error {
 public:
  enum class Hypothesis { lambda_not_below_one, epsilon_not_positive, t_not_admissible };
  BoundHypothesisError(Hypothesis h, const std::string& what) : Error(what), which_(h) {}
  Hypothesis which() const { return which_; }

 private:
  Hypothesis which_;
};

/// V(alpha) for the given regime.
double drift_function(const Vec& alpha, const Posterior& post, Regime regime);

/// lambda = 0 and
/// L = (||C^-1|| ||C m|| + ||C^-1/2|| ||C^1/2 alpha_hat||)^2 + tr(C^-1).
DriftParams small_n_drift(const Posterior& post);

/// epsilon = (|D + Y^T Q_[Z,X] Y| / |D + I c1|)^{c/2},
/// c1 = (||Q_X Y|| + ||Q_X Z|| sqrt(T))^2, c = n + a - p - r - 1.
MinorizationParams small_n_minorization(const Posterior& post, double big_t);

/// lambda = (qr + (||C||^1/2 ||A_hat||_F + ||C^-1||^1/2 ||C m||)^2) / (n + a - 2r - p - 2),
/// L = lambda tr(D) + lambda ||Q_[Z,X] Y||_F^2.
DriftParams large_n_drift(const Posterior& post);

/// epsilon = (|D + Y^T Q_[Z,X] Y| / |D + Y^T Q_[Z,X] Y + I T|)^{c/2}.
MinorizationParams large_n_minorization(const Posterior& post, double big_t);

/// T from the drift constants. theorem: 2L/(1 - lambda) + delta.
/// caption_literal: L + delta (small n) or 2L(1 - lambda) + delta (large n).
double select_t(const DriftParams& drift, TRule rule, double delta = kTDelta);

/// rho_bar(c) evaluated directly (no log-space protection).
double rho_bar_at(double c, const DriftParams& drift, const MinorizationParams& minor);

/// Minimizes rho_bar(c) over a uniform interior grid of c in (0, 1), then
/// refines around the grid argmin by golden-section search.
BoundReport rosenthal_bound(const DriftParams& drift, const MinorizationParams& minor,
                            Index c_grid_size = kDefaultCGrid, double v_start = 0.0);

struct DriftCheck {
  double lhs_estimate = 0.0;
  double lhs_std_error = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Monte Carlo estimate of the one-step expectation of V under the alpha
/// kernel started at alpha_prime, compared with lambda V(alpha_prime) + L.
/// Passes when the estimate is within 3 standard errors of the bound or below.
DriftCheck mc_verify_drift(const Vec& alpha_prime, const Posterior& post, Regime regime,
                           Index n_mc, dist::RngStream& rng);

struct InadequacyReport {
  double big_l = 0.0;
  double l_lower = 0.0;  // ||C^1/2 alpha_hat||^2 / gmin(C)
  double l_upper = 0.0;  // 2||C^-1||^2 ||Cm||^2 + 2||C^-1|| ||C^1/2 alpha_hat||^2 + tr(C^-1)
  bool sandwich_holds = false;
  double divergence_stat = 0.0;  // n ||Q_X Z||^2 / ||Q_[Z,X] Y||^2
  double big_t = 0.0;
  double log_epsilon = 0.0;
  double log_zeta = 0.0;  // (2n / c) log epsilon
};

InadequacyReport inadequacy_report(const Posterior& post, TRule rule);

/// Probability-limit approximations for the stable VARX with q = 1, X_t = 1,
/// C = I, m = 0, D = 0, a = 0:
/// lambda ~ (r + ||A||_F^2)/(n - 2r - 3), L ~ r sigma2 (r + ||A||_F^2), T ~ 2L,
/// log epsilon ~ -r^2 (r + ||A||_F^2).
struct ReferenceLimits {
  double lambda_tilde = 0.0;
  double l_tilde = 0.0;
  double t_tilde = 0.0;
  double log_epsilon_tilde = 0.0;
};

ReferenceLimits reference_limits(const model::TrueParams& truth, const model::VarxDims& dims,
                                 double sigma2);

/// Large-n constants with A_hat and Y^T Q_[Z,X] Y / n replaced by the true A
/// and Sigma. NaN fields where the T rule is not applicable.
struct ReferenceCurve {
  double lambda = 0.0;
  double big_l = 0.0;
  double big_t = 0.0;
  double log_epsilon = 0.0;
};

ReferenceCurve reference_curve(const model::TrueParams& truth, const model::VarxDims& dims,
                               const model::Hyperparams& hyper, TRule rule);

}  // namespace varx::diag
