#include "varx/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "varx/sampler.hpp"

namespace varx::diag {

using linalg::SpdMat;
using Hyp = BoundHypothesisError::Hypothesis;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct PriorNorms {
  double c_min = 0.0;      // gmin(C)
  double c_max = 0.0;      // gmax(C) = ||C||
  double cm_norm = 0.0;    // ||C m||
  double trace_inv = 0.0;  // tr(C^-1)
};

PriorNorms prior_norms(const model::Hyperparams& h) {
  if (!h.c_spd) throw NumericError("drift constants require an SPD prior precision C");
  const SpdMat c(h.c.matrix());
  return {h.c.eigs().min, h.c.eigs().max, (h.c.matrix() * h.m).norm(), c.inverse().trace()};
}

double minorization_exponent(const Posterior& post) {
  const auto& d = post.dims();
  return static_cast<double>(d.n) + post.hyper().a - static_cast<double>(d.p) -
         static_cast<double>(d.r) - 1.0;
}

SpdMat numerator_scale(const Posterior& post) {
  try {
    return SpdMat(post.hyper().d.matrix() + post.ls().resid_gram.matrix());
  } catch (const NumericError&) {
    throw NumericError("D + Y^T Q_[Z,X] Y is not SPD; minorization constant is zero");
  }
}

// -log(1 - eps) on the log scale, accurate when eps underflows.
double log_neg_log1m(double log_eps) {
  if (log_eps >= 0.0) return kInf;
  if (log_eps < -30.0) return log_eps + std::log1p(0.5 * std::exp(log_eps));
  return std::log(-std::log1p(-std::exp(log_eps)));
}

}  // namespace

std::string to_string(Regime r) { return r == Regime::small_n ? "small_n" : "large_n"; }
std::string to_string(TRule r) { return r == TRule::theorem ? "theorem" : "caption"; }

TRule parse_t_rule(const std::string& s) {
  if (s == "theorem") return TRule::theorem;
  if (s == "caption" || s == "caption_literal") return TRule::caption_literal;
  throw ConfigError("unknown T rule '" + s + "' (expected theorem or caption)");
}

double drift_function(const Vec& alpha, const Posterior& post, Regime regime) {
  if (regime == Regime::small_n) return alpha.squaredNorm();
  const auto& d = post.dims();
  const Mat delta = linalg::unvec(alpha - post.ls().alpha_hat, d.qr(), d.r);
  return (delta.transpose() * post.ls().qxz_gram.matrix() * delta).trace();
}

DriftParams small_n_drift(const Posterior& post) {
  const PriorNorms c = prior_norms(post.hyper());
  const Vec& ah = post.ls().alpha_hat;
  const double c_half_alpha = std::sqrt(std::max(ah.dot(post.hyper().c.matrix() * ah), 0.0));
  const double first = c.cm_norm / c.c_min + c_half_alpha / std::sqrt(c.c_min);
  return {0.0, first * first + c.trace_inv, Regime::small_n};
}

MinorizationParams small_n_minorization(const Posterior& post, double big_t) {
  if (!(big_t >= 0.0)) throw NumericError("minorization: T must be >= 0");
  const auto& d = post.dims();
  const auto& ls = post.ls();
  const double qxy = std::sqrt(ls.qxy_gram.eigs().max);
  const double qxz = std::sqrt(ls.qxz_gram.eigs().max);
  const double c1 = std::pow(qxy + qxz * std::sqrt(big_t), 2);
  const SpdMat num = numerator_scale(post);
  const SpdMat den(post.hyper().d.matrix() + c1 * Mat::Identity(d.r, d.r));
  const double log_eps = 0.5 * minorization_exponent(post) * (num.log_det() - den.log_det());
  return {std::exp(log_eps), log_eps, big_t, kNaN};
}

DriftParams large_n_drift(const Posterior& post) {
  const auto& d = post.dims();
  const auto& h = post.hyper();
  const auto& g = post.gram();
  const Mat zx = g.w.bottomRightCorner(d.qr() + d.p, d.qr() + d.p);
  if (!linalg::gram_full_rank(zx)) throw NumericError("large-n drift requires [Z, X] of full column rank");
  const PriorNorms c = prior_norms(h);
  const double denom = static_cast<double>(d.n) + h.a - 2.0 * static_cast<double>(d.r) -
                       static_cast<double>(d.p) - 2.0;
  if (!(denom > 0.0)) throw NumericError("large-n drift requires n + a - 2r - p - 2 > 0");
  const double inner = std::sqrt(c.c_max) * post.ls().a_hat.norm() + c.cm_norm / std::sqrt(c.c_min);
  const double lambda = (static_cast<double>(d.qr()) + inner * inner) / denom;
  const double big_l = lambda * h.d.matrix().trace() + lambda * post.ls().resid_gram.matrix().trace();
  return {lambda, big_l, Regime::large_n};
}

MinorizationParams large_n_minorization(const Posterior& post, double big_t) {
  if (!(big_t >= 0.0)) throw NumericError("minorization: T must be >= 0");
  const auto& d = post.dims();
  const SpdMat num = numerator_scale(post);
  const SpdMat den(num.matrix() + big_t * Mat::Identity(d.r, d.r));
  const double expo = minorization_exponent(post);
  const double log_eps = 0.5 * expo * (num.log_det() - den.log_det());

  const double n = static_cast<double>(d.n);
  Eigen::SelfAdjointEigenSolver<Mat> es(num.matrix() / n, Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (Index j = 0; j < d.r; ++j) {
    const double tau = es.eigenvalues()(j);
    sum += std::log1p(big_t / n / tau);
  }
  return {std::exp(log_eps), log_eps, big_t, -0.5 * expo * sum};
}

double select_t(const DriftParams& drift, TRule rule, double delta) {
  const double lam = drift.lambda;
  const double l = drift.big_l;
  if (rule == TRule::theorem) {
    if (!(lam < 1.0)) {
      throw BoundHypothesisError(Hyp::lambda_not_below_one, "T rule needs lambda < 1");
    }
    return 2.0 * l / (1.0 - lam) + delta;
  }
  const double t = drift.regime == Regime::small_n ? l + delta : 2.0 * l * (1.0 - lam) + delta;
  if (!(t > 0.0)) throw BoundHypothesisError(Hyp::t_not_admissible, "caption T rule gives T <= 0");
  return t;
}

double rho_bar_at(double c, const DriftParams& drift, const MinorizationParams& minor) {
  const double l = drift.big_l, lam = drift.lambda, t = minor.big_t;
  const double first = std::pow(1.0 - minor.epsilon, c);
  const double second = std::pow((1.0 + 2.0 * l + lam * t) / (1.0 + t), 1.0 - c) *
                        std::pow(1.0 + 2.0 * l + 2.0 * lam * t, c);
  return std::max(first, second);
}

BoundReport rosenthal_bound(const DriftParams& drift, const MinorizationParams& minor,
                            Index c_grid_size, double v_start) {
  const double lam = drift.lambda, l = drift.big_l, t = minor.big_t;
  if (!(lam < 1.0) || lam < 0.0) {
    std::ostringstream os;
    os << "rate bound requires 0 <= lambda < 1, got " << lam;
    throw BoundHypothesisError(Hyp::lambda_not_below_one, os.str());
  }
  if (!(minor.log_epsilon > -kInf) || std::isnan(minor.log_epsilon)) {
    throw BoundHypothesisError(Hyp::epsilon_not_positive, "rate bound requires epsilon > 0");
  }
  if (!(t > 2.0 * l / (1.0 - lam))) {
    std::ostringstream os;
    os << "rate bound requires T > 2L/(1 - lambda): T=" << t << ", 2L/(1-lambda)=" << 2.0 * l / (1.0 - lam);
    throw BoundHypothesisError(Hyp::t_not_admissible, os.str());
  }
  if (c_grid_size < 1) throw DimensionError("c grid must have at least one point");

  // -log rho_bar(c) = min(c e', (1 - c) A - c B) with e' = -log(1 - eps),
  // A = log((1 + T) / (1 + 2L + lambda T)) > 0, B = log(1 + 2L + 2 lambda T).
  // Maximize its logarithm.
  const double big_a = std::log1p(t) - std::log1p(2.0 * l + lam * t);
  const double big_b = std::log1p(2.0 * l + 2.0 * lam * t);
  const double log_eps_prime = log_neg_log1m(minor.log_epsilon);
  auto objective = [&](double c) {
    const double g2 = (1.0 - c) * big_a - c * big_b;
    const double log_g2 = g2 > 0.0 ? std::log(g2) : -kInf;
    return std::min(std::log(c) + log_eps_prime, log_g2);
  };

  // The second branch is positive only below c0 = A / (A + B), so the grid
  // spans (0, c0). c0 can be far below any fixed step on (0, 1).
  const double c0 = big_a / (big_a + big_b);
  const double step = c0 / static_cast<double>(c_grid_size + 1);
  Index best_k = 1;
  double best = -kInf;
  for (Index k = 1; k <= c_grid_size; ++k) {
    const double v = objective(static_cast<double>(k) * step);
    if (v > best) best = v, best_k = k;
  }
  double c_star = static_cast<double>(best_k) * step;
  if (best > -kInf) {
    // The objective is the minimum of an increasing and a decreasing function
    // of c, hence unimodal.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = static_cast<double>(best_k - 1) * step;
    double hi = static_cast<double>(best_k + 1) * step;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      if (f1 < f2) {
        lo = x1, x1 = x2, f1 = f2;
        x2 = lo + inv_phi * (hi - lo), f2 = objective(x2);
      } else {
        hi = x2, x2 = x1, f2 = f1;
        x1 = hi - inv_phi * (hi - lo), f1 = objective(x1);
      }
    }
    const double c_ref = f1 > f2 ? x1 : x2;
    const double f_ref = std::max(f1, f2);
    if (f_ref > best) best = f_ref, c_star = c_ref;
  }

  BoundReport rep;
  rep.drift = drift;
  rep.minor = minor;
  rep.c_star = c_star;
  rep.log_neg_log_rho = best;
  rep.log_rho_bar = -std::exp(best);
  rep.rho_bar = std::exp(rep.log_rho_bar);
  rep.v_at_start = v_start;
  rep.tv_coefficient = 2.0 + l / (1.0 - lam) + v_start;
  return rep;
}

DriftCheck mc_verify_drift(const Vec& alpha_prime, const Posterior& post, Regime regime,
                           Index n_mc, dist::RngStream& rng) {
  if (n_mc < 2) throw DimensionError("mc_verify_drift: need at least two draws");
  const DriftParams drift = regime == Regime::small_n ? small_n_drift(post) : large_n_drift(post);
  double sum = 0.0, sum_sq = 0.0;
  for (Index i = 0; i < n_mc; ++i) {
    const Vec next = sampler::alpha_kernel_step(alpha_prime, post, rng);
    const double v = drift_function(next, post, regime);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(n_mc);
  const double mean = sum / n;
  const double var = std::max(sum_sq / n - mean * mean, 0.0) * n / (n - 1.0);
  DriftCheck out;
  out.lhs_estimate = mean;
  out.lhs_std_error = std::sqrt(var / n);
  out.rhs = drift.lambda * drift_function(alpha_prime, post, regime) + drift.big_l;
  out.pass = out.lhs_estimate <= out.rhs + 3.0 * out.lhs_std_error;
  return out;
}

InadequacyReport inadequacy_report(const Posterior& post, TRule rule) {
  const auto& h = post.hyper();
  const auto& ls = post.ls();
  const PriorNorms c = prior_norms(h);
  InadequacyReport rep;
  const DriftParams drift = small_n_drift(post);
  rep.big_l = drift.big_l;
  const double quad = ls.alpha_hat.dot(h.c.matrix() * ls.alpha_hat);
  rep.l_lower = quad / c.c_min;
  rep.l_upper = 2.0 * c.cm_norm * c.cm_norm / (c.c_min * c.c_min) + 2.0 * quad / c.c_min + c.trace_inv;
  const double slack = 1e-10 * std::max(1.0, rep.l_upper);
  rep.sandwich_holds = rep.l_lower < rep.big_l + slack && rep.big_l <= rep.l_upper + slack;

  const double qxz_sq = ls.qxz_gram.eigs().max;
  const double resid_sq = ls.resid_gram.eigs().max;
  rep.divergence_stat = static_cast<double>(post.dims().n) * qxz_sq / resid_sq;

  rep.big_t = select_t(drift, rule);
  const MinorizationParams minor = small_n_minorization(post, rep.big_t);
  rep.log_epsilon = minor.log_epsilon;
  rep.log_zeta = 2.0 * static_cast<double>(post.dims().n) / minorization_exponent(post) * minor.log_epsilon;
  return rep;
}

ReferenceLimits reference_limits(const model::TrueParams& truth, const model::VarxDims& dims,
                                 double sigma2) {
  if (dims.q != 1) throw DimensionError("reference limits are defined for q = 1");
  const double r = static_cast<double>(dims.r);
  const double a_sq = truth.a.squaredNorm();
  ReferenceLimits out;
  out.lambda_tilde = (r + a_sq) / (static_cast<double>(dims.n) - 2.0 * r - 3.0);
  out.l_tilde = r * sigma2 * (r + a_sq);
  out.t_tilde = 2.0 * out.l_tilde;
  out.log_epsilon_tilde = -r * r * (r + a_sq);
  return out;
}

ReferenceCurve reference_curve(const model::TrueParams& truth, const model::VarxDims& dims,
                               const model::Hyperparams& hyper, TRule rule) {
  const PriorNorms c = prior_norms(hyper);
  const double n = static_cast<double>(dims.n);
  const double denom = n + hyper.a - 2.0 * static_cast<double>(dims.r) -
                       static_cast<double>(dims.p) - 2.0;
  ReferenceCurve out{kNaN, kNaN, kNaN, kNaN};
  if (!(denom > 0.0)) return out;
  const double inner = std::sqrt(c.c_max) * truth.a.norm() + c.cm_norm / std::sqrt(c.c_min);
  out.lambda = (static_cast<double>(dims.qr()) + inner * inner) / denom;
  const Mat scale = hyper.d.matrix() + n * truth.sigma;
  out.big_l = out.lambda * scale.trace();
  try {
    out.big_t = select_t({out.lambda, out.big_l, Regime::large_n}, rule);
  } catch (const BoundHypothesisError&) {
    return out;
  }
  const double expo = n + hyper.a - static_cast<double>(dims.p) - static_cast<double>(dims.r) - 1.0;
  const SpdMat num(scale);
  const SpdMat den(scale + out.big_t * Mat::Identity(dims.r, dims.r));
  out.log_epsilon = 0.5 * expo * (num.log_det() - den.log_det());
  return out;
}

}  // namespace varx::diag
