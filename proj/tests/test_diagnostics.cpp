#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "varx/diagnostics.hpp"
#include "varx/error.hpp"

using namespace varx::diag;
using varx::dist::RngStream;
using varx::linalg::SpdMat;
using varx::linalg::spd_power;
using varx::linalg::spectral_norm;
using varx::model::Dataset;
using varx::model::Hyperparams;

namespace {

Dataset random_dataset(Index n, Index r, Index p, Index q, RngStream& rng) {
  return varx::model::build_design(rng.normal_mat(q, r), rng.normal_mat(n, r), rng.normal_mat(n, p), q);
}

Dataset stable_path(Index n, Index r, std::uint64_t seed) {
  RngStream rng(seed);
  return varx::model::generate_stable_varx({n, r, 1, 1}, 1.0, rng).data;
}

Mat q_of(const Mat& m) {
  const Index n = m.rows();
  if (m.cols() == 0) return Mat::Identity(n, n);
  return Mat::Identity(n, n) - m * (m.transpose() * m).inverse() * m.transpose();
}

}  // namespace

TEST_CASE("small-n drift constants") {
  RngStream rng(1);
  {
    Dataset ds = random_dataset(30, 2, 1, 1, rng);
    Mat zx(30, 3);
    zx << ds.z, ds.x;
    ds.y = varx::linalg::proj(zx).q * ds.y;
    const Posterior post(ds, Hyperparams::unit_precision(2, 1));
    CHECK(post.ls().alpha_hat.norm() < 1e-10);
    const auto d = small_n_drift(post);
    CHECK(d.lambda == 0.0);
    CHECK(d.big_l == doctest::Approx(4.0).epsilon(1e-10));
  }
  {
    const Dataset ds = random_dataset(30, 2, 1, 2, rng);
    const Posterior post(ds, Hyperparams::unit_precision(2, 2));
    CHECK(small_n_drift(post).big_l == doctest::Approx(post.ls().alpha_hat.squaredNorm() + 8.0).epsilon(1e-10));
  }
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset ds = random_dataset(25, 2, 1, 1, rng);
    const Mat c = oracle::random_spd(4, rng);
    const Vec m = rng.normal_vec(4);
    const Posterior post(ds, Hyperparams::make(m, c, Mat::Zero(2, 2), 0.0));
    const SpdMat cs(c);
    const Mat c_inv = cs.inverse();
    const double l = std::pow(spectral_norm(c_inv) * (c * m).norm() +
                                  spectral_norm(spd_power(cs, -0.5).matrix()) *
                                      (spd_power(cs, 0.5).matrix() * post.ls().alpha_hat).norm(),
                              2) +
                     c_inv.trace();
    CHECK(small_n_drift(post).big_l == doctest::Approx(l).epsilon(1e-10));
  }
  const Dataset ds = random_dataset(25, 2, 1, 1, rng);
  CHECK_THROWS_AS(small_n_drift(Posterior(ds, Hyperparams::flat_alpha(2, 1))), varx::NumericError);
}

TEST_CASE("small-n minorization") {
  RngStream rng(2);
  {
    // Zero lag design: Q_X Z = 0 and the two determinants coincide.
    Dataset ds = random_dataset(20, 1, 1, 1, rng);
    ds.z.setZero();
    const Posterior post(ds, Hyperparams::make(Vec::Zero(1), Mat::Identity(1, 1), Mat::Constant(1, 1, 0.7), 0.0));
    CHECK(small_n_minorization(post, 3.0).log_epsilon == doctest::Approx(0.0));
  }
  for (int rep = 0; rep < 10; ++rep) {
    const Index n = 15 + rep;
    const Dataset ds = random_dataset(n, 1, 1, 1, rng);
    const double dsc = 0.5 + rep * 0.1, a = 0.5 * rep, t = 0.3 + rep;
    const Posterior post(ds, Hyperparams::make(Vec::Zero(1), Mat::Identity(1, 1), Mat::Constant(1, 1, dsc), a));
    const Mat qx = q_of(ds.x);
    Mat zx(n, 2);
    zx << ds.z, ds.x;
    const double s = (ds.y.transpose() * q_of(zx) * ds.y)(0, 0);
    const double ny = (qx * ds.y).norm(), nz = (qx * ds.z).norm();
    const double c = n + a - 1 - 1 - 1;
    const double hand = 0.5 * c * std::log((dsc + s) / (dsc + std::pow(ny + nz * std::sqrt(t), 2)));
    const auto mp = small_n_minorization(post, t);
    CHECK(mp.log_epsilon == doctest::Approx(hand).epsilon(1e-9));
    CHECK(mp.log_epsilon < 0.0);
  }
  const Dataset ds = random_dataset(40, 3, 1, 1, rng);
  const Posterior post(ds, Hyperparams::unit_precision(3, 1));
  double prev = 0.0;
  for (double t : {0.0, 0.1, 1.0, 5.0, 50.0}) {
    const auto mp = small_n_minorization(post, t);
    CHECK(mp.log_epsilon <= prev + 1e-12);
    CHECK(mp.epsilon <= 1.0);
    prev = mp.log_epsilon;
  }
}

TEST_CASE("large-n drift constants") {
  {
    const Dataset ds = stable_path(300, 3, 3);
    const Posterior post(ds, Hyperparams::unit_precision(3, 1));
    const auto d = large_n_drift(post);
    const double ah = post.ls().a_hat.squaredNorm();
    CHECK(d.lambda == doctest::Approx((3 + ah) / (300 - 6 - 3)).epsilon(1e-12));
    CHECK(d.big_l == doctest::Approx(d.lambda * post.ls().resid_gram.matrix().trace()).epsilon(1e-12));
  }
  RngStream rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const Index n = 40, r = 2, p = 2, q = 2;
    const Dataset ds = random_dataset(n, r, p, q, rng);
    const Index k = q * r * r;
    const Mat c = oracle::random_spd(k, rng), d = oracle::random_spd(r, rng);
    const Vec m = rng.normal_vec(k);
    const double a = 1.0 + rep;
    const Posterior post(ds, Hyperparams::make(m, c, d, a));
    Mat zx(n, q * r + p);
    zx << ds.z, ds.x;
    const Mat qx = q_of(ds.x);
    const Mat a_hat = (ds.z.transpose() * qx * ds.z).inverse() * ds.z.transpose() * qx * ds.y;
    const Mat resid = q_of(zx) * ds.y;
    const double inner = std::sqrt(spectral_norm(c)) * a_hat.norm() +
                         std::sqrt(spectral_norm(SpdMat(c).inverse())) * (c * m).norm();
    const double lam = (q * r + inner * inner) / (n + a - 2 * r - p - 2);
    const double l = lam * d.trace() + lam * resid.squaredNorm();
    const auto dp = large_n_drift(post);
    CHECK(dp.lambda == doctest::Approx(lam).epsilon(1e-10));
    CHECK(dp.big_l == doctest::Approx(l).epsilon(1e-10));
  }
  {
    Dataset ds = random_dataset(20, 2, 2, 1, rng);
    ds.x.col(1) = ds.x.col(0);
    CHECK_THROWS_AS(large_n_drift(Posterior(ds, Hyperparams::unit_precision(2, 1))), varx::NumericError);
  }
}

TEST_CASE("large-n minorization") {
  RngStream rng(5);
  const Dataset ds = random_dataset(60, 3, 1, 1, rng);
  const Posterior post(ds, Hyperparams::unit_precision(3, 1));
  CHECK(large_n_minorization(post, 1e-12).log_epsilon == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(large_n_minorization(post, 0.0).epsilon == 1.0);
  double prev = 0.0;
  for (double t : {0.5, 2.0, 10.0, 100.0, 1e4}) {
    const auto mp = large_n_minorization(post, t);
    CHECK(std::abs(mp.log_epsilon - mp.log_epsilon_eigen) < 1e-8 * std::max(1.0, std::abs(mp.log_epsilon)));
    CHECK(mp.log_epsilon < prev);
    CHECK(mp.epsilon <= 1.0);
    prev = mp.log_epsilon;
  }
  // Both regimes lie in (0, 1] and are exactly 1 at T = 0.
  CHECK(small_n_minorization(post, 0.0).log_epsilon <= 0.0);
  CHECK(large_n_minorization(post, 0.0).log_epsilon == 0.0);
}

TEST_CASE("T selection") {
  CHECK(select_t({0.5, 1.0, Regime::large_n}, TRule::theorem) == doctest::Approx(4.0 + 1e-6));
  CHECK(select_t({0.5, 1.0, Regime::large_n}, TRule::caption_literal) == doctest::Approx(1.0 + 1e-6));
  CHECK(select_t({0.0, 3.0, Regime::small_n}, TRule::theorem) == doctest::Approx(6.0 + 1e-6));
  CHECK(select_t({0.0, 3.0, Regime::small_n}, TRule::caption_literal) == doctest::Approx(3.0 + 1e-6));
  CHECK_THROWS_AS(select_t({1.2, 1.0, Regime::large_n}, TRule::theorem), BoundHypothesisError);
  CHECK(parse_t_rule("caption") == TRule::caption_literal);
  CHECK_THROWS_AS(parse_t_rule("other"), varx::ConfigError);
}

TEST_CASE("rate bound") {
  SUBCASE("epsilon one, no drift") {
    MinorizationParams mp{1.0, 0.0, 1.0, 0.0};
    const auto rep = rosenthal_bound({0.0, 0.0, Regime::small_n}, mp);
    CHECK(rep.rho_bar < 1.0);
    // rho_bar(c) = (1/2)^(1-c) on c > 0, whose infimum 1/2 sits at c -> 0.
    CHECK(rep.rho_bar == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(rep.c_star < 1e-3);
  }
  SUBCASE("closed-form optimum") {
    RngStream rng(6);
    for (int i = 0; i < 50; ++i) {
      const double lam = rng.uniform(0.0, 0.9), l = rng.uniform(0.0, 5.0);
      const double t = 2 * l / (1 - lam) + rng.uniform(0.01, 5.0);
      const double log_eps = rng.uniform(-30.0, -0.01);
      const auto rep = rosenthal_bound({lam, l, Regime::large_n}, {std::exp(log_eps), log_eps, t, 0.0});
      const double a = std::log((1 + t) / (1 + 2 * l + lam * t)), b = std::log(1 + 2 * l + 2 * lam * t);
      const double ep = -std::log1p(-std::exp(log_eps));
      const double c = a / (a + b + ep);
      CHECK(rep.c_star == doctest::Approx(c).epsilon(1e-6));
      CHECK(rep.log_rho_bar == doctest::Approx(-ep * a / (a + b + ep)).epsilon(1e-8));
      CHECK(rep.rho_bar < 1.0);
      CHECK(rep.tv_coefficient == doctest::Approx(2 + l / (1 - lam)));
    }
  }
  SUBCASE("dense grid at lambda 0.5, L 1, T 5, eps 0.2") {
    const double lam = 0.5, l = 1.0, t = 5.0, eps = 0.2;
    const auto rep = rosenthal_bound({lam, l, Regime::large_n}, {eps, std::log(eps), t, 0.0});
    CHECK(std::abs(rep.rho_bar - oracle::dense_grid_rho(lam, l, eps, t, 1000000)) < 1e-6);
    CHECK(std::abs(rep.rho_bar - rho_bar_at(rep.c_star, {lam, l, Regime::large_n}, {eps, std::log(eps), t, 0.0})) < 1e-12);
  }
  SUBCASE("grid refinement does not move the answer") {
    const DriftParams d{0.3, 2.0, Regime::large_n};
    const MinorizationParams m{0.01, std::log(0.01), 7.0, 0.0};
    const auto coarse = rosenthal_bound(d, m, 10000), fine = rosenthal_bound(d, m, 100000);
    CHECK(std::abs(coarse.rho_bar - fine.rho_bar) < 1e-6);
  }
  SUBCASE("underflowing epsilon stays informative in log space") {
    const double log_eps = -1260.0;
    const auto rep = rosenthal_bound({0.7, 126.0, Regime::large_n}, {0.0, log_eps, 2 * 126.0 / 0.3 + 1e-6, 0.0});
    CHECK(rep.rho_bar == 1.0);
    CHECK(std::isfinite(rep.log_neg_log_rho));
    CHECK(rep.log_neg_log_rho < -1260.0);
  }
  SUBCASE("distinct hypothesis failures") {
    auto which = [](DriftParams d, MinorizationParams m) {
      try {
        rosenthal_bound(d, m);
      } catch (const BoundHypothesisError& e) {
        return static_cast<int>(e.which());
      }
      return -1;
    };
    using H = BoundHypothesisError::Hypothesis;
    CHECK(which({1.0, 1.0, Regime::large_n}, {0.5, std::log(0.5), 10.0, 0.0}) == static_cast<int>(H::lambda_not_below_one));
    CHECK(which({0.5, 1.0, Regime::large_n}, {0.0, -INFINITY, 10.0, 0.0}) == static_cast<int>(H::epsilon_not_positive));
    CHECK(which({0.5, 1.0, Regime::large_n}, {0.5, std::log(0.5), 4.0, 0.0}) == static_cast<int>(H::t_not_admissible));
  }
}

TEST_CASE("Monte Carlo drift check") {
  const Dataset ds = stable_path(200, 2, 7);
  const Posterior post(ds, Hyperparams::unit_precision(2, 1));
  RngStream rng(8);
  const auto center = mc_verify_drift(post.ls().alpha_hat, post, Regime::large_n, 2000, rng);
  CHECK(center.rhs == doctest::Approx(large_n_drift(post).big_l));
  CHECK(center.pass);
  Vec dir = rng.normal_vec(4);
  const Vec far = post.ls().alpha_hat + 100.0 * dir / dir.norm();
  const auto far_check = mc_verify_drift(far, post, Regime::large_n, 2000, rng);
  CHECK(far_check.pass);
  CHECK(far_check.rhs - far_check.lhs_estimate > center.rhs - center.lhs_estimate);
  const double l = small_n_drift(post).big_l;
  for (int i = 0; i < 10; ++i) {
    const auto c = mc_verify_drift(3.0 * rng.normal_vec(4), post, Regime::small_n, 1000, rng);
    CHECK(c.rhs == doctest::Approx(l));
    CHECK(c.pass);
  }
}

TEST_CASE("inadequacy of the fixed-data constants") {
  RngStream rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset ds = random_dataset(30, 2, 1, 1, rng);
    const Posterior post(ds, Hyperparams::make(rng.normal_vec(4), oracle::random_spd(4, rng), Mat::Zero(2, 2), 0.0));
    CHECK(inadequacy_report(post, TRule::theorem).sandwich_holds);
  }
  {
    const Dataset ds = random_dataset(30, 2, 1, 1, rng);
    const Posterior post(ds, Hyperparams::unit_precision(2, 1));
    const auto rep = inadequacy_report(post, TRule::theorem);
    const double ah = post.ls().alpha_hat.squaredNorm();
    CHECK(rep.l_lower == doctest::Approx(ah));
    CHECK(rep.l_upper == doctest::Approx(2 * ah + 4));
  }
  const Dataset path = stable_path(3200, 3, 10);
  std::vector<double> ns, stats;
  for (Index n : {100, 200, 400, 800, 1600, 3200}) {
    const Posterior post(path.prefix(n), Hyperparams::unit_precision(3, 1));
    ns.push_back(static_cast<double>(n));
    stats.push_back(inadequacy_report(post, TRule::theorem).divergence_stat);
  }
  CHECK(oracle::fit_line(ns, stats).slope > 0.0);
}

TEST_CASE("probability-limit approximations") {
  varx::model::TrueParams truth{std::sqrt(0.26) * Mat::Identity(10, 10), Mat::Ones(1, 10), Mat::Identity(10, 10)};
  const auto lim = reference_limits(truth, {40, 10, 1, 1}, 1.0);
  CHECK(lim.lambda_tilde == doctest::Approx(12.6 / 17.0));
  CHECK(lim.lambda_tilde == doctest::Approx(0.741).epsilon(1e-3));
  CHECK(lim.l_tilde == doctest::Approx(126.0));
  CHECK(lim.t_tilde == doctest::Approx(252.0));
  CHECK(lim.log_epsilon_tilde == doctest::Approx(-1260.0));
  CHECK_THROWS_AS(reference_limits(truth, {40, 10, 1, 2}, 1.0), varx::DimensionError);
}

TEST_CASE("large-n lambda decays like 1/n") {
  const Dataset path = stable_path(3200, 3, 11);
  std::vector<double> scaled;
  for (Index n : {50, 100, 200, 400, 800, 1600, 3200}) {
    const Posterior post(path.prefix(n), Hyperparams::unit_precision(3, 1));
    scaled.push_back(large_n_drift(post).lambda * static_cast<double>(n - 6 - 1 - 2));
  }
  std::vector<double> sorted = scaled;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  for (double v : scaled) CHECK(std::abs(v - median) <= 0.2 * median);
}
