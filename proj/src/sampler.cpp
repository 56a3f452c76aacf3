#include "varx/sampler.hpp"

#include <ostream>
#include <string>

#include "varx/csv.hpp"
#include "varx/error.hpp"

namespace varx::sampler {

using linalg::unvec;

dist::InvWishart cond_sigma_given_alpha(const Vec& alpha, const Posterior& post) {
  const auto& d = post.dims();
  const auto& ls = post.ls();
  if (alpha.size() != d.alpha_dim()) throw DimensionError("alpha has the wrong length");
  const Mat a = unvec(alpha, d.qr(), d.r);
  // (Y - Z A)^T Q_X (Y - Z A) expanded in Q_X-residualized Grams.
  const Mat cross = ls.qxzy.transpose() * a;
  const Mat resid = ls.qxy_gram.matrix() - cross - cross.transpose() +
                    a.transpose() * ls.qxz_gram.matrix() * a;
  const double dof = static_cast<double>(d.n) + post.hyper().a - static_cast<double>(d.p) -
                     static_cast<double>(d.r) - 1.0;
  try {
    return dist::InvWishart(SpdMat(linalg::symmetrize(post.hyper().d.matrix() + resid)), dof);
  } catch (const NumericError& e) {
    throw ProprietyError(std::string("Sigma conditional scale is not SPD: ") + e.what());
  }
}

dist::PrecisionGaussian cond_alpha_given_sigma(const SpdMat& sigma, const Posterior& post) {
  const auto& d = post.dims();
  const auto& h = post.hyper();
  const auto& ls = post.ls();
  if (sigma.dim() != d.r) throw DimensionError("Sigma has the wrong dimension");
  const Mat sigma_inv = sigma.inverse();
  const Mat precision = h.c.matrix() + linalg::kron(sigma_inv, ls.qxz_gram.matrix());
  Vec shift = h.c.matrix() * h.m + linalg::vec(ls.qxzy * sigma_inv);
  try {
    return dist::PrecisionGaussian(SpdMat(precision), std::move(shift));
  } catch (const NumericError& e) {
    throw ProprietyError(std::string("alpha conditional precision is not SPD: ") + e.what());
  }
}

dist::MatrixNormal cond_b_given_alpha_sigma(const Vec& alpha, const SpdMat& sigma,
                                            const Posterior& post) {
  const auto& d = post.dims();
  const auto& g = post.gram();
  if (d.p == 0) throw DimensionError("B conditional requested for a model without predictors");
  if (!post.propriety().x_full_rank) throw ProprietyError("X does not have full column rank");
  const Mat a = unvec(alpha, d.qr(), d.r);
  const SpdMat xx(g.xx());
  Mat xx_inv = xx.inverse();
  Mat mean = xx.solve(g.xy() - g.xz() * a);
  return dist::MatrixNormal(std::move(mean), SpdMat(xx_inv), sigma);
}

Vec alpha_kernel_step(const Vec& alpha, const Posterior& post, dist::RngStream& core) {
  const SpdMat sigma = dist::draw_inv_wishart(cond_sigma_given_alpha(alpha, post), core);
  return dist::draw_precision_gaussian(cond_alpha_given_sigma(sigma, post), core);
}

ChainState gibbs_step(const ChainState& state, const Posterior& post, ChainRng& rng) {
  SpdMat sigma = dist::draw_inv_wishart(cond_sigma_given_alpha(state.alpha, post), rng.core);
  Vec alpha = dist::draw_precision_gaussian(cond_alpha_given_sigma(sigma, post), rng.core);
  Mat b = post.dims().p > 0
              ? dist::draw_matrix_normal(cond_b_given_alpha_sigma(alpha, sigma, post), rng.coef)
              : Mat(0, post.dims().r);
  return ChainState{std::move(alpha), std::move(b), std::move(sigma)};
}

ChainState default_start(const Posterior& post) {
  const auto& d = post.dims();
  const auto& g = post.gram();
  const auto& ls = post.ls();
  Mat b(d.p, d.r);
  if (d.p > 0) b = ls.xx_pinv * (g.xy() - g.xz() * ls.a_hat);
  SpdMat sigma = SpdMat::identity(d.r);
  if (ls.resid_gram.is_positive_definite()) {
    sigma = SpdMat(ls.resid_gram.matrix() / static_cast<double>(d.n));
  }
  return ChainState{ls.alpha_hat, std::move(b), std::move(sigma)};
}

ChainTrace run_chain(const ChainState& start, Index iters, const Posterior& post, ChainRng& rng,
                     TraceOptions opts) {
  if (iters < 0 || opts.burn < 0 || opts.thin < 1) {
    throw DimensionError("run_chain: iters and burn must be >= 0 and thin >= 1");
  }
  ChainTrace trace;
  trace.seed = rng.core.seed();
  trace.chain_id = rng.core.stream() / 2;
  auto record = [&](Index it, const ChainState& s) {
    if (it < opts.burn || (it - opts.burn) % opts.thin != 0) return;
    trace.iteration.push_back(it);
    trace.states.push_back(s);
    trace.log_post.push_back(model::log_posterior_unnorm(s, post));
  };
  ChainState current = start;
  record(0, current);
  for (Index it = 1; it <= iters; ++it) {
    current = gibbs_step(current, post, rng);
    record(it, current);
  }
  return trace;
}

ChainState conjugate_direct_sample(const Posterior& post, dist::RngStream& rng) {
  const auto& d = post.dims();
  const auto& h = post.hyper();
  const auto& ls = post.ls();
  if (h.c.eigs().max != 0.0) throw ProprietyError("direct sampling requires C = 0");
  if (!ls.qxz_gram.is_positive_definite()) throw ProprietyError("Z^T Q_X Z is not SPD");
  if (!post.propriety().condition_set_2()) {
    throw ProprietyError("direct sampling requires condition set 2: " +
                         post.propriety().describe());
  }
  const double dof = static_cast<double>(d.n) + h.a - static_cast<double>(d.p) -
                     static_cast<double>(d.qr()) - static_cast<double>(d.r) - 1.0;
  const dist::InvWishart sigma_law(SpdMat(h.d.matrix() + ls.resid_gram.matrix()), dof);
  SpdMat sigma = dist::draw_inv_wishart(sigma_law, rng);
  const SpdMat zz(ls.qxz_gram.matrix());
  const dist::MatrixNormal a_law(ls.a_hat, SpdMat(zz.inverse()), sigma);
  Vec alpha = linalg::vec(dist::draw_matrix_normal(a_law, rng));
  Mat b = d.p > 0 ? dist::draw_matrix_normal(cond_b_given_alpha_sigma(alpha, sigma, post), rng)
                  : Mat(0, d.r);
  return ChainState{std::move(alpha), std::move(b), std::move(sigma)};
}

Vec flatten(const ChainState& s) {
  const Vec b = linalg::vec(s.b_coef);
  const Vec sig = linalg::vech(s.sigma.matrix());
  Vec out(s.alpha.size() + b.size() + sig.size());
  out << s.alpha, b, sig;
  return out;
}

std::vector<std::string> flat_names(const model::VarxDims& dims) {
  std::vector<std::string> names;
  for (Index i = 0; i < dims.alpha_dim(); ++i) names.push_back("alpha_" + std::to_string(i + 1));
  for (Index i = 0; i < dims.p * dims.r; ++i) names.push_back("b_" + std::to_string(i + 1));
  for (Index i = 0; i < dims.r * (dims.r + 1) / 2; ++i) {
    names.push_back("sigma_" + std::to_string(i + 1));
  }
  return names;
}

void write_trace_csv(std::ostream& os, const ChainTrace& trace, const model::VarxDims& dims) {
  std::vector<std::string> row{"iter"};
  for (auto& n : flat_names(dims)) row.push_back(std::move(n));
  row.push_back("logpost");
  csv::write_row(os, row);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    row.clear();
    row.push_back(std::to_string(trace.iteration[i]));
    const Vec f = flatten(trace.states[i]);
    for (Index j = 0; j < f.size(); ++j) row.push_back(csv::format_double(f(j)));
    row.push_back(csv::format_double(trace.log_post[i]));
    csv::write_row(os, row);
  }
}

}  // namespace varx::sampler
