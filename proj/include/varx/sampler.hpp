#pragma once

// Collapsed Gibbs sampler. One scan draws, in this order,
//   Sigma | alpha        (B integrated out)
//   alpha | Sigma        (B integrated out)
//   B     | alpha, Sigma
// The (alpha, Sigma) sequence is a two-component Gibbs chain and the alpha
// sequence alone is a Markov chain; the bound computations in diagnostics.hpp
// are stated for that alpha chain.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "varx/distributions.hpp"
#include "varx/model.hpp"

namespace varx::sampler {

using linalg::Index;
using linalg::Mat;
using linalg::SpdMat;
using linalg::Vec;
using model::ChainState;
using model::Posterior;

/// Random streams for one chain. The (Sigma, alpha) draws consume only
/// `core`, the B draws only `coef`, so the alpha path does not depend on how
/// many B draws were made.
struct ChainRng {
  dist::RngStream core;
  dist::RngStream coef;

  static ChainRng make(std::uint64_t seed, std::uint64_t chain_id) {
    return {dist::RngStream(seed, 2 * chain_id), dist::RngStream(seed, 2 * chain_id + 1)};
  }
};

dist::InvWishart cond_sigma_given_alpha(const Vec& alpha, const Posterior& post);
dist::PrecisionGaussian cond_alpha_given_sigma(const SpdMat& sigma, const Posterior& post);
/// Requires p >= 1 and X of full column rank.
dist::MatrixNormal cond_b_given_alpha_sigma(const Vec& alpha, const SpdMat& sigma,
                                            const Posterior& post);

ChainState gibbs_step(const ChainState& state, const Posterior& post, ChainRng& rng);

/// One transition of the alpha-marginal kernel: Sigma | alpha' then
/// alpha | Sigma, drawing from `core` exactly as gibbs_step does.
Vec alpha_kernel_step(const Vec& alpha, const Posterior& post, dist::RngStream& core);

/// alpha = alpha_hat, B = least squares of Y - Z A_hat on X, Sigma = the
/// residual covariance Y^T Q_[Z,X] Y / n (identity if that is singular).
ChainState default_start(const Posterior& post);

struct TraceOptions {
  Index burn = 0;  // iterations discarded before recording
  Index thin = 1;  // keep every thin-th recorded state
};

struct ChainTrace {
  std::vector<Index> iteration;  // 0 is the start state
  std::vector<ChainState> states;
  std::vector<double> log_post;
  std::uint64_t seed = 0;
  std::uint64_t chain_id = 0;

  std::size_t size() const { return states.size(); }
};

ChainTrace run_chain(const ChainState& start, Index iters, const Posterior& post, ChainRng& rng,
                     TraceOptions opts = {});

/// Exact posterior draw for C = 0 (normal-inverse Wishart posterior):
/// Sigma ~ W^{-1}(D + Y^T Q_[Z,X] Y, n + a - p - qr - r - 1),
/// A | Sigma ~ M(A_hat, (Z^T Q_X Z)^{-1}, Sigma), then B | A, Sigma.
ChainState conjugate_direct_sample(const Posterior& post, dist::RngStream& rng);

/// [alpha; vec(B); vech(Sigma)].
Vec flatten(const ChainState& s);
std::vector<std::string> flat_names(const model::VarxDims& dims);

/// Columns: iter, alpha_1..alpha_{qr^2}, b_1..b_{pr}, sigma_1..sigma_{r(r+1)/2}, logpost.
void write_trace_csv(std::ostream& os, const ChainTrace& trace, const model::VarxDims& dims);

}  // namespace varx::sampler
