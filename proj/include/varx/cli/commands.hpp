#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "varx/cli/config.hpp"
#include "varx/diagnostics.hpp"
#include "varx/model.hpp"
#include "varx/sampler.hpp"

namespace varx::cli {

/// Bound quantities for one regime at one n. NaN marks a value that could
/// not be computed (the reason is kept in `note`).
struct RegimeRow {
  double lambda;
  double big_l;
  double big_t;
  double log_epsilon;
  double log_epsilon_eigen;
  double c_star;
  double rho_bar;
  double log_neg_log_rho;
  double tv_coefficient;
  std::string note;

  RegimeRow();
};

struct ExperimentRow {
  Index n = 0;
  RegimeRow small;
  RegimeRow large;
  // Probability-limit approximations (q = 1 only).
  double lambda_tilde;
  double l_tilde;
  double t_tilde;
  double log_epsilon_tilde;
  // Large-n constants with the true A and Sigma in place of the estimates.
  diag::ReferenceCurve reference;
  double divergence_stat;
  double log_zeta;

  ExperimentRow();
};

/// Evaluates every grid point on prefixes of one path. `truth` may be null,
/// in which case the reference columns are NaN. Per-n failures become NaN
/// fields, never exceptions.
std::vector<ExperimentRow> sweep(const model::Dataset& path, const model::TrueParams* truth,
                                 const ExperimentConfig& cfg);

/// First grid n whose large-n lambda is below one.
std::optional<Index> first_lambda_below_one(const std::vector<ExperimentRow>& rows);

void write_bounds_csv(std::ostream& os, const std::vector<ExperimentRow>& rows);
void write_experiment_csv(std::ostream& os, const std::vector<ExperimentRow>& rows);
void write_drift_svg(std::ostream& os, const std::vector<ExperimentRow>& rows);
void write_minorization_svg(std::ostream& os, const std::vector<ExperimentRow>& rows);

void write_truth_json(std::ostream& os, const model::TrueParams& truth, const ExperimentConfig& cfg);
model::TrueParams read_truth_json(std::istream& is);

struct ParamSummary {
  std::string name;
  double mean;
  double mcse;
  double rhat;  // NaN with a single chain
};

/// Pooled means, batch-means standard errors (combined across chains) and
/// the potential scale reduction for every flattened parameter.
std::vector<ParamSummary> summarize(const std::vector<sampler::ChainTrace>& traces,
                                    const model::VarxDims& dims);
void write_summary_csv(std::ostream& os, const std::vector<ParamSummary>& rows);

/// Runs cfg.chains chains of cfg.iters scans. Chain k uses streams derived
/// from (cfg.seed, k); chain 0 starts at the least-squares point and the
/// others at jittered copies of it.
std::vector<sampler::ChainTrace> run_chains(const model::Posterior& post, const ExperimentConfig& cfg);

/// Loads the data file and truncates to cfg.n observations when set.
model::Dataset load_dataset(const ExperimentConfig& cfg);

// Subcommands. Each returns the process exit code; progress and verdicts go
// to `log`. Errors propagate as varx::Error subclasses.
int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);
int cmd_sample(const ExperimentConfig& cfg, std::ostream& log);
int cmd_diagnose(const ExperimentConfig& cfg, std::ostream& log);
int cmd_check(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace varx::cli
