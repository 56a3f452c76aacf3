#include "varx/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "varx/chain_stats.hpp"
#include "varx/cli/svg_plot.hpp"
#include "varx/csv.hpp"
#include "varx/error.hpp"

namespace varx::cli {

namespace fs = std::filesystem;
using linalg::Mat;
using linalg::Vec;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path);
  return is;
}

void fill_regime(RegimeRow& row, const model::Posterior& post, diag::Regime regime, diag::TRule rule) {
  const bool small = regime == diag::Regime::small_n;
  try {
    const diag::DriftParams drift = small ? diag::small_n_drift(post) : diag::large_n_drift(post);
    row.lambda = drift.lambda;
    row.big_l = drift.big_l;
    row.big_t = diag::select_t(drift, rule);
    const diag::MinorizationParams minor = small ? diag::small_n_minorization(post, row.big_t)
                                                 : diag::large_n_minorization(post, row.big_t);
    row.log_epsilon = minor.log_epsilon;
    row.log_epsilon_eigen = minor.log_epsilon_eigen;
    const diag::BoundReport rep = diag::rosenthal_bound(drift, minor);
    row.c_star = rep.c_star;
    row.rho_bar = rep.rho_bar;
    row.log_neg_log_rho = rep.log_neg_log_rho;
    row.tv_coefficient = rep.tv_coefficient;
  } catch (const Error& e) {
    row.note = e.what();
  }
}

std::string fmt(double v) { return csv::format_double(v); }

Mat json_to_mat(const nlohmann::json& j, Index rows, Index cols) {
  Mat m(rows, cols);
  if (j.size() != static_cast<std::size_t>(rows)) throw ConfigError("truth.json: bad matrix shape");
  for (Index i = 0; i < rows; ++i) {
    if (j[i].size() != static_cast<std::size_t>(cols)) throw ConfigError("truth.json: bad matrix shape");
    for (Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

}  // namespace

RegimeRow::RegimeRow()
    : lambda(kNaN), big_l(kNaN), big_t(kNaN), log_epsilon(kNaN), log_epsilon_eigen(kNaN),
      c_star(kNaN), rho_bar(kNaN), log_neg_log_rho(kNaN), tv_coefficient(kNaN) {}

ExperimentRow::ExperimentRow()
    : lambda_tilde(kNaN), l_tilde(kNaN), t_tilde(kNaN), log_epsilon_tilde(kNaN),
      reference{kNaN, kNaN, kNaN, kNaN}, divergence_stat(kNaN), log_zeta(kNaN) {}

std::vector<ExperimentRow> sweep(const model::Dataset& path, const model::TrueParams* truth,
                                 const ExperimentConfig& cfg) {
  const model::Hyperparams hyper = cfg.hyperparams();
  std::vector<ExperimentRow> rows;
  for (Index n : cfg.n_grid) {
    ExperimentRow row;
    row.n = n;
    if (truth) {
      model::VarxDims dims = path.dims;
      dims.n = n;
      if (dims.q == 1) {
        const diag::ReferenceLimits lim = diag::reference_limits(*truth, dims, cfg.sigma2);
        row.lambda_tilde = lim.lambda_tilde;
        row.l_tilde = lim.l_tilde;
        row.t_tilde = lim.t_tilde;
        row.log_epsilon_tilde = lim.log_epsilon_tilde;
      }
      try {
        row.reference = diag::reference_curve(*truth, dims, hyper, cfg.t_rule);
      } catch (const Error&) {
      }
    }
    if (n > path.dims.n) {
      row.small.note = row.large.note = "n exceeds the simulated path";
      rows.push_back(std::move(row));
      continue;
    }
    try {
      const model::Posterior post(path.prefix(n), hyper);
      if (!post.propriety().proper()) {
        row.small.note = row.large.note = "improper posterior: " + post.propriety().describe();
      } else {
        fill_regime(row.small, post, diag::Regime::small_n, cfg.t_rule);
        fill_regime(row.large, post, diag::Regime::large_n, cfg.t_rule);
        try {
          const diag::InadequacyReport inad = diag::inadequacy_report(post, cfg.t_rule);
          row.divergence_stat = inad.divergence_stat;
          row.log_zeta = inad.log_zeta;
        } catch (const Error&) {
        }
      }
    } catch (const Error& e) {
      row.small.note = row.large.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<Index> first_lambda_below_one(const std::vector<ExperimentRow>& rows) {
  for (const auto& row : rows) {
    if (row.large.lambda < 1.0) return row.n;
  }
  return std::nullopt;
}

void write_bounds_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  csv::write_row(os, {"n", "regime", "lambda", "L", "T", "log_epsilon", "c_star", "rho_bar", "tv_coeff",
                      "log_neg_log_rho_bar"});
  for (const auto& row : rows) {
    for (const auto* reg : {&row.small, &row.large}) {
      csv::write_row(os, {std::to_string(row.n), reg == &row.small ? "small_n" : "large_n",
                          fmt(reg->lambda), fmt(reg->big_l), fmt(reg->big_t), fmt(reg->log_epsilon),
                          fmt(reg->c_star), fmt(reg->rho_bar), fmt(reg->tv_coefficient),
                          fmt(reg->log_neg_log_rho)});
    }
  }
}

void write_experiment_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  csv::write_row(os, {"n",
                      "small_lambda", "small_L", "small_T", "small_log_epsilon", "small_rho_bar",
                      "large_lambda", "large_L", "large_T", "large_log_epsilon", "large_log_epsilon_tau",
                      "large_rho_bar", "large_log_neg_log_rho_bar",
                      "lambda_tilde", "L_tilde", "T_tilde", "log_epsilon_tilde",
                      "lambda_true", "L_true", "T_true", "log_epsilon_true",
                      "divergence_stat", "log_zeta"});
  for (const auto& r : rows) {
    csv::write_row(os, {std::to_string(r.n),
                        fmt(r.small.lambda), fmt(r.small.big_l), fmt(r.small.big_t),
                        fmt(r.small.log_epsilon), fmt(r.small.rho_bar),
                        fmt(r.large.lambda), fmt(r.large.big_l), fmt(r.large.big_t),
                        fmt(r.large.log_epsilon), fmt(r.large.log_epsilon_eigen),
                        fmt(r.large.rho_bar), fmt(r.large.log_neg_log_rho),
                        fmt(r.lambda_tilde), fmt(r.l_tilde), fmt(r.t_tilde), fmt(r.log_epsilon_tilde),
                        fmt(r.reference.lambda), fmt(r.reference.big_l), fmt(r.reference.big_t),
                        fmt(r.reference.log_epsilon),
                        fmt(r.divergence_stat), fmt(r.log_zeta)});
  }
}

namespace {

template <class F>
std::vector<double> column(const std::vector<ExperimentRow>& rows, F f) {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(f(r));
  return out;
}

}  // namespace

void write_drift_svg(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  const auto n = column(rows, [](const auto& r) { return static_cast<double>(r.n); });
  std::vector<double> cross;
  if (auto c = first_lambda_below_one(rows)) cross.push_back(static_cast<double>(*c));

  Panel lam{"lambda_n", "n", "lambda", true, true, {}, cross};
  lam.series.push_back({"observed", "#1f4e9a", Stroke::markers, n,
                        column(rows, [](const auto& r) { return r.large.lambda; })});
  lam.series.push_back({"true A, Sigma", "#1f4e9a", Stroke::dashed, n,
                        column(rows, [](const auto& r) { return r.reference.lambda; })});
  lam.series.push_back({"approximation", "#b03030", Stroke::dotted, n,
                        column(rows, [](const auto& r) { return r.lambda_tilde; })});
  lam.series.push_back({"lambda = 1", "#666666", Stroke::solid, n, std::vector<double>(n.size(), 1.0)});

  Panel big_l{"L_n", "n", "L", true, false, {}, cross};
  big_l.series.push_back({"observed", "#1f4e9a", Stroke::markers, n,
                          column(rows, [](const auto& r) { return r.large.big_l; })});
  big_l.series.push_back({"true A, Sigma", "#1f4e9a", Stroke::dashed, n,
                          column(rows, [](const auto& r) { return r.reference.big_l; })});
  big_l.series.push_back({"approximation", "#b03030", Stroke::dotted, n,
                          column(rows, [](const auto& r) { return r.l_tilde; })});
  write_svg(os, {lam, big_l});
}

void write_minorization_svg(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  const auto n = column(rows, [](const auto& r) { return static_cast<double>(r.n); });
  Panel small{"log epsilon_n, fixed-data constants", "n", "log epsilon", false, false, {}, {}};
  small.series.push_back({"observed", "#1f4e9a", Stroke::markers, n,
                          column(rows, [](const auto& r) { return r.small.log_epsilon; })});
  small.series.push_back({"", "#1f4e9a", Stroke::solid, n,
                          column(rows, [](const auto& r) { return r.small.log_epsilon; })});

  Panel large{"log epsilon_n, centered constants", "n", "log epsilon", true, false, {}, {}};
  large.series.push_back({"observed", "#1f4e9a", Stroke::markers, n,
                          column(rows, [](const auto& r) { return r.large.log_epsilon; })});
  large.series.push_back({"true A, Sigma", "#1f4e9a", Stroke::dashed, n,
                          column(rows, [](const auto& r) { return r.reference.log_epsilon; })});
  large.series.push_back({"approximation", "#b03030", Stroke::dotted, n,
                          column(rows, [](const auto& r) { return r.log_epsilon_tilde; })});
  write_svg(os, {small, large});
}

void write_truth_json(std::ostream& os, const model::TrueParams& truth, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["r"] = cfg.r;
  j["p"] = cfg.p;
  j["q"] = cfg.q;
  j["sigma2"] = cfg.sigma2;
  j["seed"] = cfg.seed;
  j["a"] = mat_to_json(truth.a);
  j["b"] = mat_to_json(truth.b);
  j["sigma"] = mat_to_json(truth.sigma);
  j["a_frobenius_sq"] = truth.a.squaredNorm();
  os << j.dump(2) << '\n';
}

model::TrueParams read_truth_json(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
    const Index r = j.at("r").get<Index>();
    const Index p = j.at("p").get<Index>();
    const Index q = j.at("q").get<Index>();
    return {json_to_mat(j.at("a"), q * r, r), json_to_mat(j.at("b"), p, r), json_to_mat(j.at("sigma"), r, r)};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("truth.json: ") + e.what());
  }
}

std::vector<ParamSummary> summarize(const std::vector<sampler::ChainTrace>& traces,
                                    const model::VarxDims& dims) {
  const auto names = sampler::flat_names(dims);
  std::vector<std::vector<std::vector<double>>> series(names.size());
  for (const auto& tr : traces) {
    std::vector<std::vector<double>> per(names.size());
    for (const auto& s : tr.states) {
      const Vec f = sampler::flatten(s);
      for (std::size_t k = 0; k < names.size(); ++k) per[k].push_back(f(static_cast<Index>(k)));
    }
    for (std::size_t k = 0; k < names.size(); ++k) series[k].push_back(std::move(per[k]));
  }
  std::vector<ParamSummary> out;
  for (std::size_t k = 0; k < names.size(); ++k) {
    double mean = 0.0, var = 0.0;
    std::size_t total = 0;
    for (const auto& chain : series[k]) {
      if (chain.size() < 4) continue;
      const auto bm = sampler::batch_means(chain);
      mean += bm.mean * static_cast<double>(chain.size());
      var += bm.std_error * bm.std_error * static_cast<double>(chain.size() * chain.size());
      total += chain.size();
    }
    ParamSummary row{names[k], kNaN, kNaN, kNaN};
    if (total > 0) {
      row.mean = mean / static_cast<double>(total);
      row.mcse = std::sqrt(var) / static_cast<double>(total);
    }
    if (series[k].size() > 1 && total > 0) row.rhat = sampler::gelman_rubin(series[k]);
    out.push_back(std::move(row));
  }
  return out;
}

void write_summary_csv(std::ostream& os, const std::vector<ParamSummary>& rows) {
  csv::write_row(os, {"param", "mean", "mcse", "rhat"});
  for (const auto& r : rows) csv::write_row(os, {r.name, fmt(r.mean), fmt(r.mcse), fmt(r.rhat)});
}

std::vector<sampler::ChainTrace> run_chains(const model::Posterior& post, const ExperimentConfig& cfg) {
  std::vector<sampler::ChainTrace> out;
  const model::ChainState base = sampler::default_start(post);
  for (Index k = 0; k < cfg.chains; ++k) {
    model::ChainState start = base;
    if (k > 0) {
      // Jitter stream ids sit above every chain's core/coef pair.
      dist::RngStream jitter(cfg.seed, (std::uint64_t{1} << 32) + static_cast<std::uint64_t>(k));
      start.alpha += 0.5 * jitter.normal_vec(start.alpha.size());
    }
    auto rng = sampler::ChainRng::make(cfg.seed, static_cast<std::uint64_t>(k));
    out.push_back(sampler::run_chain(start, cfg.iters, post, rng, {cfg.burn, cfg.thin}));
  }
  return out;
}

model::Dataset load_dataset(const ExperimentConfig& cfg) {
  auto in = open_in(cfg.data_path());
  model::Dataset ds = model::read_dataset_csv(in);
  if (ds.dims.r != cfg.r || ds.dims.p != cfg.p || ds.dims.q != cfg.q) {
    std::ostringstream os;
    os << cfg.data_path() << " has r = " << ds.dims.r << ", p = " << ds.dims.p << ", q = " << ds.dims.q
       << " but the configuration says r = " << cfg.r << ", p = " << cfg.p << ", q = " << cfg.q;
    throw ConfigError(os.str());
  }
  if (cfg.n > 0) {
    if (cfg.n > ds.dims.n) {
      throw ConfigError("n = " + std::to_string(cfg.n) + " exceeds the " + std::to_string(ds.dims.n) +
                        " observations in " + cfg.data_path());
    }
    ds = ds.prefix(cfg.n);
  }
  return ds;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  dist::RngStream rng(cfg.seed, 0);
  const model::SimulatedVarx sim = model::generate_stable_varx(cfg.sim_dims(), cfg.sigma2, rng);
  {
    auto os = open_out(cfg.data_path());
    model::write_dataset_csv(os, sim.data);
  }
  {
    auto os = open_out(cfg.truth_path());
    write_truth_json(os, sim.truth, cfg);
  }
  log << "wrote " << sim.data.dims.n << " observations (+" << sim.data.dims.q << " presample rows) to "
      << cfg.data_path() << "\n";
  log << "||A||_F^2 = " << csv::format_double(sim.truth.a.squaredNorm()) << "\n";
  return 0;
}

int cmd_sample(const ExperimentConfig& cfg, std::ostream& log) {
  const model::Posterior post(load_dataset(cfg), cfg.hyperparams());
  post.require_proper();
  const auto traces = run_chains(post, cfg);
  const fs::path out(cfg.out);
  for (const auto& tr : traces) {
    auto os = open_out(out / ("trace_chain" + std::to_string(tr.chain_id) + ".csv"));
    sampler::write_trace_csv(os, tr, post.dims());
  }
  const auto summary = summarize(traces, post.dims());
  {
    auto os = open_out(out / "summary.csv");
    write_summary_csv(os, summary);
  }
  double worst = 0.0;
  for (const auto& s : summary) {
    if (std::isfinite(s.rhat)) worst = std::max(worst, s.rhat);
  }
  log << "ran " << traces.size() << " chain(s) of " << cfg.iters << " scans on n = " << post.dims().n << "\n";
  if (traces.size() > 1) log << "max Gelman-Rubin: " << csv::format_double(worst) << "\n";
  return 0;
}

int cmd_diagnose(const ExperimentConfig& cfg, std::ostream& log) {
  auto in = open_in(cfg.data_path());
  const model::Dataset path = model::read_dataset_csv(in);
  std::optional<model::TrueParams> truth;
  if (fs::exists(cfg.truth_path())) {
    auto tin = open_in(cfg.truth_path());
    truth = read_truth_json(tin);
  }
  const auto rows = sweep(path, truth ? &*truth : nullptr, cfg);
  const fs::path out(cfg.out);
  {
    auto os = open_out(out / "bounds.csv");
    write_bounds_csv(os, rows);
  }
  {
    auto os = open_out(out / "experiment.csv");
    write_experiment_csv(os, rows);
  }
  {
    auto os = open_out(out / "drift.svg");
    write_drift_svg(os, rows);
  }
  {
    auto os = open_out(out / "minorization.svg");
    write_minorization_svg(os, rows);
  }
  for (const auto& row : rows) {
    if (!row.small.note.empty()) log << "n = " << row.n << " (small_n): " << row.small.note << "\n";
    if (!row.large.note.empty()) log << "n = " << row.n << " (large_n): " << row.large.note << "\n";
  }
  if (auto c = first_lambda_below_one(rows)) {
    log << "smallest n with lambda_n < 1: " << *c << "\n";
  } else {
    log << "smallest n with lambda_n < 1: none in grid\n";
  }
  return 0;
}

int cmd_check(const ExperimentConfig& cfg, std::ostream& log) {
  const model::Dataset ds = load_dataset(cfg);
  const model::Hyperparams hyper = cfg.hyperparams();
  const model::ProprietyVerdict v = model::check_propriety(ds.dims, hyper, ds);
  auto b = [](bool x) { return x ? "true" : "false"; };
  log << "n = " << ds.dims.n << ", r = " << ds.dims.r << ", p = " << ds.dims.p << ", q = " << ds.dims.q << "\n";
  log << "set1.d_spd = " << b(v.d_spd) << "\n";
  log << "set1.x_full_rank = " << b(v.x_full_rank) << "\n";
  log << "set1.count = " << b(v.count_set1) << "\n";
  log << "set1.alpha_prior_proper = " << b(v.alpha_prior_proper) << "\n";
  log << "set1 = " << b(v.condition_set_1()) << "\n";
  log << "set2.w_full_rank = " << b(v.w_full_rank) << "\n";
  log << "set2.count = " << b(v.count_set2) << "\n";
  log << "set2.alpha_prior_bounded = " << b(v.alpha_prior_bounded) << "\n";
  log << "set2 = " << b(v.condition_set_2()) << "\n";
  log << "proper = " << b(v.proper()) << "\n";
  return v.proper() ? 0 : 2;
}

}  // namespace varx::cli
