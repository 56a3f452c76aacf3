#include "varx/model.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "varx/csv.hpp"
#include "varx/error.hpp"

namespace varx::model {

using linalg::pinv;
using linalg::project_spsd;

void VarxDims::validate() const {
  std::ostringstream os;
  if (n < 1 || r < 1 || q < 1 || p < 0) {
    os << "invalid dimensions n=" << n << " r=" << r << " p=" << p << " q=" << q;
    throw DimensionError(os.str());
  }
  if (n <= p) {
    os << "need n > p, got n=" << n << " p=" << p;
    throw DimensionError(os.str());
  }
}

Hyperparams Hyperparams::make(Vec m, const Mat& c, const Mat& d, double a) {
  if (!(a >= 0.0)) throw ConfigError("hyperparameter a must be >= 0");
  if (c.rows() != m.size()) throw DimensionError("prior precision C does not match m");
  Hyperparams h{std::move(m), SpsdMat(c), SpsdMat(d), a, false, false};
  h.c_spd = h.c.is_positive_definite();
  h.d_spd = h.d.is_positive_definite();
  return h;
}

Hyperparams Hyperparams::unit_precision(Index r, Index q) {
  const Index k = q * r * r;
  return make(Vec::Zero(k), Mat::Identity(k, k), Mat::Zero(r, r), 0.0);
}

Hyperparams Hyperparams::flat_alpha(Index r, Index q) {
  const Index k = q * r * r;
  return make(Vec::Zero(k), Mat::Zero(k, k), Mat::Zero(r, r), 0.0);
}

void Hyperparams::check_dims(const VarxDims& dims) const {
  if (m.size() != dims.alpha_dim() || c.dim() != dims.alpha_dim() || d.dim() != dims.r) {
    throw DimensionError("hyperparameter dimensions do not match the model");
  }
}

Dataset build_design(const Mat& presample, const Mat& y_obs, const Mat& x_obs, Index q) {
  const Index n = y_obs.rows();
  const Index r = y_obs.cols();
  if (presample.rows() != q) {
    std::ostringstream os;
    os << "presample must have exactly q=" << q << " rows, got " << presample.rows();
    throw DimensionError(os.str());
  }
  if (presample.cols() != r) throw DimensionError("presample width does not match Y");
  if (x_obs.rows() != n) throw DimensionError("X and Y have different numbers of rows");

  Dataset ds;
  ds.dims = {n, r, x_obs.cols(), q};
  ds.dims.validate();
  ds.presample = presample;
  ds.y = y_obs;
  ds.x = x_obs;
  ds.z.resize(n, q * r);
  // Series index s holds Y_{s - q + 1}; row t (0-based) of Z is
  // [Y_{t}, Y_{t-1}, ..., Y_{t-q+1}] in 1-based time.
  auto series_row = [&](Index s) { return s < q ? presample.row(s) : y_obs.row(s - q); };
  for (Index t = 0; t < n; ++t) {
    for (Index lag = 1; lag <= q; ++lag) {
      ds.z.block(t, (lag - 1) * r, 1, r) = series_row(t + q - lag);
    }
  }
  return ds;
}

Dataset Dataset::prefix(Index m) const {
  if (m < 1 || m > dims.n) throw DimensionError("prefix length out of range");
  Dataset out;
  out.dims = dims;
  out.dims.n = m;
  out.dims.validate();
  out.presample = presample;
  out.y = y.topRows(m);
  out.x = x.topRows(m);
  out.z = z.topRows(m);
  return out;
}

GramBlocks gram_blocks(const Dataset& ds) {
  const auto& d = ds.dims;
  Mat w(d.n, d.w_cols());
  w << ds.y, ds.z, ds.x;
  GramBlocks g;
  g.w = linalg::symmetrize(w.transpose() * w);
  g.r = d.r;
  g.qr = d.qr();
  g.p = d.p;
  return g;
}

LeastSquares least_squares(const GramBlocks& g) {
  Mat zz = g.zz();
  Mat zy = g.zy();
  Mat yy = g.yy();
  Mat xx_pinv = Mat::Zero(g.p, g.p);
  if (g.p > 0) {
    xx_pinv = pinv(g.xx());
    zz -= g.xz().transpose() * xx_pinv * g.xz();
    zy -= g.xz().transpose() * xx_pinv * g.xy();
    yy -= g.xy().transpose() * xx_pinv * g.xy();
  }
  const Mat zz_pinv = pinv(zz);
  Mat a_hat = zz_pinv * zy;
  // Frisch-Waugh-Lovell: Y^T Q_[Z,X] Y = Y^T Q_X Y - Y^T Q_X Z (Z^T Q_X Z)^+ Z^T Q_X Y.
  const Mat resid = yy - zy.transpose() * zz_pinv * zy;
  Vec alpha_hat = linalg::vec(a_hat);
  return LeastSquares{std::move(a_hat), std::move(alpha_hat), project_spsd(resid),
                      project_spsd(zz),  std::move(zy),        project_spsd(yy),
                      std::move(xx_pinv)};
}

LeastSquares least_squares(const Dataset& ds) { return least_squares(gram_blocks(ds)); }

namespace {

ProprietyVerdict verdict_from(const VarxDims& dims, const Hyperparams& hyper, const GramBlocks& g) {
  const double n_plus_a = static_cast<double>(dims.n) + hyper.a;
  const double r = static_cast<double>(dims.r);
  const double p = static_cast<double>(dims.p);
  const double q = static_cast<double>(dims.q);
  ProprietyVerdict v;
  v.d_spd = hyper.d_spd;
  v.x_full_rank = dims.p == 0 || linalg::gram_full_rank(g.xx());
  v.count_set1 = n_plus_a > 2.0 * r + p;
  v.alpha_prior_proper = hyper.c_spd;
  v.w_full_rank = dims.n >= dims.w_cols() && linalg::gram_full_rank(g.w);
  v.count_set2 = n_plus_a > (2.0 + q) * r + p;
  v.alpha_prior_bounded = true;  // Gaussian kernel with SPSD C
  return v;
}

}  // namespace

std::string ProprietyVerdict::describe() const {
  std::ostringstream os;
  os << "condition set 1: " << (condition_set_1() ? "holds" : "fails");
  if (!condition_set_1()) {
    os << " (";
    const char* sep = "";
    if (!d_spd) os << sep << "D not SPD", sep = ", ";
    if (!x_full_rank) os << sep << "X not full column rank", sep = ", ";
    if (!count_set1) os << sep << "n + a <= 2r + p", sep = ", ";
    if (!alpha_prior_proper) os << sep << "prior on alpha improper (C not SPD)";
    os << ")";
  }
  os << "; condition set 2: " << (condition_set_2() ? "holds" : "fails");
  if (!condition_set_2()) {
    os << " (";
    const char* sep = "";
    if (!w_full_rank) os << sep << "[Y, Z, X] not full column rank", sep = ", ";
    if (!count_set2) os << sep << "n + a <= (2 + q)r + p", sep = ", ";
    if (!alpha_prior_bounded) os << sep << "prior on alpha unbounded";
    os << ")";
  }
  return os.str();
}

ProprietyVerdict check_propriety(const VarxDims& dims, const Hyperparams& hyper, const Dataset& ds) {
  hyper.check_dims(dims);
  return verdict_from(dims, hyper, gram_blocks(ds));
}

Posterior::Posterior(Dataset ds, Hyperparams hyper)
    : ds_(std::move(ds)),
      hyper_(std::move(hyper)),
      gram_(gram_blocks(ds_)),
      ls_(least_squares(gram_)),
      verdict_(verdict_from(ds_.dims, hyper_, gram_)) {
  hyper_.check_dims(ds_.dims);
}

void Posterior::require_proper() const {
  if (!verdict_.proper()) throw ProprietyError("posterior is not proper: " + verdict_.describe());
}

double log_posterior_unnorm(const ChainState& theta, const Posterior& post) {
  const auto& d = post.dims();
  const auto& h = post.hyper();
  if (theta.sigma.dim() != d.r || theta.alpha.size() != d.alpha_dim() ||
      theta.b_coef.rows() != d.p || theta.b_coef.cols() != d.r) {
    throw DimensionError("log_posterior_unnorm: state does not match the model");
  }
  // E = W K with K = [I; -A; -B], so E^T E = K^T (W^T W) K = n S.
  Mat k(d.w_cols(), d.r);
  k << Mat::Identity(d.r, d.r), -linalg::unvec(theta.alpha, d.qr(), d.r), -theta.b_coef;
  const Mat ns = k.transpose() * post.gram().w * k;
  const Vec dev = theta.alpha - h.m;
  const double quad = dev.dot(h.c.matrix() * dev);
  const double trace = theta.sigma.solve(h.d.matrix() + ns).trace();
  return -0.5 * (static_cast<double>(d.n) + h.a) * theta.sigma.log_det() - 0.5 * trace - 0.5 * quad;
}

double companion_spectral_radius(const Mat& a, Index r, Index q) {
  const Index k = q * r;
  Mat f = Mat::Zero(k, k);
  for (Index i = 0; i < q; ++i) f.block(0, i * r, r, r) = a.block(i * r, 0, r, r).transpose();
  if (q > 1) f.block(r, 0, k - r, k - r) = Mat::Identity(k - r, k - r);
  Eigen::EigenSolver<Mat> es(f, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SimulatedVarx generate_stable_varx(const VarxDims& dims, double sigma2, dist::RngStream& rng) {
  dims.validate();
  if (!(sigma2 >= 0.0)) throw ConfigError("sigma2 must be >= 0");
  const Index r = dims.r, q = dims.q, p = dims.p, n = dims.n;

  Mat a(q * r, r);
  for (Index i = 0; i < q; ++i) {
    Mat u(r, r);
    for (Index row = 0; row < r; ++row) {
      for (Index col = 0; col < r; ++col) u(row, col) = rng.uniform(-0.5, 0.5);
    }
    const Mat s = u + u.transpose() + Mat::Identity(r, r);
    a.block(i * r, 0, r, r) = s / (linalg::spectral_norm(s) + 0.1) / static_cast<double>(q);
  }
  if (q > 1 && companion_spectral_radius(a, r, q) >= 1.0) {
    throw NumericError("generated VAR is not stable");
  }

  Mat x(n, p);
  for (Index t = 0; t < n; ++t) {
    for (Index j = 0; j < p; ++j) x(t, j) = j == 0 ? 1.0 : rng.normal();
  }
  const Mat b = Mat::Ones(p, r);
  const double sd = std::sqrt(sigma2);

  const Mat presample = Mat::Zero(q, r);
  Mat y(n, r);
  auto lagged = [&](Index t, Index lag) -> Eigen::RowVectorXd {
    const Index s = t - lag;  // 0-based observation index, negative = presample
    return s >= 0 ? Eigen::RowVectorXd(y.row(s)) : Eigen::RowVectorXd(presample.row(q + s));
  };
  for (Index t = 0; t < n; ++t) {
    Eigen::RowVectorXd yt = x.row(t) * b;
    for (Index lag = 1; lag <= q; ++lag) yt += lagged(t, lag) * a.block((lag - 1) * r, 0, r, r);
    for (Index j = 0; j < r; ++j) yt(j) += sd * rng.normal();
    y.row(t) = yt;
  }
  return {build_design(presample, y, x, q), {a, b, sigma2 * Mat::Identity(r, r)}};
}

void write_dataset_csv(std::ostream& os, const Dataset& ds) {
  const auto& d = ds.dims;
  std::vector<std::string> row{"t"};
  for (Index j = 0; j < d.r; ++j) row.push_back("y_" + std::to_string(j + 1));
  for (Index j = 0; j < d.p; ++j) row.push_back("x_" + std::to_string(j + 1));
  csv::write_row(os, row);
  for (Index s = 0; s < d.q + d.n; ++s) {
    row.clear();
    const Index t = s - d.q + 1;
    row.push_back(std::to_string(t));
    const bool pre = s < d.q;
    for (Index j = 0; j < d.r; ++j) {
      row.push_back(csv::format_double(pre ? ds.presample(s, j) : ds.y(s - d.q, j)));
    }
    for (Index j = 0; j < d.p; ++j) row.push_back(pre ? "NA" : csv::format_double(ds.x(s - d.q, j)));
    csv::write_row(os, row);
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("dataset: empty file");
  const auto header = csv::split_line(line);
  if (header.empty() || header[0] != "t") throw ConfigError("dataset: first column must be 't'");
  Index r = 0, p = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].rfind("y_", 0) == 0) {
      if (p > 0) throw ConfigError("dataset: y columns must precede x columns");
      ++r;
    } else if (header[i].rfind("x_", 0) == 0) {
      ++p;
    } else {
      throw ConfigError("dataset: unexpected column '" + header[i] + "'");
    }
  }
  if (r == 0) throw ConfigError("dataset: no y columns");

  std::vector<std::vector<double>> pre_rows, obs_y, obs_x;
  long long expected_t = std::numeric_limits<long long>::min();
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split_line(line);
    if (static_cast<Index>(f.size()) != 1 + r + p) throw ConfigError("dataset: ragged row");
    const long long t = csv::parse_int(f[0]);
    if (expected_t != std::numeric_limits<long long>::min() && t != expected_t) {
      throw ConfigError("dataset: rows must be consecutive in t");
    }
    expected_t = t + 1;
    std::vector<double> yv(r), xv(p);
    for (Index j = 0; j < r; ++j) yv[j] = csv::parse_double(f[1 + j]);
    for (Index j = 0; j < p; ++j) xv[j] = csv::parse_double(f[1 + r + j]);
    if (t <= 0) {
      if (!obs_y.empty()) throw ConfigError("dataset: presample rows must come first");
      pre_rows.push_back(std::move(yv));
    } else {
      obs_y.push_back(std::move(yv));
      obs_x.push_back(std::move(xv));
    }
  }
  const Index q = static_cast<Index>(pre_rows.size());
  const Index n = static_cast<Index>(obs_y.size());
  if (q < 1) throw ConfigError("dataset: at least one presample row (t <= 0) is required");
  Mat presample(q, r), y(n, r), x(n, p);
  for (Index i = 0; i < q; ++i) {
    for (Index j = 0; j < r; ++j) presample(i, j) = pre_rows[i][j];
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < r; ++j) y(i, j) = obs_y[i][j];
    for (Index j = 0; j < p; ++j) x(i, j) = obs_x[i][j];
  }
  if (!presample.allFinite() || !y.allFinite() || !x.allFinite()) {
    throw ConfigError("dataset: missing or non-finite values");
  }
  return build_design(presample, y, x, q);
}

}  // namespace varx::model
