#include "varx/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "varx/error.hpp"

namespace varx::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

Index to_count(const std::string& key, const std::string& v, long long min) {
  const long long x = to_int(key, v);
  if (x < min) throw ConfigError(key + " must be >= " + std::to_string(min));
  return static_cast<Index>(x);
}

std::vector<Index> to_grid(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_count(key, trim(item), 1));
  if (out.empty()) throw ConfigError(key + " must list at least one sample size");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw ConfigError(key + " must be strictly increasing");
  }
  return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "r",   "p",       "q",       "sigma2", "n_grid", "seed",  "m",     "c",    "c_scale",
      "d",   "a",       "t_rule",  "out",    "data",   "truth", "n",     "iters", "burn",
      "thin", "chains"};
  return keys;
}

std::string ExperimentConfig::data_path() const {
  return data.empty() ? (fs::path(out) / "data.csv").string() : data;
}

std::string ExperimentConfig::truth_path() const {
  if (!truth.empty()) return truth;
  return (fs::path(data_path()).parent_path() / "truth.json").string();
}

model::VarxDims ExperimentConfig::sim_dims() const {
  return {n_grid.back(), r, p, q};
}

model::Hyperparams ExperimentConfig::hyperparams() const {
  const Index k = q * r * r;
  linalg::Mat c = linalg::Mat::Identity(k, k);
  if (c_rule == CRule::zero) c.setZero();
  if (c_rule == CRule::scale) c *= c_scale;
  return model::Hyperparams::make(linalg::Vec::Constant(k, m_value), c,
                                  d_scale * linalg::Mat::Identity(r, r), a);
}

KeyValues parse_config_text(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) throw ConfigError("duplicate config key '" + key + "'");
  }
  return kv;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

void apply_env_overrides(KeyValues& kv,
                         const std::function<std::optional<std::string>(const std::string&)>& getenv) {
  for (const auto& key : config_keys()) {
    std::string name = "VARX_" + key;
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    if (auto v = getenv(name)) kv[key] = trim(*v);
  }
}

ExperimentConfig make_config(const KeyValues& kv) {
  const auto& keys = config_keys();
  for (const auto& [k, v] : kv) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
  ExperimentConfig cfg;
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("r")) cfg.r = to_count("r", *v, 1);
  if (auto v = get("p")) cfg.p = to_count("p", *v, 0);
  if (auto v = get("q")) cfg.q = to_count("q", *v, 1);
  if (auto v = get("sigma2")) cfg.sigma2 = to_double("sigma2", *v);
  if (auto v = get("n_grid")) cfg.n_grid = to_grid("n_grid", *v);
  if (auto v = get("seed")) cfg.seed = static_cast<std::uint64_t>(to_count("seed", *v, 0));
  if (auto v = get("m")) cfg.m_value = to_double("m", *v);
  if (auto v = get("c")) {
    if (*v == "identity") {
      cfg.c_rule = CRule::identity;
    } else if (*v == "zero") {
      cfg.c_rule = CRule::zero;
    } else if (*v == "scale") {
      cfg.c_rule = CRule::scale;
    } else {
      throw ConfigError("c must be identity, zero or scale");
    }
  }
  if (auto v = get("c_scale")) cfg.c_scale = to_double("c_scale", *v);
  if (auto v = get("d")) cfg.d_scale = to_double("d", *v);
  if (auto v = get("a")) cfg.a = to_double("a", *v);
  if (auto v = get("t_rule")) cfg.t_rule = diag::parse_t_rule(*v);
  if (auto v = get("out")) cfg.out = *v;
  if (auto v = get("data")) cfg.data = *v;
  if (auto v = get("truth")) cfg.truth = *v;
  if (auto v = get("n")) cfg.n = to_count("n", *v, 0);
  if (auto v = get("iters")) cfg.iters = to_count("iters", *v, 0);
  if (auto v = get("burn")) cfg.burn = to_count("burn", *v, 0);
  if (auto v = get("thin")) cfg.thin = to_count("thin", *v, 1);
  if (auto v = get("chains")) cfg.chains = to_count("chains", *v, 1);

  if (!(cfg.sigma2 >= 0.0)) throw ConfigError("sigma2 must be >= 0");
  if (cfg.c_rule == CRule::scale && !(cfg.c_scale > 0.0)) throw ConfigError("c_scale must be > 0");
  if (!(cfg.d_scale >= 0.0)) throw ConfigError("d must be >= 0");
  if (!std::isfinite(cfg.a) || !std::isfinite(cfg.m_value)) throw ConfigError("a and m must be finite");
  if (cfg.out.empty()) throw ConfigError("out must not be empty");
  return cfg;
}

}  // namespace varx::cli
