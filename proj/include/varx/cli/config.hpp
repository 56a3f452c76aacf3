#pragma once

// Experiment configuration. Values come from, in increasing precedence:
// built-in defaults, a flat `key = value` file (# starts a comment),
// VARX_<KEY> environment variables, and command-line flags.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "varx/diagnostics.hpp"
#include "varx/model.hpp"

namespace varx::cli {

using linalg::Index;

enum class CRule { identity, zero, scale };

struct ExperimentConfig {
  Index r = 3;
  Index p = 1;
  Index q = 1;
  double sigma2 = 1.0;
  std::vector<Index> n_grid{50, 100, 200, 400, 800, 1600, 3200};
  std::uint64_t seed = 1;

  double m_value = 0.0;  // every entry of m
  CRule c_rule = CRule::identity;
  double c_scale = 1.0;  // C = c_scale I under CRule::scale
  double d_scale = 0.0;  // D = d_scale I
  double a = 0.0;
  diag::TRule t_rule = diag::TRule::theorem;

  std::string out = "out";
  std::string data;   // empty: <out>/data.csv
  std::string truth;  // empty: truth.json next to the data file

  Index n = 0;  // observations used by sample/check, 0 = all
  Index iters = 10000;
  Index burn = 1000;
  Index thin = 1;
  Index chains = 2;

  std::string data_path() const;
  std::string truth_path() const;
  model::VarxDims sim_dims() const;
  model::Hyperparams hyperparams() const;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses the flat config format. Throws ConfigError on malformed lines or
/// duplicate keys.
KeyValues parse_config_text(const std::string& text);
KeyValues read_config_file(const std::string& path);

/// Copies every VARX_<KEY> variable onto the matching lower-case key.
/// `getenv` is injectable for tests.
void apply_env_overrides(KeyValues& kv,
                         const std::function<std::optional<std::string>(const std::string&)>& getenv);
std::optional<std::string> process_env(const std::string& name);

/// Builds and validates a config. Unknown keys are rejected.
ExperimentConfig make_config(const KeyValues& kv);

/// Keys accepted by make_config, in documentation order.
const std::vector<std::string>& config_keys();

}  // namespace varx::cli
