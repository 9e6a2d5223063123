#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace smoothreg::cli {

// Every setting a command can take. Loaded from a JSON file (--config) and
// then overridden by explicit flags.
struct RunConfig {
  std::string corpus_path;
  std::string heldout_path;
  std::string counts_path;
  std::string lm_path;
  std::string model_path;
  std::string out_dir;

  int order = 2;
  std::string method = "addlambda";
  std::string method_params;  // JSON object text
  std::string objective = "mle";
  std::string architecture = "feedforward";
  std::string sign = "signed";

  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
  double gamma_ls = 0.0;
  double lr = 0.0;  // 0 picks the architecture default
  int epochs = 200;
  int patience = 20;
  std::uint64_t seed = 0;
  int embed_dim = 16;
  int hidden_dim = 32;
  double init_scale = 0.1;
  int workers = 1;

  // grid
  std::vector<double> gamma_plus_list;
  std::vector<double> gamma_minus_list;
  std::vector<std::string> method_params_list;
  std::vector<std::uint64_t> seeds;
  int cap = 100;
  bool baseline = false;

  double effective_lr() const;
};

// Throws InputError for unknown keys, wrong types and paths that do not exist.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_to_json(const RunConfig& config);

}  // namespace smoothreg::cli
