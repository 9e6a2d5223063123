#include "run_config.hpp"

#include <filesystem>
#include <fstream>

#include "smoothreg/errors.hpp"

namespace smoothreg::cli {

double RunConfig::effective_lr() const {
  if (lr > 0.0) return lr;
  return architecture == "tabular" ? 0.5 : 0.05;
}

namespace {

template <typename T>
void take(const nlohmann::json& doc, const char* key, T& field) {
  if (!doc.contains(key)) return;
  try {
    field = doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("config key '") + key + "' has the wrong type");
  }
}

void take_json_text(const nlohmann::json& doc, const char* key, std::string& field) {
  if (!doc.contains(key)) return;
  const auto& v = doc.at(key);
  field = v.is_string() ? v.get<std::string>() : v.dump();
}

void require_path(const std::string& path, const char* key) {
  if (!path.empty() && !std::filesystem::exists(path)) {
    throw InputError(std::string("config ") + key + " does not exist: " + path);
  }
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("config must be a JSON object");
  static const char* const kKeys[] = {
      "corpus_path", "heldout_path", "counts_path", "lm_path", "model_path", "out_dir", "order", "method",
      "method_params", "objective", "architecture", "sign", "gamma_plus", "gamma_minus", "gamma_ls", "lr",
      "epochs", "patience", "seed", "embed_dim", "hidden_dim", "init_scale", "workers", "gamma_plus_list",
      "gamma_minus_list", "method_params_list", "seeds", "cap", "baseline"};
  for (const auto& item : doc.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || item.key() == k;
    if (!known) throw InputError("unknown config key '" + item.key() + "'");
  }
  RunConfig c;
  take(doc, "corpus_path", c.corpus_path);
  take(doc, "heldout_path", c.heldout_path);
  take(doc, "counts_path", c.counts_path);
  take(doc, "lm_path", c.lm_path);
  take(doc, "model_path", c.model_path);
  take(doc, "out_dir", c.out_dir);
  take(doc, "order", c.order);
  take(doc, "method", c.method);
  take_json_text(doc, "method_params", c.method_params);
  take(doc, "objective", c.objective);
  take(doc, "architecture", c.architecture);
  take(doc, "sign", c.sign);
  take(doc, "gamma_plus", c.gamma_plus);
  take(doc, "gamma_minus", c.gamma_minus);
  take(doc, "gamma_ls", c.gamma_ls);
  take(doc, "lr", c.lr);
  take(doc, "epochs", c.epochs);
  take(doc, "patience", c.patience);
  take(doc, "seed", c.seed);
  take(doc, "embed_dim", c.embed_dim);
  take(doc, "hidden_dim", c.hidden_dim);
  take(doc, "init_scale", c.init_scale);
  take(doc, "workers", c.workers);
  take(doc, "gamma_plus_list", c.gamma_plus_list);
  take(doc, "gamma_minus_list", c.gamma_minus_list);
  if (doc.contains("method_params_list")) {
    const auto& list = doc.at("method_params_list");
    if (!list.is_array()) throw InputError("config key 'method_params_list' must be an array");
    c.method_params_list.clear();
    for (const auto& p : list) c.method_params_list.push_back(p.is_string() ? p.get<std::string>() : p.dump());
  }
  take(doc, "seeds", c.seeds);
  take(doc, "cap", c.cap);
  take(doc, "baseline", c.baseline);
  require_path(c.corpus_path, "corpus_path");
  require_path(c.heldout_path, "heldout_path");
  require_path(c.counts_path, "counts_path");
  require_path(c.lm_path, "lm_path");
  require_path(c.model_path, "model_path");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse config file " + path + ": " + e.what());
  }
  return run_config_from_json(doc);
}

nlohmann::json run_config_to_json(const RunConfig& c) {
  nlohmann::json doc;
  doc["corpus_path"] = c.corpus_path;
  doc["heldout_path"] = c.heldout_path;
  doc["order"] = c.order;
  doc["method"] = c.method;
  doc["method_params"] = c.method_params.empty() ? nlohmann::json::object() : nlohmann::json::parse(c.method_params);
  doc["objective"] = c.objective;
  doc["architecture"] = c.architecture;
  doc["sign"] = c.sign;
  doc["gamma_plus"] = c.gamma_plus;
  doc["gamma_minus"] = c.gamma_minus;
  doc["gamma_ls"] = c.gamma_ls;
  doc["lr"] = c.effective_lr();
  doc["epochs"] = c.epochs;
  doc["patience"] = c.patience;
  doc["seed"] = c.seed;
  doc["embed_dim"] = c.embed_dim;
  doc["hidden_dim"] = c.hidden_dim;
  doc["init_scale"] = c.init_scale;
  return doc;
}

}  // namespace smoothreg::cli
