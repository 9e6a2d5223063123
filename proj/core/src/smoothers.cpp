#include "smoothreg/smoothers.hpp"

#include <cmath>
#include <memory>

#include "smoothreg/divergence.hpp"
#include "smoothreg/errors.hpp"
#include "smoothreg/ngram_eval.hpp"

namespace smoothreg {

std::string method_name(SmoothingMethod method) {
  switch (method) {
    case SmoothingMethod::kAddLambda:
      return "addlambda";
    case SmoothingMethod::kGoodTuring:
      return "gt";
    case SmoothingMethod::kSimpleGoodTuring:
      return "sgt";
    case SmoothingMethod::kJelinekMercer:
      return "jm";
    case SmoothingMethod::kKatz:
      return "katz";
    case SmoothingMethod::kKneserEssenNey:
      return "ken";
  }
  return "unknown";
}

SmoothingMethod parse_method(const std::string& name) {
  for (auto m : {SmoothingMethod::kAddLambda, SmoothingMethod::kGoodTuring,
                 SmoothingMethod::kSimpleGoodTuring, SmoothingMethod::kJelinekMercer,
                 SmoothingMethod::kKatz, SmoothingMethod::kKneserEssenNey}) {
    if (method_name(m) == name) return m;
  }
  throw ParameterError("unknown smoothing method '" + name +
                       "' (expected addlambda, gt, sgt, jm, katz or ken)");
}

namespace {

void reject_unknown_keys(const nlohmann::json& params, std::initializer_list<const char*> allowed,
                         const std::string& method) {
  for (const auto& item : params.items()) {
    bool ok = false;
    for (const char* key : allowed) ok = ok || item.key() == key;
    if (!ok) throw ParameterError("unknown parameter '" + item.key() + "' for method " + method);
  }
}

double number_param(const nlohmann::json& params, const char* key, const std::string& method) {
  if (!params.contains(key)) throw ParameterError(method + " requires parameter '" + key + "'");
  if (!params[key].is_number()) throw ParameterError(std::string("parameter '") + key + "' must be a number");
  return params[key].get<double>();
}

}  // namespace

SmootherSpec SmootherSpec::make(SmoothingMethod method, nlohmann::json params, int order) {
  if (params.is_null()) params = nlohmann::json::object();
  if (!params.is_object()) throw ParameterError("method parameters must be a JSON object");
  const std::string name = method_name(method);
  switch (method) {
    case SmoothingMethod::kAddLambda: {
      reject_unknown_keys(params, {"lambda"}, name);
      const double lambda = number_param(params, "lambda", name);
      if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ParameterError("add-lambda needs lambda > 0, got " + format_probability(lambda));
      }
      break;
    }
    case SmoothingMethod::kGoodTuring:
    case SmoothingMethod::kSimpleGoodTuring:
      reject_unknown_keys(params, {}, name);
      break;
    case SmoothingMethod::kJelinekMercer: {
      reject_unknown_keys(params, {"lambdas"}, name);
      if (!params.contains("lambdas") || !params["lambdas"].is_array()) {
        throw ParameterError("jm requires a 'lambdas' array with one weight per order");
      }
      const auto& lambdas = params["lambdas"];
      if (order > 0 && lambdas.size() != static_cast<std::size_t>(order)) {
        throw ParameterError("jm needs " + std::to_string(order) + " weights for order " +
                             std::to_string(order) + ", got " + std::to_string(lambdas.size()));
      }
      for (const auto& w : lambdas) {
        if (!w.is_number()) throw ParameterError("jm weights must be numbers");
        const double v = w.get<double>();
        if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("jm weight " + format_probability(v) + " outside [0,1]");
      }
      break;
    }
    case SmoothingMethod::kKatz: {
      reject_unknown_keys(params, {"k"}, name);
      if (!params.contains("k")) params["k"] = 5;
      if (!params["k"].is_number_integer() || params["k"].get<long long>() < 1) {
        throw ParameterError("katz needs an integer k >= 1");
      }
      break;
    }
    case SmoothingMethod::kKneserEssenNey: {
      reject_unknown_keys(params, {"D"}, name);
      if (!params.contains("D")) params["D"] = 0.75;
      const double d = number_param(params, "D", name);
      if (!(d > 0.0 && d < 1.0)) throw ParameterError("ken needs 0 < D < 1, got " + format_probability(d));
      if (order == 1) throw ParameterError("ken needs an n-gram order of at least 2");
      break;
    }
  }
  return SmootherSpec{method, std::move(params)};
}

SmootherSpec SmootherSpec::parse(const std::string& name, const std::string& params_json, int order) {
  nlohmann::json params = nlohmann::json::object();
  if (!params_json.empty()) {
    try {
      params = nlohmann::json::parse(params_json);
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError("cannot parse method parameters: " + std::string(e.what()));
    }
  }
  return make(parse_method(name), std::move(params), order);
}

ConditionalLM smooth(const CountTable& table, const SmootherSpec& spec, Warnings* warnings) {
  const SmootherSpec checked = SmootherSpec::make(spec.method, spec.params, table.order());
  const auto& p = checked.params;
  ConditionalLM lm = [&] {
    switch (checked.method) {
      case SmoothingMethod::kAddLambda:
        return smooth_add_lambda(table, p["lambda"].get<double>());
      case SmoothingMethod::kGoodTuring:
        return smooth_good_turing(table, warnings);
      case SmoothingMethod::kSimpleGoodTuring:
        return smooth_simple_good_turing(table, warnings);
      case SmoothingMethod::kJelinekMercer: {
        const auto lambdas = p["lambdas"].get<std::vector<double>>();
        return smooth_jelinek_mercer(table, lambdas);
      }
      case SmoothingMethod::kKatz:
        return smooth_katz(table, p["k"].get<int>(), warnings);
      case SmoothingMethod::kKneserEssenNey:
        return smooth_kneser_essen_ney(table, p["D"].get<double>());
    }
    throw InternalError("unhandled smoothing method");
  }();
  lm.method = checked.name();
  lm.params_json = checked.params_string();
  return lm;
}

ConditionalLM smooth_add_lambda(const CountTable& table, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("add-lambda needs lambda > 0, got " + format_probability(lambda));
  }
  ConditionalLM lm(table.order(), table.vocab_ptr());
  const auto k = static_cast<double>(table.outcome_count());
  for (const auto& [h, row] : table.rows()) {
    std::vector<double> p(row.counts.size());
    const double denom = static_cast<double>(row.total) + k * lambda;
    for (std::size_t x = 0; x < p.size(); ++x) p[x] = (static_cast<double>(row.counts[x]) + lambda) / denom;
    lm.set(h, std::move(p));
  }
  lm.set_backstop_uniform();
  lm.method = "addlambda";
  nlohmann::json params{{"lambda", lambda}};
  lm.params_json = params.dump();
  return lm;
}

ConditionalLM smooth_jelinek_mercer(const CountTable& table, std::span<const double> lambdas) {
  if (lambdas.size() != static_cast<std::size_t>(table.order())) {
    throw ParameterError("jm needs one weight per order 1.." + std::to_string(table.order()));
  }
  for (double w : lambdas) {
    if (!(w >= 0.0 && w <= 1.0)) throw ParameterError("jm weight " + format_probability(w) + " outside [0,1]");
  }
  const auto tables = count_hierarchy(table);
  const auto uniform = uniform_distribution(table.outcome_count());
  std::shared_ptr<ConditionalLM> lower;
  for (int k = 1; k <= table.order(); ++k) {
    const auto& t = tables[static_cast<std::size_t>(k - 1)];
    const double w = lambdas[static_cast<std::size_t>(k - 1)];
    auto level = std::make_shared<ConditionalLM>(k, table.vocab_ptr());
    for (const auto& [h, row] : t.rows()) {
      if (row.total <= 0) continue;
      std::span<const double> base = uniform;
      if (lower) base = lower->conditional(History(h.begin() + 1, h.end()));
      std::vector<double> p(row.counts.size());
      const auto total = static_cast<double>(row.total);
      for (std::size_t x = 0; x < p.size(); ++x) {
        p[x] = w * static_cast<double>(row.counts[x]) / total + (1.0 - w) * base[x];
      }
      level->set(h, std::move(p));
    }
    if (lower) {
      level->set_backstop_lower(lower);
    } else {
      level->set_backstop_uniform();
    }
    level->method = "jm";
    lower = level;
  }
  nlohmann::json params{{"lambdas", std::vector<double>(lambdas.begin(), lambdas.end())}};
  lower->params_json = params.dump();
  return *lower;
}

}  // namespace smoothreg
