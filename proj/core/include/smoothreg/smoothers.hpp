#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothreg/conditional_lm.hpp"
#include "smoothreg/count_table.hpp"

namespace smoothreg {

using Warnings = std::vector<std::string>;

enum class SmoothingMethod {
  kAddLambda,
  kGoodTuring,
  kSimpleGoodTuring,
  kJelinekMercer,
  kKatz,
  kKneserEssenNey,
};

// CLI spelling: addlambda | gt | sgt | jm | katz | ken.
std::string method_name(SmoothingMethod method);
SmoothingMethod parse_method(const std::string& name);

// Method plus its hyperparameters. Parameter keys: "lambda" (add-lambda),
// "lambdas" (JM, one weight per order, index 0 = unigram), "k" (Katz),
// "D" (KEN, default 0.75). GT and SGT take none.
struct SmootherSpec {
  SmoothingMethod method = SmoothingMethod::kAddLambda;
  nlohmann::json params = nlohmann::json::object();

  // Fills defaults and range-checks against `order`; throws ParameterError.
  static SmootherSpec make(SmoothingMethod method, nlohmann::json params, int order);
  static SmootherSpec parse(const std::string& name, const std::string& params_json, int order);

  std::string name() const { return method_name(method); }
  std::string params_string() const { return params.dump(); }
};

ConditionalLM smooth(const CountTable& table, const SmootherSpec& spec, Warnings* warnings = nullptr);

// (#(hx) + lambda) / (#(h) + |Sigma-bar| lambda); unseen histories are uniform.
ConditionalLM smooth_add_lambda(const CountTable& table, double lambda);

// --- Good-Turing family -----------------------------------------------------

struct GoodTuringCounts {
  // c -> c* = (c+1) r_{c+1} / r_c for every observed count c >= 1.
  std::map<std::int64_t, double> adjusted;
  // r_0: zero-count (history, outcome) pairs among observed histories.
  std::int64_t zero_grams = 0;
  // c*(0) = r_1 / r_0 (0 when r_0 == 0).
  double zero_adjusted = 0.0;
  std::int64_t total_tokens = 0;

  double adjusted_count(std::int64_t c) const;
};

GoodTuringCounts good_turing_counts(const CountTable& table);

// Global Good-Turing probability c*(#(hx)) / N before any per-history
// renormalisation.
double good_turing_global_probability(const GoodTuringCounts& gt, std::int64_t count);

// Per-history renormalised adjusted counts. Grams whose successor
// count-of-counts is zero get probability zero.
ConditionalLM smooth_good_turing(const CountTable& table, Warnings* warnings = nullptr);

struct SimpleGoodTuringFit {
  double intercept = 0.0;  // a in log Z = a + b log i
  double slope = 0.0;      // b
  // r*_i for every observed count i, Turing estimate below the switch point
  // and log-linear estimate from it on.
  std::map<std::int64_t, double> adjusted;
  std::map<std::int64_t, bool> used_turing;
  // Smallest count that uses the log-linear estimate.
  std::int64_t switch_count = 0;

  double smoothed_r(double i) const;
};

// Gale-Sampson fit to counts-of-counts. Requires two distinct counts.
SimpleGoodTuringFit fit_simple_good_turing(const std::map<std::int64_t, std::int64_t>& r,
                                           Warnings* warnings = nullptr);

// Falls back to add-lambda (1e-3) when fewer than two distinct counts exist.
ConditionalLM smooth_simple_good_turing(const CountTable& table, Warnings* warnings = nullptr);

// --- Interpolation and backoff ----------------------------------------------

// lambdas[k-1] weights the order-k MLE; recursion grounded at uniform.
ConditionalLM smooth_jelinek_mercer(const CountTable& table, std::span<const double> lambdas);

// Katz discount d_c for 0 < c <= k, clamped to [0,1].
struct KatzDiscounts {
  std::map<std::int64_t, double> discount;
  bool well_defined = true;  // false when r_1 == 0 or the denominator is <= 0
};

KatzDiscounts katz_discounts(const std::map<std::int64_t, std::int64_t>& r, int k,
                             Warnings* warnings = nullptr);

ConditionalLM smooth_katz(const CountTable& table, int k, Warnings* warnings = nullptr);

// --- Kneser-Essen-Ney ---------------------------------------------------------

struct TypeCountTable {
  std::map<History, std::vector<std::uint8_t>> cont;  // 1 iff #(hx) > 0
  std::vector<std::int64_t> left_marginal;           // per outcome: distinct histories preceding it
  std::map<History, std::int64_t> right_marginal;    // per history: distinct continuations
  std::int64_t grand_total = 0;
};

TypeCountTable build_type_counts(const CountTable& table);

// Requires order >= 2 and 0 < D < 1.
ConditionalLM smooth_kneser_essen_ney(const CountTable& table, double discount = 0.75);

}  // namespace smoothreg
