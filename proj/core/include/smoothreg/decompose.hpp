#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "smoothreg/conditional_lm.hpp"
#include "smoothreg/count_table.hpp"

namespace smoothreg {

// smoothed = empirical + z_plus * p_plus - z_minus * p_minus, where p_plus
// carries the mass the smoother adds and p_minus the mass it removes.
struct SignedDecomposition {
  std::vector<std::size_t> support;  // outcomes where either input is positive
  std::vector<double> p_plus;
  std::vector<double> p_minus;
  double z_plus = 0.0;
  double z_minus = 0.0;

  std::vector<double> reconstruct(std::span<const double> empirical) const;
};

// Inputs must have equal length (ShapeError) and be nonnegative and sum to one
// within `tolerance` (ValidationError).
SignedDecomposition signed_decompose(std::span<const double> empirical, std::span<const double> smoothed,
                                     double tolerance = 1e-9);

// How the p_minus term enters the objective.
//   kSigned:   gamma+ Z+ KL(p+||q) - gamma- Z- KL(p-||q). With gamma+ = gamma- = 1
//              the objective equals KL(smoothed||q) up to a constant.
//   kAdditive: gamma+ Z+ KL(p+||q) + gamma- Z- KL(p-||q).
enum class RegularizerSign { kSigned, kAdditive };

std::string sign_name(RegularizerSign sign);
RegularizerSign parse_sign(const std::string& name);

struct RegularizerTerm {
  SignedDecomposition decomposition;
  double weight = 0.0;  // #(h)
};

struct RegularizerBundle {
  std::map<History, RegularizerTerm> per_history;
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
  RegularizerSign sign = RegularizerSign::kSigned;

  double total_weight() const;
  // Coefficient applied to the p_minus term: -gamma- or +gamma-.
  double minus_coefficient() const;
};

// One decomposition per history of `table`. Throws CoverageError listing the
// histories `smoothed` does not store. With kSigned, gamma_minus must lie in
// [0,1] so the implied per-history targets stay nonnegative.
RegularizerBundle build_regularizer(const ConditionalLM& empirical, const ConditionalLM& smoothed,
                                    const CountTable& table, double gamma_plus, double gamma_minus,
                                    RegularizerSign sign = RegularizerSign::kSigned);

using HistoryModel = std::function<std::vector<double>(const History&)>;

struct RegularizerLoss {
  double value = 0.0;
  bool infinite = false;  // q vanishes where p_plus or p_minus is positive
};

// sum_h #(h) / sum #(h) * [gamma+ Z+ KL(p+||q) -/+ gamma- Z- KL(p-||q)],
// accumulated in history order.
RegularizerLoss regularizer_loss(const RegularizerBundle& bundle, const HistoryModel& q);
RegularizerLoss regularizer_loss(const RegularizerBundle& bundle, const ConditionalLM& q);

// TSV `history<TAB>symbol<TAB>p_plus<TAB>p_minus<TAB>z_plus<TAB>z_minus`, one
// row per history and outcome, sorted by rendered history then symbol.
void write_decomposition(std::ostream& out, const RegularizerBundle& bundle, const Vocabulary& vocab);
std::string decomposition_to_string(const RegularizerBundle& bundle, const Vocabulary& vocab);

}  // namespace smoothreg
