#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "smoothreg/corpus.hpp"

namespace smoothreg {

// What a ConditionalLM answers for a history it does not store.
enum class Backstop {
  kUndefined,   // MLE: 0/0, reported as UndefinedHistoryError
  kUniform,     // uniform over the extended alphabet
  kLowerOrder,  // defer to an order n-1 model on the history suffix
};

// Table of next-outcome distributions keyed by length n-1 histories.
class ConditionalLM {
 public:
  ConditionalLM(int order, std::shared_ptr<const Vocabulary> vocab);

  int order() const { return order_; }
  const Vocabulary& vocab() const { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& vocab_ptr() const { return vocab_; }
  std::size_t outcome_count() const { return vocab_->outcome_count(); }

  // Stores a distribution. The history must have length n-1 with BOS only as
  // a leading run; the vector must have one entry per outcome.
  void set(const History& history, std::vector<double> probs);
  const std::map<History, std::vector<double>>& table() const { return table_; }

  void set_backstop_undefined();
  void set_backstop_uniform();
  void set_backstop_lower(std::shared_ptr<const ConditionalLM> lower);
  Backstop backstop() const { return backstop_; }
  const ConditionalLM* lower_order() const { return lower_.get(); }

  bool stores(const History& history) const { return table_.count(history) > 0; }
  bool defines(const History& history) const;
  // Throws UndefinedHistoryError when neither the table nor the backstop
  // provides a distribution.
  std::span<const double> conditional(const History& history) const;
  double prob(const History& history, std::size_t outcome) const;

  // Throws ValidationError naming the first history whose distribution is
  // negative somewhere or does not sum to one within `tolerance`. Checks the
  // whole backoff chain.
  void validate(double tolerance = 1e-9) const;

  // Free-form provenance written into exported headers.
  std::string method = "mle";
  std::string params_json = "{}";

 private:
  void check_history(const History& history) const;

  int order_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::map<History, std::vector<double>> table_;
  Backstop backstop_ = Backstop::kUndefined;
  std::shared_ptr<const ConditionalLM> lower_;
  std::vector<double> uniform_;
};

// TSV export: `# method=NAME params=JSON backstop=KIND` comment line, then
// `history<TAB>symbol<TAB>probability` rows for every stored history of the
// model and its backoff chain, probabilities with 12 significant digits,
// sorted by rendered history then symbol.
void write_conditional_lm(std::ostream& out, const ConditionalLM& lm);
std::string conditional_lm_to_string(const ConditionalLM& lm);
ConditionalLM read_conditional_lm(std::istream& in);

// "%.12g"-style rendering shared by the TSV writers.
std::string format_probability(double value);

}  // namespace smoothreg
