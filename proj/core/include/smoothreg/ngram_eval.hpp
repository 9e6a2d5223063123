#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "smoothreg/conditional_lm.hpp"
#include "smoothreg/corpus.hpp"
#include "smoothreg/count_table.hpp"

namespace smoothreg {

// The last n-1 symbols of `prefix`, left-padded with BOS.
History history_of(std::span<const SymbolId> prefix, int order, SymbolId bos);

// p(x|h) = #(h x) / #(h) for every observed history; unseen histories are
// undefined.
ConditionalLM empirical_conditional(const CountTable& table);

// Number of sequences starting with each prefix (including the empty one).
struct PrefixProbability {
  std::map<Sequence, std::int64_t> numerator;
  std::int64_t total = 0;  // M

  double operator()(const Sequence& prefix) const;
  std::int64_t count(const Sequence& prefix) const;
};

PrefixProbability empirical_prefix(const Corpus& corpus);

// Natural-log probability including the final EOS. Returns -inf when a factor
// is zero or its history is undefined.
double string_logprob(const ConditionalLM& lm, std::span<const SymbolId> sequence);

// exp(-sum log p / (tokens + EOS events)); +inf if any sequence has
// probability zero. Sequences are summed in index order.
double perplexity(const ConditionalLM& lm, const Corpus& corpus);

// Next-outcome distribution given the full prefix.
using PrefixModel = std::function<std::vector<double>(std::span<const SymbolId> prefix)>;

PrefixModel as_prefix_model(const ConditionalLM& lm);

struct StringDistribution {
  std::map<Sequence, double> probability;  // strings of length <= L, zero-probability ones omitted
  double tail_mass = 0.0;                  // mass of strings longer than L
};

// Exhaustive enumeration of every string up to `max_len`. Throws SizeError
// when more than `max_nodes` prefixes would be visited.
StringDistribution lm_string_distribution(const PrefixModel& model, std::size_t alphabet_size,
                                          std::size_t max_len, std::size_t max_nodes = 5'000'000);
StringDistribution lm_string_distribution(const ConditionalLM& lm, std::size_t max_len,
                                          std::size_t max_nodes = 5'000'000);

}  // namespace smoothreg
