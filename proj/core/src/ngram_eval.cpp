#include "smoothreg/ngram_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smoothreg/errors.hpp"

namespace smoothreg {

History history_of(std::span<const SymbolId> prefix, int order, SymbolId bos) {
  const auto width = static_cast<std::size_t>(order - 1);
  History h(width, bos);
  const std::size_t take = std::min(width, prefix.size());
  std::copy(prefix.end() - static_cast<std::ptrdiff_t>(take), prefix.end(),
            h.end() - static_cast<std::ptrdiff_t>(take));
  return h;
}

ConditionalLM empirical_conditional(const CountTable& table) {
  ConditionalLM lm(table.order(), table.vocab_ptr());
  for (const auto& [h, row] : table.rows()) {
    if (row.total <= 0) continue;
    std::vector<double> p(row.counts.size());
    const auto total = static_cast<double>(row.total);
    for (std::size_t x = 0; x < p.size(); ++x) p[x] = static_cast<double>(row.counts[x]) / total;
    lm.set(h, std::move(p));
  }
  lm.set_backstop_undefined();
  lm.method = "mle";
  return lm;
}

std::int64_t PrefixProbability::count(const Sequence& prefix) const {
  auto it = numerator.find(prefix);
  return it == numerator.end() ? 0 : it->second;
}

double PrefixProbability::operator()(const Sequence& prefix) const {
  return total == 0 ? 0.0 : static_cast<double>(count(prefix)) / static_cast<double>(total);
}

PrefixProbability empirical_prefix(const Corpus& corpus) {
  PrefixProbability pi;
  pi.total = static_cast<std::int64_t>(corpus.size());
  for (const auto& seq : corpus.sequences) {
    Sequence prefix;
    ++pi.numerator[prefix];
    for (SymbolId s : seq) {
      prefix.push_back(s);
      ++pi.numerator[prefix];
    }
  }
  return pi;
}

double string_logprob(const ConditionalLM& lm, std::span<const SymbolId> sequence) {
  const auto& vocab = lm.vocab();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double logp = 0.0;
  for (std::size_t t = 0; t <= sequence.size(); ++t) {
    const History h = history_of(sequence.first(t), lm.order(), vocab.bos_id());
    if (!lm.defines(h)) return kNegInf;
    const std::size_t outcome = t < sequence.size() ? vocab.outcome_of(sequence[t]) : vocab.eos_outcome();
    const double p = lm.prob(h, outcome);
    if (p <= 0.0) return kNegInf;
    logp += std::log(p);
  }
  return logp;
}

double perplexity(const ConditionalLM& lm, const Corpus& corpus) {
  double total = 0.0;
  for (const auto& seq : corpus.sequences) {
    const double lp = string_logprob(lm, seq);
    if (std::isinf(lp)) return std::numeric_limits<double>::infinity();
    total += lp;
  }
  return std::exp(-total / static_cast<double>(corpus.emission_count()));
}

PrefixModel as_prefix_model(const ConditionalLM& lm) {
  return [&lm](std::span<const SymbolId> prefix) {
    auto dist = lm.conditional(history_of(prefix, lm.order(), lm.vocab().bos_id()));
    return std::vector<double>(dist.begin(), dist.end());
  };
}

namespace {

void enumerate(const PrefixModel& model, std::size_t alphabet_size, std::size_t max_len,
               Sequence& prefix, double mass, StringDistribution& out) {
  const auto dist = model(prefix);
  if (dist.size() != alphabet_size + 1) throw ShapeError("prefix model returned wrong length");
  const double p_end = mass * dist[alphabet_size];
  if (p_end > 0.0) out.probability[prefix] = p_end;
  if (prefix.size() == max_len) {
    out.tail_mass += mass * (1.0 - dist[alphabet_size]);
    return;
  }
  for (std::size_t x = 0; x < alphabet_size; ++x) {
    const double next = mass * dist[x];
    if (next <= 0.0) continue;
    prefix.push_back(static_cast<SymbolId>(x));
    enumerate(model, alphabet_size, max_len, prefix, next, out);
    prefix.pop_back();
  }
}

}  // namespace

StringDistribution lm_string_distribution(const PrefixModel& model, std::size_t alphabet_size,
                                          std::size_t max_len, std::size_t max_nodes) {
  double nodes = 0.0;
  double level = 1.0;
  for (std::size_t l = 0; l <= max_len; ++l) {
    nodes += level;
    level *= static_cast<double>(alphabet_size);
  }
  if (nodes > static_cast<double>(max_nodes)) {
    throw SizeError("enumerating strings up to length " + std::to_string(max_len) + " over " +
                    std::to_string(alphabet_size) + " symbols exceeds the cap of " +
                    std::to_string(max_nodes) + " prefixes");
  }
  StringDistribution out;
  Sequence prefix;
  enumerate(model, alphabet_size, max_len, prefix, 1.0, out);
  return out;
}

StringDistribution lm_string_distribution(const ConditionalLM& lm, std::size_t max_len,
                                          std::size_t max_nodes) {
  return lm_string_distribution(as_prefix_model(lm), lm.vocab().size(), max_len, max_nodes);
}

}  // namespace smoothreg
