#include <algorithm>
#include <memory>

#include "smoothreg/errors.hpp"
#include "smoothreg/smoothers.hpp"

namespace smoothreg {

TypeCountTable build_type_counts(const CountTable& table) {
  TypeCountTable t;
  t.left_marginal.assign(table.outcome_count(), 0);
  for (const auto& [h, row] : table.rows()) {
    std::vector<std::uint8_t> ind(row.counts.size(), 0);
    std::int64_t distinct = 0;
    for (std::size_t x = 0; x < ind.size(); ++x) {
      if (row.counts[x] <= 0) continue;
      ind[x] = 1;
      ++distinct;
      ++t.left_marginal[x];
    }
    if (distinct == 0) continue;
    t.right_marginal[h] = distinct;
    t.grand_total += distinct;
    t.cont.emplace(h, std::move(ind));
  }
  return t;
}

ConditionalLM smooth_kneser_essen_ney(const CountTable& table, double discount) {
  if (!(discount > 0.0 && discount < 1.0)) {
    throw ParameterError("ken needs 0 < D < 1, got " + format_probability(discount));
  }
  if (table.order() < 2) throw ParameterError("ken needs an n-gram order of at least 2");
  const auto tables = count_hierarchy(table);

  // Unigram level from bigram continuation counts.
  const auto types = build_type_counts(tables[1]);
  if (types.grand_total == 0) throw InputError("ken needs a nonempty count table");
  auto lower = std::make_shared<ConditionalLM>(1, table.vocab_ptr());
  std::vector<double> unigram(table.outcome_count());
  for (std::size_t x = 0; x < unigram.size(); ++x) {
    unigram[x] = static_cast<double>(types.left_marginal[x]) / static_cast<double>(types.grand_total);
  }
  lower->set(History{}, std::move(unigram));
  lower->set_backstop_uniform();
  lower->method = "ken";

  for (int order = 2; order <= table.order(); ++order) {
    const auto& t = tables[static_cast<std::size_t>(order - 1)];
    auto level = std::make_shared<ConditionalLM>(order, table.vocab_ptr());
    for (const auto& [h, row] : t.rows()) {
      if (row.total <= 0) continue;
      const auto base = lower->conditional(History(h.begin() + 1, h.end()));
      std::int64_t distinct = 0;
      for (auto c : row.counts) distinct += c > 0 ? 1 : 0;
      const auto total = static_cast<double>(row.total);
      const double backoff = discount * static_cast<double>(distinct) / total;
      std::vector<double> p(row.counts.size());
      for (std::size_t x = 0; x < p.size(); ++x) {
        const double kept = std::max(static_cast<double>(row.counts[x]) - discount, 0.0);
        p[x] = kept / total + backoff * base[x];
      }
      level->set(h, std::move(p));
    }
    level->set_backstop_lower(lower);
    level->method = "ken";
    lower = level;
  }
  nlohmann::json params{{"D", discount}};
  lower->params_json = params.dump();
  return *lower;
}

}  // namespace smoothreg
