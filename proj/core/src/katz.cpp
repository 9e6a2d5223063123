#include <memory>

#include "smoothreg/divergence.hpp"
#include "smoothreg/errors.hpp"
#include "smoothreg/smoothers.hpp"

namespace smoothreg {

namespace {

std::int64_t r_at(const std::map<std::int64_t, std::int64_t>& r, std::int64_t i) {
  auto it = r.find(i);
  return it == r.end() ? 0 : it->second;
}

}  // namespace

KatzDiscounts katz_discounts(const std::map<std::int64_t, std::int64_t>& r, int k, Warnings* warnings) {
  if (k < 1) throw ParameterError("katz needs k >= 1, got " + std::to_string(k));
  KatzDiscounts out;
  const auto r1 = static_cast<double>(r_at(r, 1));
  if (r1 == 0.0) {
    out.well_defined = false;
    return out;
  }
  const double a = static_cast<double>(k + 1) * static_cast<double>(r_at(r, k + 1)) / r1;
  const double denom = 1.0 - a;
  if (!(denom > 0.0)) {
    out.well_defined = false;
    return out;
  }
  for (std::int64_t c = 1; c <= k; ++c) {
    const auto rc = r_at(r, c);
    if (rc == 0) continue;
    const double cstar = static_cast<double>(c + 1) * static_cast<double>(r_at(r, c + 1)) / static_cast<double>(rc);
    double d = (cstar / static_cast<double>(c) - a) / denom;
    if (d < 0.0 || d > 1.0) {
      const double clamped = d < 0.0 ? 0.0 : 1.0;
      if (warnings) {
        warnings->push_back("katz: discount for count " + std::to_string(c) + " is " + format_probability(d) +
                            "; clamped to " + format_probability(clamped));
      }
      d = clamped;
    }
    out.discount[c] = d;
  }
  return out;
}

ConditionalLM smooth_katz(const CountTable& table, int k, Warnings* warnings) {
  if (k < 1) throw ParameterError("katz needs k >= 1, got " + std::to_string(k));
  const auto tables = count_hierarchy(table);
  const auto uniform = uniform_distribution(table.outcome_count());
  std::shared_ptr<ConditionalLM> lower;
  for (int order = 1; order <= table.order(); ++order) {
    const auto& t = tables[static_cast<std::size_t>(order - 1)];
    auto disc = katz_discounts(counts_of_counts(t), k, warnings);
    if (!disc.well_defined) {
      if (order == table.order()) {
        throw ConfigurationError("katz discounts are undefined for k=" + std::to_string(k) +
                                 ": need r_1 > 0 and 1 - (k+1) r_{k+1} / r_1 > 0");
      }
      if (warnings) {
        warnings->push_back("katz: discounts undefined at order " + std::to_string(order) + " for k=" +
                            std::to_string(k) + "; using undiscounted counts there");
      }
    }
    auto level = std::make_shared<ConditionalLM>(order, table.vocab_ptr());
    for (const auto& [h, row] : t.rows()) {
      if (row.total <= 0) continue;
      std::span<const double> base = uniform;
      if (lower) base = lower->conditional(History(h.begin() + 1, h.end()));
      const auto total = static_cast<double>(row.total);
      std::vector<double> p(row.counts.size(), 0.0);
      double seen_mass = 0.0;
      double base_seen = 0.0;
      for (std::size_t x = 0; x < p.size(); ++x) {
        const std::int64_t c = row.counts[x];
        if (c == 0) continue;
        double d = 1.0;
        if (disc.well_defined && c <= k) d = disc.discount.at(c);
        p[x] = d * static_cast<double>(c) / total;
        seen_mass += p[x];
        base_seen += base[x];
      }
      const double base_unseen = 1.0 - base_seen;
      if (base_unseen > 0.0) {
        const double alpha = (1.0 - seen_mass) / base_unseen;
        for (std::size_t x = 0; x < p.size(); ++x) {
          if (row.counts[x] == 0) p[x] = alpha * base[x];
        }
      }
      double s = 0.0;
      for (double v : p) s += v;
      if (!(s > 0.0)) {
        if (warnings) {
          warnings->push_back("katz: history '" + table.vocab().render_history(h) +
                              "' has no mass after discounting; using its backoff distribution");
        }
        p.assign(base.begin(), base.end());
        s = 1.0;
      }
      for (double& v : p) v /= s;
      level->set(h, std::move(p));
    }
    if (lower) {
      level->set_backstop_lower(lower);
    } else {
      level->set_backstop_uniform();
    }
    level->method = "katz";
    lower = level;
  }
  nlohmann::json params{{"k", k}};
  lower->params_json = params.dump();
  return *lower;
}

}  // namespace smoothreg
