#include <cmath>
#include <vector>

#include "smoothreg/errors.hpp"
#include "smoothreg/smoothers.hpp"

namespace smoothreg {

namespace {

std::int64_t r_at(const std::map<std::int64_t, std::int64_t>& r, std::int64_t i) {
  auto it = r.find(i);
  return it == r.end() ? 0 : it->second;
}

void warn(Warnings* warnings, std::string message) {
  if (warnings) warnings->push_back(std::move(message));
}

std::int64_t zero_gram_count(const CountTable& table) {
  const auto possible =
      static_cast<std::int64_t>(table.rows().size()) * static_cast<std::int64_t>(table.outcome_count());
  return possible - static_cast<std::int64_t>(table.distinct_grams());
}

// Per-history conditional from adjusted counts; a history whose adjusted
// counts are all zero keeps its MLE conditional.
ConditionalLM renormalize_adjusted(const CountTable& table, const std::map<std::int64_t, double>& adjusted,
                                   double zero_adjusted, const char* label, Warnings* warnings) {
  ConditionalLM lm(table.order(), table.vocab_ptr());
  for (const auto& [h, row] : table.rows()) {
    std::vector<double> p(row.counts.size());
    double s = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
      const std::int64_t c = row.counts[x];
      p[x] = c == 0 ? zero_adjusted : adjusted.at(c);
      s += p[x];
    }
    if (!(s > 0.0)) {
      warn(warnings, std::string(label) + ": all adjusted counts are zero for history '" +
                         table.vocab().render_history(h) + "'; using its MLE conditional");
      s = static_cast<double>(row.total);
      for (std::size_t x = 0; x < p.size(); ++x) p[x] = static_cast<double>(row.counts[x]);
    }
    for (double& v : p) v /= s;
    lm.set(h, std::move(p));
  }
  lm.set_backstop_uniform();
  return lm;
}

}  // namespace

double GoodTuringCounts::adjusted_count(std::int64_t c) const {
  if (c == 0) return zero_adjusted;
  auto it = adjusted.find(c);
  if (it == adjusted.end()) {
    throw InternalError("no grams with count " + std::to_string(c) + " in the count-of-counts table");
  }
  return it->second;
}

GoodTuringCounts good_turing_counts(const CountTable& table) {
  if (table.rows().empty()) throw InputError("good-turing needs a nonempty count table");
  const auto r = counts_of_counts(table);
  GoodTuringCounts gt;
  for (const auto& [c, rc] : r) {
    if (rc == 0) throw InternalError("zero count-of-counts for an observed count");
    gt.adjusted[c] = static_cast<double>(c + 1) * static_cast<double>(r_at(r, c + 1)) / static_cast<double>(rc);
  }
  gt.zero_grams = zero_gram_count(table);
  if (gt.zero_grams > 0) gt.zero_adjusted = static_cast<double>(r_at(r, 1)) / static_cast<double>(gt.zero_grams);
  gt.total_tokens = table.total_tokens();
  return gt;
}

double good_turing_global_probability(const GoodTuringCounts& gt, std::int64_t count) {
  return gt.adjusted_count(count) / static_cast<double>(gt.total_tokens);
}

ConditionalLM smooth_good_turing(const CountTable& table, Warnings* warnings) {
  const auto gt = good_turing_counts(table);
  ConditionalLM lm = renormalize_adjusted(table, gt.adjusted, gt.zero_adjusted, "gt", warnings);
  lm.method = "gt";
  return lm;
}

double SimpleGoodTuringFit::smoothed_r(double i) const {
  return std::exp(intercept + slope * std::log(i));
}

SimpleGoodTuringFit fit_simple_good_turing(const std::map<std::int64_t, std::int64_t>& r,
                                           Warnings* warnings) {
  if (r.size() < 2) throw ParameterError("simple good-turing needs at least two distinct counts");
  std::vector<std::int64_t> counts;
  for (const auto& [c, rc] : r) counts.push_back(c);

  // Averaging transform: Z_i = r_i / (0.5 (next - prev)).
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double i = static_cast<double>(counts[j]);
    const double prev = j == 0 ? 0.0 : static_cast<double>(counts[j - 1]);
    const double next = j + 1 < counts.size() ? static_cast<double>(counts[j + 1]) : 2.0 * i - prev;
    const double z = static_cast<double>(r.at(counts[j])) / (0.5 * (next - prev));
    xs.push_back(std::log(i));
    ys.push_back(std::log(z));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    mx += xs[j];
    my += ys[j];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    sxy += (xs[j] - mx) * (ys[j] - my);
    sxx += (xs[j] - mx) * (xs[j] - mx);
  }
  SimpleGoodTuringFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (fit.slope > -1.0) {
    warn(warnings, "sgt: regression slope " + format_probability(fit.slope) + " is above -1");
  }

  bool switched = false;
  for (std::int64_t c : counts) {
    const double i = static_cast<double>(c);
    const double lgt = (i + 1.0) * fit.smoothed_r(i + 1.0) / fit.smoothed_r(i);
    const auto r_next = r_at(r, c + 1);
    if (!switched) {
      if (r_next == 0) {
        switched = true;
      } else {
        const double ri = static_cast<double>(r.at(c));
        const double rn = static_cast<double>(r_next);
        const double turing = (i + 1.0) * rn / ri;
        const double sigma = std::sqrt((i + 1.0) * (i + 1.0) * (rn / (ri * ri)) * (1.0 + rn / ri));
        if (std::abs(turing - lgt) <= 1.65 * sigma) {
          switched = true;
        } else {
          fit.adjusted[c] = turing;
          fit.used_turing[c] = true;
          continue;
        }
      }
      fit.switch_count = c;
    }
    fit.adjusted[c] = lgt;
    fit.used_turing[c] = false;
  }
  return fit;
}

ConditionalLM smooth_simple_good_turing(const CountTable& table, Warnings* warnings) {
  if (table.rows().empty()) throw InputError("simple good-turing needs a nonempty count table");
  const auto r = counts_of_counts(table);
  if (r.size() < 2) {
    warn(warnings, "sgt: fewer than two distinct counts; falling back to add-lambda with lambda=1e-3");
    ConditionalLM lm = smooth_add_lambda(table, 1e-3);
    lm.method = "sgt";
    lm.params_json = "{}";
    return lm;
  }
  const auto fit = fit_simple_good_turing(r, warnings);
  const auto n = static_cast<double>(table.total_tokens());
  const auto r1 = static_cast<double>(r_at(r, 1));
  double seen = 0.0;
  for (const auto& [c, rc] : r) seen += static_cast<double>(rc) * fit.adjusted.at(c);
  std::map<std::int64_t, double> adjusted;
  for (const auto& [c, rstar] : fit.adjusted) adjusted[c] = rstar * (n - r1) / seen;
  const auto zero = zero_gram_count(table);
  const double zero_adjusted = zero > 0 ? r1 / static_cast<double>(zero) : 0.0;
  ConditionalLM lm = renormalize_adjusted(table, adjusted, zero_adjusted, "sgt", warnings);
  lm.method = "sgt";
  return lm;
}

}  // namespace smoothreg
