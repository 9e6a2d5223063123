#include "smoothreg/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <tuple>

#include "smoothreg/divergence.hpp"
#include "smoothreg/errors.hpp"

namespace smoothreg {

namespace {

void check_distribution(std::span<const double> v, const char* what, double tolerance) {
  double s = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ValidationError(std::string(what) + " distribution has a negative or non-finite entry");
    }
    s += x;
  }
  if (std::abs(s - 1.0) > tolerance) {
    throw ValidationError(std::string(what) + " distribution sums to " + format_probability(s));
  }
}

}  // namespace

std::vector<double> SignedDecomposition::reconstruct(std::span<const double> empirical) const {
  std::vector<double> out(empirical.begin(), empirical.end());
  for (std::size_t x = 0; x < out.size(); ++x) out[x] += z_plus * p_plus[x] - z_minus * p_minus[x];
  return out;
}

SignedDecomposition signed_decompose(std::span<const double> empirical, std::span<const double> smoothed,
                                     double tolerance) {
  if (empirical.size() != smoothed.size()) {
    throw ShapeError("cannot decompose distributions of lengths " + std::to_string(empirical.size()) +
                     " and " + std::to_string(smoothed.size()));
  }
  check_distribution(empirical, "empirical", tolerance);
  check_distribution(smoothed, "smoothed", tolerance);
  const std::size_t k = empirical.size();
  SignedDecomposition d;
  d.p_plus.assign(k, 0.0);
  d.p_minus.assign(k, 0.0);
  for (std::size_t x = 0; x < k; ++x) {
    if (empirical[x] > 0.0 || smoothed[x] > 0.0) d.support.push_back(x);
    const double diff = smoothed[x] - empirical[x];
    if (diff > 0.0) {
      d.p_plus[x] = diff;
      d.z_plus += diff;
    } else if (diff < 0.0) {
      d.p_minus[x] = -diff;
      d.z_minus += -diff;
    }
  }
  // The two masses agree up to rounding of the input sums; use their mean so
  // Z+ == Z- holds exactly.
  const double z = 0.5 * (d.z_plus + d.z_minus);
  if (z > 0.0) {
    for (std::size_t x = 0; x < k; ++x) {
      if (d.p_plus[x] > 0.0) d.p_plus[x] /= d.z_plus;
      if (d.p_minus[x] > 0.0) d.p_minus[x] /= d.z_minus;
    }
  }
  d.z_plus = z;
  d.z_minus = z;
  return d;
}

std::string sign_name(RegularizerSign sign) {
  return sign == RegularizerSign::kSigned ? "signed" : "additive";
}

RegularizerSign parse_sign(const std::string& name) {
  if (name == "signed") return RegularizerSign::kSigned;
  if (name == "additive") return RegularizerSign::kAdditive;
  throw ParameterError("unknown regularizer sign '" + name + "' (expected signed or additive)");
}

double RegularizerBundle::total_weight() const {
  double w = 0.0;
  for (const auto& [h, term] : per_history) w += term.weight;
  return w;
}

double RegularizerBundle::minus_coefficient() const {
  return sign == RegularizerSign::kSigned ? -gamma_minus : gamma_minus;
}

RegularizerBundle build_regularizer(const ConditionalLM& empirical, const ConditionalLM& smoothed,
                                    const CountTable& table, double gamma_plus, double gamma_minus,
                                    RegularizerSign sign) {
  if (empirical.order() != smoothed.order() || empirical.order() != table.order()) {
    throw ShapeError("empirical LM, smoothed LM and count table must share one order");
  }
  if (empirical.outcome_count() != smoothed.outcome_count() ||
      empirical.outcome_count() != table.outcome_count()) {
    throw ShapeError("empirical LM, smoothed LM and count table must share one alphabet");
  }
  if (!(gamma_plus >= 0.0) || !(gamma_minus >= 0.0) || !std::isfinite(gamma_plus) || !std::isfinite(gamma_minus)) {
    throw ParameterError("regularizer weights must be finite and nonnegative");
  }
  if (sign == RegularizerSign::kSigned && gamma_minus > 1.0) {
    throw ParameterError("signed regularizer needs gamma_minus <= 1, got " + format_probability(gamma_minus));
  }
  std::vector<std::string> missing;
  for (const auto& [h, row] : table.rows()) {
    if (row.total > 0 && !smoothed.stores(h)) missing.push_back("'" + table.vocab().render_history(h) + "'");
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 20) list += ", ...";
    throw CoverageError(std::to_string(missing.size()) + " histories missing from the smoothed LM: " + list);
  }
  RegularizerBundle bundle;
  bundle.gamma_plus = gamma_plus;
  bundle.gamma_minus = gamma_minus;
  bundle.sign = sign;
  for (const auto& [h, row] : table.rows()) {
    if (row.total <= 0) continue;
    RegularizerTerm term;
    term.decomposition = signed_decompose(empirical.conditional(h), smoothed.conditional(h));
    term.weight = static_cast<double>(row.total);
    bundle.per_history.emplace(h, std::move(term));
  }
  return bundle;
}

RegularizerLoss regularizer_loss(const RegularizerBundle& bundle, const HistoryModel& q) {
  RegularizerLoss out;
  const double total = bundle.total_weight();
  if (total <= 0.0) return out;
  const double minus = bundle.minus_coefficient();
  for (const auto& [h, term] : bundle.per_history) {
    const auto& d = term.decomposition;
    if (d.z_plus == 0.0 && d.z_minus == 0.0) continue;
    if (bundle.gamma_plus == 0.0 && bundle.gamma_minus == 0.0) continue;
    const auto qh = q(h);
    double value = 0.0;
    if (bundle.gamma_plus != 0.0 && d.z_plus > 0.0) value += bundle.gamma_plus * d.z_plus * kl_divergence(d.p_plus, qh);
    if (minus != 0.0 && d.z_minus > 0.0) value += minus * d.z_minus * kl_divergence(d.p_minus, qh);
    if (!std::isfinite(value)) {
      out.infinite = true;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    out.value += term.weight / total * value;
  }
  return out;
}

RegularizerLoss regularizer_loss(const RegularizerBundle& bundle, const ConditionalLM& q) {
  return regularizer_loss(bundle, [&q](const History& h) {
    auto dist = q.conditional(h);
    return std::vector<double>(dist.begin(), dist.end());
  });
}

void write_decomposition(std::ostream& out, const RegularizerBundle& bundle, const Vocabulary& vocab) {
  std::vector<std::tuple<std::string, std::string, const SignedDecomposition*, std::size_t>> rows;
  for (const auto& [h, term] : bundle.per_history) {
    const auto rendered = vocab.render_history(h);
    for (std::size_t x = 0; x < term.decomposition.p_plus.size(); ++x) {
      rows.emplace_back(rendered, vocab.render_outcome(x), &term.decomposition, x);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  out << "history\tsymbol\tp_plus\tp_minus\tz_plus\tz_minus\n";
  for (const auto& [h, sym, d, x] : rows) {
    out << h << '\t' << sym << '\t' << format_probability(d->p_plus[x]) << '\t' << format_probability(d->p_minus[x])
        << '\t' << format_probability(d->z_plus) << '\t' << format_probability(d->z_minus) << '\n';
  }
}

std::string decomposition_to_string(const RegularizerBundle& bundle, const Vocabulary& vocab) {
  std::ostringstream os;
  write_decomposition(os, bundle, vocab);
  return os.str();
}

}  // namespace smoothreg
