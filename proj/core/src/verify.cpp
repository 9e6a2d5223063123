#include "smoothreg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "smoothreg/decompose.hpp"
#include "smoothreg/divergence.hpp"
#include "smoothreg/errors.hpp"
#include "smoothreg/models.hpp"
#include "smoothreg/random.hpp"
#include "smoothreg/smoothers.hpp"
#include "smoothreg/synthetic.hpp"
#include "smoothreg/training.hpp"

namespace smoothreg {

std::string VerificationReport::line() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s trials=%d max_err=%.1e tol=%.1e %s seed=%llu", theorem_id.c_str(), trials,
                max_abs_error, tolerance, passed ? "PASS" : "FAIL", static_cast<unsigned long long>(seed));
  return buf;
}

VerificationReport make_report(std::string id, int trials, double max_abs_error, double tolerance,
                               std::uint64_t seed) {
  VerificationReport r;
  r.theorem_id = std::move(id);
  r.trials = trials;
  r.max_abs_error = max_abs_error;
  r.tolerance = tolerance;
  r.passed = max_abs_error <= tolerance;
  r.seed = seed;
  return r;
}

namespace {

// -log q(y) for a whole string, EOS included.
double string_neg_logprob(const PrefixModel& q, const Sequence& y, std::size_t alphabet) {
  double total = 0.0;
  for (std::size_t t = 0; t <= y.size(); ++t) {
    const auto dist = q(std::span<const SymbolId>(y).first(t));
    const std::size_t outcome = t < y.size() ? static_cast<std::size_t>(y[t]) : alphabet;
    if (!(dist[outcome] > 0.0)) throw ValidationError("q assigns zero probability to a string of p");
    total -= std::log(dist[outcome]);
  }
  return total;
}

struct StringSums {
  double kl = 0.0;
  double cross_entropy = 0.0;
};

// String-level KL(p||q) and H(p,q) with p the empirical distribution of the
// corpus, enumerated through its full-prefix MLE.
StringSums string_level(const Corpus& corpus, const PrefixModel& q, std::size_t max_len) {
  for (const auto& seq : corpus.sequences) {
    if (seq.size() > max_len) throw ParameterError("corpus has a string longer than the enumeration bound");
  }
  const auto full_prefix = empirical_conditional(count_ngrams(corpus, static_cast<int>(max_len) + 1));
  const auto p = lm_string_distribution(full_prefix, max_len);
  if (p.tail_mass >= 1e-12) throw InternalError("empirical distribution leaks mass beyond the length bound");
  const std::size_t alphabet = corpus.vocab->size();
  StringSums out;
  for (const auto& [y, py] : p.probability) {
    const double nlq = string_neg_logprob(q, y, alphabet);
    out.kl += py * (std::log(py) + nlq);
    out.cross_entropy += py * nlq;
  }
  return out;
}

double prefix_tree_kl(const Corpus& corpus, const PrefixModel& q) {
  const auto pi = empirical_prefix(corpus);
  const std::size_t alphabet = corpus.vocab->size();
  const double m = static_cast<double>(pi.total);
  double total = 0.0;
  for (const auto& [x, c] : pi.numerator) {
    std::vector<double> next(alphabet + 1, 0.0);
    std::int64_t continued = 0;
    Sequence child = x;
    child.push_back(0);
    for (std::size_t a = 0; a < alphabet; ++a) {
      child.back() = static_cast<SymbolId>(a);
      const auto ca = pi.count(child);
      next[a] = static_cast<double>(ca) / static_cast<double>(c);
      continued += ca;
    }
    next[alphabet] = static_cast<double>(c - continued) / static_cast<double>(c);
    const double kl = kl_divergence(next, q(x));
    if (!std::isfinite(kl)) throw ValidationError("q assigns zero probability to a continuation of p");
    total += static_cast<double>(c) / m * kl;
  }
  return total;
}

struct HistorySums {
  double kl = 0.0;
  double cross_entropy = 0.0;
};

HistorySums history_level(const Corpus& corpus, const ConditionalLM& q) {
  const auto table = count_ngrams(corpus, q.order());
  const double m = static_cast<double>(corpus.size());
  HistorySums out;
  for (const auto& [h, row] : table.rows()) {
    if (row.total <= 0) continue;
    std::vector<double> p(row.counts.size());
    for (std::size_t x = 0; x < p.size(); ++x) p[x] = static_cast<double>(row.counts[x]) / static_cast<double>(row.total);
    const auto qh = q.conditional(h);
    const double w = static_cast<double>(row.total) / m;
    out.kl += w * kl_divergence(p, qh);
    out.cross_entropy += w * cross_entropy(p, qh);
  }
  return out;
}

std::uint64_t mix(std::uint64_t seed, std::span<const SymbolId> prefix) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  h ^= prefix.size();
  h *= 0x100000001b3ULL;
  for (SymbolId s : prefix) {
    h ^= static_cast<std::uint64_t>(s) + 1;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> random_logit_distribution(Rng& rng, std::size_t k) {
  std::vector<double> z(k);
  for (double& v : z) v = uniform(rng, -2.0, 2.0);
  return softmax(z);
}

PrefixModel random_prefix_model(std::uint64_t seed, std::size_t alphabet) {
  return [seed, alphabet](std::span<const SymbolId> prefix) {
    Rng rng(mix(seed, prefix));
    return random_logit_distribution(rng, alphabet + 1);
  };
}

Corpus random_corpus(Rng& rng, const RandomIdentityOptions& options) {
  const std::size_t alphabet = 1 + uniform_index(rng, options.max_alphabet);
  std::vector<std::string> symbols;
  for (std::size_t a = 0; a < alphabet; ++a) symbols.push_back("s" + std::to_string(a));
  Corpus corpus;
  corpus.vocab = std::make_shared<const Vocabulary>(symbols);
  const std::size_t m = 1 + uniform_index(rng, options.max_sequences);
  for (std::size_t i = 0; i < m; ++i) {
    Sequence seq(uniform_index(rng, options.max_len + 1));
    for (auto& s : seq) s = static_cast<SymbolId>(uniform_index(rng, alphabet));
    corpus.sequences.push_back(std::move(seq));
  }
  return corpus;
}

ConditionalLM random_bigram(Rng& rng, const std::shared_ptr<const Vocabulary>& vocab) {
  ConditionalLM q(2, vocab);
  for (SymbolId s = 0; s <= vocab->bos_id(); ++s) q.set(History{s}, random_logit_distribution(rng, vocab->outcome_count()));
  q.set_backstop_uniform();
  return q;
}

std::vector<double> random_simplex(Rng& rng, std::size_t dim, double zero_chance) {
  std::vector<double> v(dim);
  double s = 0.0;
  for (double& x : v) {
    x = uniform01(rng) < zero_chance ? 0.0 : -std::log(1.0 - uniform01(rng));
    s += x;
  }
  if (s == 0.0) {
    v[uniform_index(rng, dim)] = 1.0;
    s = 1.0;
  }
  for (double& x : v) x /= s;
  return v;
}

}  // namespace

IdentitySides theorem1_sides(const Corpus& corpus, const PrefixModel& q, std::size_t max_len) {
  return {string_level(corpus, q, max_len).kl, prefix_tree_kl(corpus, q)};
}

IdentitySides corollary_sides(const Corpus& corpus, const ConditionalLM& q, std::size_t max_len) {
  return {string_level(corpus, as_prefix_model(q), max_len).kl, history_level(corpus, q).kl};
}

IdentitySides corollary_cross_entropy_sides(const Corpus& corpus, const ConditionalLM& q, std::size_t max_len) {
  return {string_level(corpus, as_prefix_model(q), max_len).cross_entropy, history_level(corpus, q).cross_entropy};
}

VerificationReport check_theorem1(const RandomIdentityOptions& options) {
  double worst = 0.0;
  for (int t = 0; t < options.trials; ++t) {
    Rng rng(options.seed + static_cast<std::uint64_t>(t));
    const auto corpus = random_corpus(rng, options);
    const auto q = random_prefix_model(rng(), corpus.vocab->size());
    const auto sides = theorem1_sides(corpus, q, options.max_len);
    worst = std::max(worst, std::abs(sides.lhs - sides.rhs));
  }
  return make_report("T1", options.trials, worst, options.tolerance, options.seed);
}

VerificationReport check_corollary(const RandomIdentityOptions& options) {
  double worst = 0.0;
  for (int t = 0; t < options.trials; ++t) {
    Rng rng(options.seed + static_cast<std::uint64_t>(t));
    const auto corpus = random_corpus(rng, options);
    const auto q = random_bigram(rng, corpus.vocab);
    const auto sides = corollary_sides(corpus, q, options.max_len);
    worst = std::max(worst, std::abs(sides.lhs - sides.rhs));
  }
  return make_report("COR", options.trials, worst, options.tolerance, options.seed);
}

VerificationReport check_corollary_cross_entropy(const RandomIdentityOptions& options) {
  double worst = 0.0;
  for (int t = 0; t < options.trials; ++t) {
    Rng rng(options.seed + static_cast<std::uint64_t>(t));
    const auto corpus = random_corpus(rng, options);
    const auto q1 = random_bigram(rng, corpus.vocab);
    const auto q2 = random_bigram(rng, corpus.vocab);
    const auto ce = corollary_cross_entropy_sides(corpus, q1, options.max_len);
    const auto kl1 = corollary_sides(corpus, q1, options.max_len);
    const auto kl2 = corollary_sides(corpus, q2, options.max_len);
    const double gap_drift = std::abs((kl1.lhs - kl1.rhs) - (kl2.lhs - kl2.rhs));
    worst = std::max({worst, std::abs(ce.lhs - ce.rhs), gap_drift});
  }
  return make_report("COR_CE", options.trials, worst, options.tolerance, options.seed);
}

VerificationReport check_theorem2(const CountTable& counts, double gamma, const Theorem2Options& options) {
  if (!(gamma > 0.0)) throw ParameterError("theorem 2 check needs gamma > 0");
  std::vector<History> histories;
  double heaviest = 0.0;
  for (const auto& [h, row] : counts.rows()) {
    if (row.total <= 0) continue;
    histories.push_back(h);
    heaviest = std::max(heaviest, static_cast<double>(row.total) + gamma);
  }
  TabularSoftmaxLM model(counts.order(), counts.vocab_ptr(), histories);
  TrainConfig config;
  config.objective.kind = ObjectiveKind::kLabelSmoothing;
  config.objective.gamma_ls = gamma;
  // Step size 1 / (largest per-history curvature bound).
  config.lr = static_cast<double>(counts.total_tokens()) / heaviest;
  config.epochs = options.max_epochs;
  config.grad_tol = options.grad_tol;
  double err = std::numeric_limits<double>::infinity();
  try {
    train(model, counts, config);
    const auto target = smooth_add_lambda(counts, gamma / static_cast<double>(counts.outcome_count()));
    err = 0.0;
    for (const auto& h : histories) {
      const auto q = model.forward(h);
      const auto want = target.conditional(h);
      for (std::size_t x = 0; x < q.size(); ++x) err = std::max(err, std::abs(q[x] - want[x]));
    }
  } catch (const TrainingError&) {
  }
  return make_report("T2", 1, err, options.tolerance, 0);
}

VerificationReport check_theorem2(std::uint64_t seed, const Theorem2Options& options) {
  ZipfBigramConfig cfg;
  cfg.vocab_size = 8;
  cfg.sequences = 50;
  cfg.seed = seed;
  const auto corpus = make_corpus(zipf_bigram_lines(cfg));
  const auto counts = count_ngrams(corpus, 2);
  double worst = 0.0;
  int trials = 0;
  for (double gamma : {0.1, 1.0, 10.0}) {
    const auto r = check_theorem2(counts, gamma, options);
    worst = std::max(worst, r.max_abs_error);
    ++trials;
  }
  return make_report("T2", trials, worst, options.tolerance, seed);
}

Theorem3Reports check_theorem3(std::span<const int> dims, int trials, std::uint64_t seed, double tolerance,
                               int q_per_pair) {
  if (dims.empty()) throw ParameterError("theorem 3 check needs at least one dimension");
  for (int d : dims) {
    if (d < 2) throw ParameterError("theorem 3 check needs dim >= 2, got " + std::to_string(d));
  }
  double worst_variance = 0.0;
  double worst_linearity = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed + static_cast<std::uint64_t>(t));
    const auto dim = static_cast<std::size_t>(dims[static_cast<std::size_t>(t) % dims.size()]);
    const auto p = random_simplex(rng, dim, 0.3);
    const auto p_smooth = random_simplex(rng, dim, 0.15);
    const auto d = signed_decompose(p, p_smooth);
    std::vector<double> bracket;
    for (int j = 0; j < q_per_pair; ++j) {
      const auto q = random_simplex(rng, dim, 0.0);
      double kl_plus = 0.0;
      double kl_minus = 0.0;
      double ce_plus = 0.0;
      double ce_minus = 0.0;
      if (d.z_plus > 0.0) {
        kl_plus = kl_divergence(d.p_plus, q);
        ce_plus = cross_entropy(d.p_plus, q);
      }
      if (d.z_minus > 0.0) {
        kl_minus = kl_divergence(d.p_minus, q);
        ce_minus = cross_entropy(d.p_minus, q);
      }
      bracket.push_back(kl_divergence(p_smooth, q) -
                        (kl_divergence(p, q) + d.z_plus * kl_plus - d.z_minus * kl_minus));
      const double lhs = cross_entropy(p_smooth, q);
      const double rhs = cross_entropy(p, q) + d.z_plus * ce_plus - d.z_minus * ce_minus;
      worst_linearity = std::max(worst_linearity, std::abs(lhs - rhs));
    }
    double mean = 0.0;
    for (double b : bracket) mean += b;
    mean /= static_cast<double>(bracket.size());
    double var = 0.0;
    for (double b : bracket) var += (b - mean) * (b - mean);
    var /= static_cast<double>(bracket.size());
    worst_variance = std::max(worst_variance, var);
  }
  return {make_report("T3", trials, worst_variance, tolerance, seed),
          make_report("CE_LINEARITY", trials, worst_linearity, tolerance, seed)};
}

std::vector<VerificationReport> verify_all(std::uint64_t seed, double tolerance_override) {
  RandomIdentityOptions identity;
  identity.seed = seed;
  Theorem2Options t2;
  double t3_tol = 1e-10;
  if (tolerance_override >= 0.0) {
    identity.tolerance = tolerance_override;
    t2.tolerance = tolerance_override;
    t3_tol = tolerance_override;
  }
  const int dims[] = {2, 3, 5};
  std::vector<VerificationReport> out;
  out.push_back(check_theorem1(identity));
  out.push_back(check_corollary(identity));
  out.push_back(check_theorem2(seed, t2));
  const auto t3 = check_theorem3(dims, 1000, seed, t3_tol);
  out.push_back(t3.bracket);
  out.push_back(t3.linearity);
  return out;
}

}  // namespace smoothreg
