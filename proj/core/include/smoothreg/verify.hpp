#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smoothreg/conditional_lm.hpp"
#include "smoothreg/corpus.hpp"
#include "smoothreg/count_table.hpp"
#include "smoothreg/ngram_eval.hpp"

namespace smoothreg {

struct VerificationReport {
  std::string theorem_id;  // T1, COR, COR_CE, T2, T3, CE_LINEARITY
  int trials = 0;
  double max_abs_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::uint64_t seed = 0;

  // `T2 trials=1 max_err=3.1e-05 tol=1.0e-04 PASS seed=0`
  std::string line() const;
};

VerificationReport make_report(std::string id, int trials, double max_abs_error, double tolerance,
                               std::uint64_t seed);

// Two sides of a string-level identity for one (p, q) instance.
struct IdentitySides {
  double lhs = 0.0;
  double rhs = 0.0;
};

// KL(p||q) summed over the strings of the empirical distribution p of
// `corpus`, against sum_x pi(x) KL(p(.|x)||q(.|x)) over its prefix tree.
// Throws ValidationError when q gives zero probability to a string of p.
IdentitySides theorem1_sides(const Corpus& corpus, const PrefixModel& q, std::size_t max_len);

// KL(p_D||q) against (1/M) sum_h #(h) KL(p_D(.|h)||q(.|h)) for an n-gram q.
IdentitySides corollary_sides(const Corpus& corpus, const ConditionalLM& q, std::size_t max_len);
// Same identity written with cross-entropies in place of KL divergences.
IdentitySides corollary_cross_entropy_sides(const Corpus& corpus, const ConditionalLM& q, std::size_t max_len);

struct RandomIdentityOptions {
  int trials = 200;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  std::size_t max_alphabet = 3;
  std::size_t max_len = 5;
  std::size_t max_sequences = 8;
};

// Random empirical p (corpus of up to max_sequences strings) against a random
// full-support prefix model q; trial t uses seed + t.
VerificationReport check_theorem1(const RandomIdentityOptions& options = {});
// Random corpus against a random full-support bigram q, literal 1/M form.
VerificationReport check_corollary(const RandomIdentityOptions& options = {});
// Cross-entropy form of the same identity plus q-invariance of the KL gap.
VerificationReport check_corollary_cross_entropy(const RandomIdentityOptions& options = {});

struct Theorem2Options {
  double tolerance = 1e-4;
  int max_epochs = 400000;
  double grad_tol = 1e-13;
};

// Trains a tabular softmax model under MLE + gamma * label smoothing and
// compares every stored history with add-lambda, lambda = gamma / (|Sigma|+1).
// Non-convergence shows up as a failed report.
VerificationReport check_theorem2(const CountTable& counts, double gamma, const Theorem2Options& options = {});
// Default instance: 50-sequence synthetic bigram corpus, gamma in {0.1, 1, 10}.
VerificationReport check_theorem2(std::uint64_t seed, const Theorem2Options& options = {});

struct Theorem3Reports {
  VerificationReport bracket;      // T3: max variance of the KL bracket over q
  VerificationReport linearity;    // CE_LINEARITY
};

// Random (p, p~) pairs on simplices of the given dimensions (trial t uses
// dims[t % dims.size()]), each checked against `q_per_pair` random q.
Theorem3Reports check_theorem3(std::span<const int> dims, int trials, std::uint64_t seed, double tolerance = 1e-10,
                               int q_per_pair = 50);

// T1, COR, T2, T3, CE_LINEARITY with their default settings. A negative
// tolerance keeps the defaults.
std::vector<VerificationReport> verify_all(std::uint64_t seed, double tolerance_override = -1.0);

}  // namespace smoothreg
