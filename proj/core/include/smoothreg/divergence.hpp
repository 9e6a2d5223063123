#pragma once

#include <span>
#include <vector>

namespace smoothreg {

// Information-theoretic helpers over finite distributions, natural log.
// Terms with p(x) == 0 contribute nothing; p(x) > 0 with q(x) == 0 yields +inf.

double entropy(std::span<const double> p);
double cross_entropy(std::span<const double> p, std::span<const double> q);
double kl_divergence(std::span<const double> p, std::span<const double> q);

double sum(std::span<const double> v);
double total_variation(std::span<const double> p, std::span<const double> q);

// Numerically stable softmax (max subtraction).
std::vector<double> softmax(std::span<const double> logits);
double log_sum_exp(std::span<const double> logits);

std::vector<double> uniform_distribution(std::size_t k);

}  // namespace smoothreg
