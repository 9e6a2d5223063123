#include "smoothreg/synthetic.hpp"

#include <cmath>

#include "smoothreg/errors.hpp"
#include "smoothreg/random.hpp"

namespace smoothreg {

std::vector<std::string> zipf_bigram_lines(const ZipfBigramConfig& config) {
  if (config.vocab_size == 0) throw ParameterError("synthetic vocabulary must be nonempty");
  if (!(config.stop_probability > 0.0 && config.stop_probability <= 1.0)) {
    throw ParameterError("stop probability must lie in (0, 1]");
  }
  if (config.max_length == 0) throw ParameterError("max_length must be positive");
  const std::size_t v = config.vocab_size;
  Rng table_rng(config.seed * 0x9E3779B97F4A7C15ULL + 1);

  // Row r (r == v is the start state) holds the cumulative next-symbol weights.
  std::vector<std::vector<double>> cumulative(v + 1, std::vector<double>(v));
  for (auto& row : cumulative) {
    std::vector<std::size_t> rank(v);
    for (std::size_t i = 0; i < v; ++i) rank[i] = i;
    for (std::size_t i = v; i > 1; --i) std::swap(rank[i - 1], rank[uniform_index(table_rng, i)]);
    double acc = 0.0;
    for (std::size_t s = 0; s < v; ++s) {
      acc += 1.0 / std::pow(static_cast<double>(rank[s] + 1), config.exponent);
      row[s] = acc;
    }
  }

  Rng rng(config.seed * 0xBF58476D1CE4E5B9ULL + 2);
  std::vector<std::string> lines;
  lines.reserve(config.sequences);
  for (std::size_t m = 0; m < config.sequences; ++m) {
    std::string line;
    std::size_t state = v;
    for (std::size_t t = 0; t < config.max_length; ++t) {
      const auto& row = cumulative[state];
      const double u = uniform01(rng) * row.back();
      std::size_t s = 0;
      while (s + 1 < v && row[s] <= u) ++s;
      if (!line.empty()) line += ' ';
      line += 'w' + std::to_string(s);
      state = s;
      if (uniform01(rng) < config.stop_probability) break;
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

SyntheticSplit zipf_bigram_split(ZipfBigramConfig config, std::size_t train_size, std::size_t heldout_size) {
  config.sequences = train_size + heldout_size;
  auto lines = zipf_bigram_lines(config);
  SyntheticSplit split;
  split.train.assign(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(train_size));
  split.heldout.assign(lines.begin() + static_cast<std::ptrdiff_t>(train_size), lines.end());
  return split;
}

}  // namespace smoothreg
