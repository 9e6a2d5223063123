#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace smoothreg {

// Bigram source whose transition rows are Zipfian over a per-row random
// ranking of the symbols. Tokens are spelled w0, w1, ...
struct ZipfBigramConfig {
  std::size_t vocab_size = 50;
  std::size_t sequences = 2000;
  double exponent = 1.1;
  double stop_probability = 0.12;  // EOS chance after each emitted token
  std::size_t max_length = 40;
  std::uint64_t seed = 0;
};

// Deterministic in the config; the transition table depends only on
// (vocab_size, exponent, seed), so two calls that differ only in `sequences`
// share a source and the shorter output is a prefix of the longer.
std::vector<std::string> zipf_bigram_lines(const ZipfBigramConfig& config);

struct SyntheticSplit {
  std::vector<std::string> train;
  std::vector<std::string> heldout;
};

// First `train_size` lines for training and the next `heldout_size` lines
// from the same source for evaluation.
SyntheticSplit zipf_bigram_split(ZipfBigramConfig config, std::size_t train_size, std::size_t heldout_size);

}  // namespace smoothreg
