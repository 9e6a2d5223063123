#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "smoothreg/corpus.hpp"
#include "smoothreg/models.hpp"

namespace smoothreg::cli {

struct GridJob {
  int index = 0;
  std::string objective;  // mle (baseline) or split_regularizer
  std::string method;
  std::string params;
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
};

struct GridRow {
  GridJob job;
  double train_loss = 0.0;          // mean over seeds
  double heldout_perplexity = 0.0;  // mean best held-out perplexity over seeds
  double epochs = 0.0;              // mean epochs run
};

// Baseline first (when requested), then method params x gamma+ x gamma-.
// Throws SizeError when the product exceeds config.cap.
std::vector<GridJob> grid_jobs(const RunConfig& config);

std::unique_ptr<NeuralLM> make_model(const RunConfig& config, std::shared_ptr<const Vocabulary> vocab,
                                     const std::vector<History>& histories, std::uint64_t seed);

// Runs every job on `config.workers` threads; rows come back in job order.
std::vector<GridRow> run_grid(const RunConfig& config, const Corpus& train, const Corpus& heldout);

// Sorted by held-out perplexity, ties by job index.
void write_grid(std::ostream& out, std::vector<GridRow> rows);

}  // namespace smoothreg::cli
