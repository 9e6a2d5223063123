#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smoothreg/conditional_lm.hpp"
#include "smoothreg/count_table.hpp"
#include "smoothreg/decompose.hpp"
#include "smoothreg/models.hpp"
#include "smoothreg/smoothers.hpp"

namespace smoothreg {

enum class ObjectiveKind { kMle, kLabelSmoothing, kSmoothedTarget, kSplitRegularizer };

// mle | label_smoothing | smoothed_target | split_regularizer
std::string objective_name(ObjectiveKind kind);
ObjectiveKind parse_objective(const std::string& name);

struct Objective {
  ObjectiveKind kind = ObjectiveKind::kMle;
  double gamma_ls = 0.0;
  SmootherSpec smoother;  // smoothed_target and split_regularizer
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
  RegularizerSign sign = RegularizerSign::kSigned;
};

struct TrainConfig {
  Objective objective;
  double lr = 0.5;
  int epochs = 100;
  int patience = 20;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
  // Stop once every gradient coordinate is below this in magnitude (0 = off).
  double grad_tol = 0.0;

  // Throws ParameterError for lr <= 0 (lr == 0 is allowed), epochs < 1, etc.
  void validate() const;
};

// Every objective reduces to a weighted cross-entropy per history,
//   loss = sum_h sum_x coeff_h[x] * -log q(x|h) + constant,
// with coefficients already divided by the token count N. The constant turns
// cross-entropies into KL terms where the objective is written as a KL.
struct WeightedHistory {
  History history;
  std::vector<double> coeff;
};

struct TrainingTargets {
  std::vector<WeightedHistory> rows;
  double constant = 0.0;
};

//   mle:               coeff = #(hx)/N
//   label_smoothing:   + gamma_ls/N * u on every occupied history
//   smoothed_target:   coeff = #(h)/N * p~(.|h)   (`smoothed` or built from the spec)
//   split_regularizer: + #(h)/N * (gamma+ Z+ p+ -/+ gamma- Z- p-)  (`bundle` or built)
TrainingTargets build_targets(const CountTable& table, const Objective& objective,
                              const RegularizerBundle* bundle = nullptr, const ConditionalLM* smoothed = nullptr);

struct Example {
  History history;
  std::size_t outcome;
};

// Every (history, next outcome) event of the BOS-padded corpus, in order.
std::vector<Example> make_examples(const Corpus& corpus, int order);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

LossGrad loss_and_grad(const NeuralLM& model, const TrainingTargets& targets);
// Batch form: counts the examples, then scores them under the configured
// objective. `bundle` must be given iff the objective is split_regularizer.
LossGrad loss_and_grad(const NeuralLM& model, std::span<const Example> batch, const RegularizerBundle* bundle,
                       const TrainConfig& config);

// exp(-sum #(hx) log q(x|h) / N).
double model_perplexity(const NeuralLM& model, const CountTable& counts);
double model_perplexity(const NeuralLM& model, const Corpus& corpus);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double heldout_perplexity = 0.0;  // NaN without held-out data
};

struct TrainResult {
  std::vector<EpochMetrics> history;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_heldout_perplexity = 0.0;
  double final_train_loss = 0.0;  // objective at the returned parameters
  bool converged = false;         // stopped by grad_tol
};

// Full-batch gradient descent. With held-out counts, stops after `patience`
// epochs without improvement and restores the best parameters. Throws
// TrainingError on a non-finite loss or gradient.
TrainResult train(NeuralLM& model, const CountTable& table, const TrainConfig& config,
                  const RegularizerBundle* bundle = nullptr, const CountTable* heldout = nullptr);
TrainResult train(NeuralLM& model, const Corpus& corpus, const TrainConfig& config,
                  const RegularizerBundle* bundle = nullptr, const Corpus* heldout = nullptr);

// Minimises sum_h #(h)/N KL(smoothed(.|h) || q(.|h)).
TrainResult train_smoothed_target(NeuralLM& model, const ConditionalLM& smoothed, const CountTable& table,
                                  TrainConfig config, const CountTable* heldout = nullptr);

// TSV `epoch<TAB>train_loss<TAB>heldout_perplexity`.
void write_metrics(std::ostream& out, const TrainResult& result);

}  // namespace smoothreg
