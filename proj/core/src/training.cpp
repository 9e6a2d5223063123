#include "smoothreg/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "smoothreg/divergence.hpp"
#include "smoothreg/errors.hpp"
#include "smoothreg/ngram_eval.hpp"

namespace smoothreg {

std::string objective_name(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kMle:
      return "mle";
    case ObjectiveKind::kLabelSmoothing:
      return "label_smoothing";
    case ObjectiveKind::kSmoothedTarget:
      return "smoothed_target";
    case ObjectiveKind::kSplitRegularizer:
      return "split_regularizer";
  }
  return "unknown";
}

ObjectiveKind parse_objective(const std::string& name) {
  for (auto k : {ObjectiveKind::kMle, ObjectiveKind::kLabelSmoothing, ObjectiveKind::kSmoothedTarget,
                 ObjectiveKind::kSplitRegularizer}) {
    if (objective_name(k) == name) return k;
  }
  throw ParameterError("unknown objective '" + name +
                       "' (expected mle, label_smoothing, smoothed_target or split_regularizer)");
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ParameterError("learning rate must be finite and >= 0");
  if (epochs < 1) throw ParameterError("epochs must be >= 1, got " + std::to_string(epochs));
  if (patience < 1) throw ParameterError("patience must be >= 1, got " + std::to_string(patience));
  if (!(init_scale >= 0.0)) throw ParameterError("init_scale must be >= 0");
  if (!(grad_tol >= 0.0)) throw ParameterError("grad_tol must be >= 0");
  if (!(objective.gamma_ls >= 0.0)) throw ParameterError("gamma_ls must be >= 0");
  if (!(objective.gamma_plus >= 0.0) || !(objective.gamma_minus >= 0.0)) {
    throw ParameterError("gamma_plus and gamma_minus must be >= 0");
  }
}

TrainingTargets build_targets(const CountTable& table, const Objective& objective, const RegularizerBundle* bundle,
                              const ConditionalLM* smoothed) {
  if (bundle && objective.kind != ObjectiveKind::kSplitRegularizer) {
    throw ParameterError("a regularizer bundle is only used by the split_regularizer objective");
  }
  const auto n = static_cast<double>(table.total_tokens());
  if (n <= 0.0) throw InputError("training data is empty");
  const std::size_t k = table.outcome_count();
  TrainingTargets targets;

  ConditionalLM built(table.order(), table.vocab_ptr());
  if (objective.kind == ObjectiveKind::kSmoothedTarget && !smoothed) {
    built = smooth(table, objective.smoother);
    smoothed = &built;
  }
  RegularizerBundle built_bundle;
  if (objective.kind == ObjectiveKind::kSplitRegularizer && !bundle) {
    const auto target = smooth(table, objective.smoother);
    built_bundle = build_regularizer(empirical_conditional(table), target, table, objective.gamma_plus,
                                     objective.gamma_minus, objective.sign);
    bundle = &built_bundle;
  }

  for (const auto& [h, row] : table.rows()) {
    if (row.total <= 0) continue;
    const double w = static_cast<double>(row.total) / n;
    WeightedHistory wh{h, std::vector<double>(k, 0.0)};
    switch (objective.kind) {
      case ObjectiveKind::kSmoothedTarget: {
        const auto target = smoothed->conditional(h);
        for (std::size_t x = 0; x < k; ++x) wh.coeff[x] = w * target[x];
        targets.constant -= w * entropy(target);
        break;
      }
      case ObjectiveKind::kLabelSmoothing: {
        const double g = objective.gamma_ls / n;
        for (std::size_t x = 0; x < k; ++x) wh.coeff[x] = static_cast<double>(row.counts[x]) / n + g / static_cast<double>(k);
        targets.constant -= g * std::log(static_cast<double>(k));
        break;
      }
      case ObjectiveKind::kSplitRegularizer: {
        for (std::size_t x = 0; x < k; ++x) wh.coeff[x] = static_cast<double>(row.counts[x]) / n;
        auto it = bundle->per_history.find(h);
        if (it == bundle->per_history.end()) {
          throw CoverageError("regularizer has no term for history '" + table.vocab().render_history(h) + "'");
        }
        const auto& d = it->second.decomposition;
        const double plus = bundle->gamma_plus * d.z_plus;
        const double minus = bundle->minus_coefficient() * d.z_minus;
        for (std::size_t x = 0; x < k; ++x) wh.coeff[x] += w * (plus * d.p_plus[x] + minus * d.p_minus[x]);
        if (plus != 0.0) targets.constant -= w * plus * entropy(d.p_plus);
        if (minus != 0.0) targets.constant -= w * minus * entropy(d.p_minus);
        break;
      }
      case ObjectiveKind::kMle:
        for (std::size_t x = 0; x < k; ++x) wh.coeff[x] = static_cast<double>(row.counts[x]) / n;
        break;
    }
    targets.rows.push_back(std::move(wh));
  }
  return targets;
}

std::vector<Example> make_examples(const Corpus& corpus, int order) {
  std::vector<Example> out;
  const auto& vocab = *corpus.vocab;
  for (const auto& seq : corpus.sequences) {
    for (std::size_t t = 0; t <= seq.size(); ++t) {
      const std::size_t outcome = t < seq.size() ? vocab.outcome_of(seq[t]) : vocab.eos_outcome();
      out.push_back({history_of(std::span<const SymbolId>(seq).first(t), order, vocab.bos_id()), outcome});
    }
  }
  return out;
}

LossGrad loss_and_grad(const NeuralLM& model, const TrainingTargets& targets) {
  LossGrad out;
  out.grad.assign(model.parameters().size(), 0.0);
  out.loss = targets.constant;
  std::vector<double> g;
  for (const auto& row : targets.rows) {
    const auto z = model.logits(row.history);
    const double lse = log_sum_exp(z);
    double mass = 0.0;
    for (std::size_t x = 0; x < z.size(); ++x) {
      if (row.coeff[x] == 0.0) continue;
      out.loss += row.coeff[x] * (lse - z[x]);
      mass += row.coeff[x];
    }
    g.resize(z.size());
    for (std::size_t x = 0; x < z.size(); ++x) g[x] = mass * std::exp(z[x] - lse) - row.coeff[x];
    model.backward(row.history, g, out.grad);
  }
  return out;
}

LossGrad loss_and_grad(const NeuralLM& model, std::span<const Example> batch, const RegularizerBundle* bundle,
                       const TrainConfig& config) {
  if (batch.empty()) throw InputError("empty training batch");
  const bool split = config.objective.kind == ObjectiveKind::kSplitRegularizer;
  if (split != (bundle != nullptr)) {
    throw ParameterError("a regularizer bundle must be given exactly when the objective is split_regularizer");
  }
  CountTable table(model.order(), model.vocab_ptr());
  for (const auto& ex : batch) table.add(ex.history, ex.outcome);
  return loss_and_grad(model, build_targets(table, config.objective, bundle));
}

double model_perplexity(const NeuralLM& model, const CountTable& counts) {
  double total = 0.0;
  for (const auto& [h, row] : counts.rows()) {
    if (row.total <= 0) continue;
    const auto z = model.logits(h);
    const double lse = log_sum_exp(z);
    for (std::size_t x = 0; x < z.size(); ++x) {
      if (row.counts[x] > 0) total += static_cast<double>(row.counts[x]) * (z[x] - lse);
    }
  }
  return std::exp(-total / static_cast<double>(counts.total_tokens()));
}

double model_perplexity(const NeuralLM& model, const Corpus& corpus) {
  return model_perplexity(model, count_ngrams(corpus, model.order()));
}

namespace {

TrainResult run_descent(NeuralLM& model, const TrainingTargets& targets, const TrainConfig& config,
                        const CountTable* heldout) {
  config.validate();
  TrainResult result;
  auto& params = model.parameters();
  std::vector<double> best = params;
  double best_ppl = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto lg = loss_and_grad(model, targets);
    double gmax = 0.0;
    for (double v : lg.grad) gmax = std::max(gmax, std::abs(v));
    if (!std::isfinite(lg.loss) || !std::isfinite(gmax)) {
      throw TrainingError("training diverged at step " + std::to_string(epoch) + " (loss " +
                          format_probability(lg.loss) + ", lr " + format_probability(config.lr) + ")");
    }
    if (config.grad_tol > 0.0 && gmax < config.grad_tol) {
      result.converged = true;
      break;
    }
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= config.lr * lg.grad[i];
    EpochMetrics m{epoch, lg.loss, std::numeric_limits<double>::quiet_NaN()};
    result.epochs_run = epoch;
    if (heldout) {
      m.heldout_perplexity = model_perplexity(model, *heldout);
      if (m.heldout_perplexity < best_ppl) {
        best_ppl = m.heldout_perplexity;
        best = params;
        result.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    }
    result.history.push_back(m);
    if (heldout && since_best >= config.patience) break;
  }
  if (heldout && result.best_epoch > 0) {
    params = best;
    result.best_heldout_perplexity = best_ppl;
  } else {
    result.best_epoch = result.epochs_run;
    result.best_heldout_perplexity = heldout ? model_perplexity(model, *heldout)
                                             : std::numeric_limits<double>::quiet_NaN();
  }
  result.final_train_loss = loss_and_grad(model, targets).loss;
  return result;
}

}  // namespace

TrainResult train(NeuralLM& model, const CountTable& table, const TrainConfig& config,
                  const RegularizerBundle* bundle, const CountTable* heldout) {
  if (table.order() != model.order()) throw ShapeError("count table and model orders differ");
  if (table.outcome_count() != model.outcome_count()) throw ShapeError("count table and model alphabets differ");
  config.validate();
  return run_descent(model, build_targets(table, config.objective, bundle), config, heldout);
}

TrainResult train(NeuralLM& model, const Corpus& corpus, const TrainConfig& config, const RegularizerBundle* bundle,
                  const Corpus* heldout) {
  const auto table = count_ngrams(corpus, model.order());
  if (!heldout) return train(model, table, config, bundle, nullptr);
  const auto held = count_ngrams(*heldout, model.order());
  return train(model, table, config, bundle, &held);
}

TrainResult train_smoothed_target(NeuralLM& model, const ConditionalLM& smoothed, const CountTable& table,
                                  TrainConfig config, const CountTable* heldout) {
  if (smoothed.order() != model.order() || smoothed.outcome_count() != model.outcome_count()) {
    throw ShapeError("smoothed LM does not match the model's order and alphabet");
  }
  config.objective.kind = ObjectiveKind::kSmoothedTarget;
  config.validate();
  return run_descent(model, build_targets(table, config.objective, nullptr, &smoothed), config, heldout);
}

void write_metrics(std::ostream& out, const TrainResult& result) {
  out << "epoch\ttrain_loss\theldout_perplexity\n";
  for (const auto& m : result.history) {
    out << m.epoch << '\t' << format_probability(m.train_loss) << '\t'
        << (std::isnan(m.heldout_perplexity) ? std::string("nan") : format_probability(m.heldout_perplexity))
        << '\n';
  }
}

}  // namespace smoothreg
