#include "grid.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <ostream>
#include <thread>

#include "smoothreg/count_table.hpp"
#include "smoothreg/decompose.hpp"
#include "smoothreg/errors.hpp"
#include "smoothreg/ngram_eval.hpp"
#include "smoothreg/smoothers.hpp"
#include "smoothreg/training.hpp"

namespace smoothreg::cli {

std::vector<GridJob> grid_jobs(const RunConfig& config) {
  auto params = config.method_params_list;
  if (params.empty()) params.push_back(config.method_params);
  auto plus = config.gamma_plus_list;
  if (plus.empty()) plus.push_back(config.gamma_plus);
  auto minus = config.gamma_minus_list;
  if (minus.empty()) minus.push_back(config.gamma_minus);

  const std::size_t size = params.size() * plus.size() * minus.size() + (config.baseline ? 1 : 0);
  if (size > static_cast<std::size_t>(config.cap)) {
    throw SizeError("grid has " + std::to_string(size) + " combinations, above the cap of " +
                    std::to_string(config.cap) + "; raise it with --cap");
  }
  std::vector<GridJob> jobs;
  if (config.baseline) jobs.push_back({0, "mle", "none", "{}", 0.0, 0.0});
  for (const auto& p : params) {
    // Normalise the parameter text through the spec so rows are comparable.
    const auto spec = SmootherSpec::parse(config.method, p, config.order);
    for (double gp : plus) {
      for (double gm : minus) {
        jobs.push_back({static_cast<int>(jobs.size()), "split_regularizer", spec.name(), spec.params_string(), gp, gm});
      }
    }
  }
  return jobs;
}

std::unique_ptr<NeuralLM> make_model(const RunConfig& config, std::shared_ptr<const Vocabulary> vocab,
                                     const std::vector<History>& histories, std::uint64_t seed) {
  if (config.architecture == "tabular") {
    return std::make_unique<TabularSoftmaxLM>(config.order, std::move(vocab), histories);
  }
  if (config.architecture == "feedforward") {
    auto model = std::make_unique<FeedForwardLM>(config.order, std::move(vocab), config.embed_dim, config.hidden_dim);
    model->initialize(seed, config.init_scale);
    return model;
  }
  throw ParameterError("unknown architecture '" + config.architecture + "' (expected tabular or feedforward)");
}

namespace {

struct Shared {
  CountTable train;
  CountTable heldout;
  std::vector<History> histories;
};

GridRow run_job(const RunConfig& config, const Shared& shared, const GridJob& job) {
  TrainConfig tc;
  tc.lr = config.effective_lr();
  tc.epochs = config.epochs;
  tc.patience = config.patience;
  tc.init_scale = config.init_scale;
  RegularizerBundle bundle;
  const RegularizerBundle* bundle_ptr = nullptr;
  if (job.objective == "split_regularizer") {
    tc.objective.kind = ObjectiveKind::kSplitRegularizer;
    tc.objective.smoother = SmootherSpec::parse(job.method, job.params, config.order);
    tc.objective.gamma_plus = job.gamma_plus;
    tc.objective.gamma_minus = job.gamma_minus;
    tc.objective.sign = parse_sign(config.sign);
    const auto smoothed = smooth(shared.train, tc.objective.smoother);
    bundle = build_regularizer(empirical_conditional(shared.train), smoothed, shared.train, job.gamma_plus,
                               job.gamma_minus, tc.objective.sign);
    bundle_ptr = &bundle;
  }
  auto seeds = config.seeds;
  if (seeds.empty()) seeds.push_back(config.seed);
  GridRow row;
  row.job = job;
  for (auto seed : seeds) {
    tc.seed = seed;
    auto model = make_model(config, shared.train.vocab_ptr(), shared.histories, seed);
    const auto result = train(*model, shared.train, tc, bundle_ptr, &shared.heldout);
    row.train_loss += result.final_train_loss;
    row.heldout_perplexity += result.best_heldout_perplexity;
    row.epochs += result.epochs_run;
  }
  const auto n = static_cast<double>(seeds.size());
  row.train_loss /= n;
  row.heldout_perplexity /= n;
  row.epochs /= n;
  return row;
}

}  // namespace

std::vector<GridRow> run_grid(const RunConfig& config, const Corpus& train, const Corpus& heldout) {
  const auto jobs = grid_jobs(config);
  Shared shared{count_ngrams(train, config.order), count_ngrams(heldout, config.order), {}};
  for (const auto& [h, row] : shared.train.rows()) shared.histories.push_back(h);

  std::vector<GridRow> rows(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        rows[i] = run_job(config, shared, jobs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(config.workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_grid(std::ostream& out, std::vector<GridRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
    if (a.heldout_perplexity != b.heldout_perplexity) return a.heldout_perplexity < b.heldout_perplexity;
    return a.job.index < b.job.index;
  });
  out << "index\tobjective\tmethod\tparams\tgamma_plus\tgamma_minus\ttrain_loss\theldout_perplexity\tepochs\n";
  for (const auto& r : rows) {
    out << r.job.index << '\t' << r.job.objective << '\t' << r.job.method << '\t' << r.job.params << '\t'
        << format_probability(r.job.gamma_plus) << '\t' << format_probability(r.job.gamma_minus) << '\t'
        << format_probability(r.train_loss) << '\t' << format_probability(r.heldout_perplexity) << '\t'
        << format_probability(r.epochs) << '\n';
  }
}

}  // namespace smoothreg::cli
