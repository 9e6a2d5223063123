#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "grid.hpp"
#include "run_config.hpp"
#include "smoothreg/conditional_lm.hpp"
#include "smoothreg/corpus.hpp"
#include "smoothreg/count_table.hpp"
#include "smoothreg/decompose.hpp"
#include "smoothreg/errors.hpp"
#include "smoothreg/models.hpp"
#include "smoothreg/ngram_eval.hpp"
#include "smoothreg/smoothers.hpp"
#include "smoothreg/training.hpp"
#include "smoothreg/verify.hpp"

namespace smoothreg::cli {

namespace {

struct Extras {
  std::string out;
  std::string metrics;
  std::string config;
  std::string params_list;
  std::string theorem;
  bool all = false;
  int trials = 0;
  double tolerance = -1.0;
  std::vector<int> dims{2, 3, 5};
};

// Writes to `path`, or to `fallback` when the path is empty.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw InputError("cannot write '" + path + "'");
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::string in_out_dir(const RunConfig& c, const std::string& explicit_path, const char* name) {
  if (!explicit_path.empty() || c.out_dir.empty()) return explicit_path;
  std::filesystem::create_directories(c.out_dir);
  return (std::filesystem::path(c.out_dir) / name).string();
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ParameterError(std::string("missing required ") + flag);
}

void report_warnings(const Warnings& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

CountTable load_counts(const RunConfig& c) {
  if (!c.counts_path.empty()) {
    std::ifstream in(c.counts_path);
    if (!in) throw InputError("cannot open '" + c.counts_path + "'");
    return read_count_table(in);
  }
  require(c.corpus_path, "--counts or --corpus");
  return count_ngrams(make_corpus(read_lines(c.corpus_path)), c.order, c.workers);
}

ConditionalLM load_lm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_conditional_lm(in);
}

// Re-keys the stored distributions of `lm` onto `vocab` by symbol spelling.
ConditionalLM remap(const ConditionalLM& lm, const std::shared_ptr<const Vocabulary>& vocab) {
  const auto& from = lm.vocab();
  ConditionalLM out(lm.order(), vocab);
  for (const auto& [h, probs] : lm.table()) {
    History mapped;
    for (SymbolId id : h) mapped.push_back(vocab->parse_rendered(from.render(id)));
    std::vector<double> p(vocab->outcome_count(), 0.0);
    for (std::size_t x = 0; x < probs.size(); ++x) {
      p[vocab->outcome_of(vocab->parse_rendered(from.render_outcome(x)))] = probs[x];
    }
    out.set(mapped, std::move(p));
  }
  out.set_backstop_uniform();
  out.method = lm.method;
  out.params_json = lm.params_json;
  return out;
}

struct Data {
  Corpus train;
  Corpus heldout;
  bool has_heldout = false;
};

// Closed vocabulary over training lines followed by held-out lines.
Data load_data(const RunConfig& c, bool need_heldout) {
  require(c.corpus_path, "--corpus");
  if (need_heldout) require(c.heldout_path, "--heldout");
  auto train_lines = read_lines(c.corpus_path);
  std::vector<std::string> held_lines;
  if (!c.heldout_path.empty()) held_lines = read_lines(c.heldout_path);
  std::vector<std::string> all = train_lines;
  all.insert(all.end(), held_lines.begin(), held_lines.end());
  auto vocab = std::make_shared<const Vocabulary>(build_vocabulary(all));
  Data d;
  d.train = encode_corpus(train_lines, vocab);
  if (d.train.size() == 0) throw InputError("training corpus '" + c.corpus_path + "' has no sequences");
  if (!c.heldout_path.empty()) {
    d.heldout = encode_corpus(held_lines, vocab);
    d.has_heldout = d.heldout.size() > 0;
  }
  return d;
}

int cmd_count(const RunConfig& c, const Extras& x, std::ostream& out) {
  require(c.corpus_path, "--corpus");
  LoadStats stats;
  const auto corpus = make_corpus(read_lines(c.corpus_path), &stats);
  const auto table = count_ngrams(corpus, c.order, c.workers);
  Sink sink(in_out_dir(c, x.out, "counts.tsv"), out);
  write_count_table(sink.get(), table);
  return kExitOk;
}

int cmd_smooth(const RunConfig& c, const Extras& x, std::ostream& out, std::ostream& err) {
  const auto table = load_counts(c);
  const auto spec = SmootherSpec::parse(c.method, c.method_params, table.order());
  Warnings warnings;
  const auto lm = smooth(table, spec, &warnings);
  report_warnings(warnings, err);
  try {
    lm.validate(1e-9);
  } catch (const ValidationError& e) {
    err << "error: smoothed LM failed normalisation: " << e.what() << '\n';
    return kExitInternal;
  }
  Sink sink(in_out_dir(c, x.out, "lm.tsv"), out);
  write_conditional_lm(sink.get(), lm);
  return kExitOk;
}

int cmd_decompose(const RunConfig& c, const Extras& x, std::ostream& out, std::ostream& err) {
  const auto table = load_counts(c);
  ConditionalLM smoothed(table.order(), table.vocab_ptr());
  if (!c.lm_path.empty()) {
    smoothed = remap(load_lm(c.lm_path), table.vocab_ptr());
  } else {
    Warnings warnings;
    smoothed = smooth(table, SmootherSpec::parse(c.method, c.method_params, table.order()), &warnings);
    report_warnings(warnings, err);
  }
  const auto bundle = build_regularizer(empirical_conditional(table), smoothed, table, c.gamma_plus, c.gamma_minus,
                                        parse_sign(c.sign));
  Sink sink(in_out_dir(c, x.out, "decomposition.tsv"), out);
  write_decomposition(sink.get(), bundle, table.vocab());
  return kExitOk;
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig tc;
  tc.objective.kind = parse_objective(c.objective);
  tc.objective.gamma_ls = c.gamma_ls;
  tc.objective.gamma_plus = c.gamma_plus;
  tc.objective.gamma_minus = c.gamma_minus;
  tc.objective.sign = parse_sign(c.sign);
  if (tc.objective.kind == ObjectiveKind::kSmoothedTarget || tc.objective.kind == ObjectiveKind::kSplitRegularizer) {
    tc.objective.smoother = SmootherSpec::parse(c.method, c.method_params, c.order);
  }
  tc.lr = c.effective_lr();
  tc.epochs = c.epochs;
  tc.patience = c.patience;
  tc.seed = c.seed;
  tc.init_scale = c.init_scale;
  tc.validate();
  return tc;
}

int cmd_train(const RunConfig& c, const Extras& x, std::ostream& out) {
  const auto data = load_data(c, false);
  const auto tc = train_config(c);
  const auto table = count_ngrams(data.train, c.order, c.workers);
  std::vector<History> histories;
  for (const auto& [h, row] : table.rows()) histories.push_back(h);
  auto model = make_model(c, data.train.vocab, histories, c.seed);
  CountTable held(c.order, data.train.vocab);
  if (data.has_heldout) held = count_ngrams(data.heldout, c.order);
  const auto result = train(*model, table, tc, nullptr, data.has_heldout ? &held : nullptr);

  const auto model_path = in_out_dir(c, x.out, "model.json");
  if (!model_path.empty()) save_model(*model, model_path);
  const auto metrics_path = in_out_dir(c, x.metrics, "metrics.tsv");
  if (!metrics_path.empty()) {
    Sink sink(metrics_path, out);
    write_metrics(sink.get(), result);
  }
  out << "epochs_run=" << result.epochs_run << " best_epoch=" << result.best_epoch
      << " train_loss=" << format_probability(result.final_train_loss);
  if (data.has_heldout) out << " heldout_perplexity=" << format_probability(result.best_heldout_perplexity);
  out << '\n';
  return kExitOk;
}

int cmd_eval(const RunConfig& c, const Extras& x, std::ostream& out) {
  require(c.corpus_path, "--corpus");
  const auto lines = read_lines(c.corpus_path);
  double ppl = 0.0;
  if (!c.model_path.empty()) {
    const auto model = load_model(c.model_path);
    ppl = model_perplexity(*model, encode_corpus(lines, model->vocab_ptr()));
  } else {
    require(c.lm_path, "--lm or --model");
    const auto lm = load_lm(c.lm_path);
    ppl = perplexity(lm, encode_corpus(lines, lm.vocab_ptr()));
  }
  Sink sink(x.out, out);
  sink.get() << "perplexity\t" << format_probability(ppl) << '\n';
  return kExitOk;
}

int cmd_grid(RunConfig c, const Extras& x, std::ostream& out) {
  if (!x.params_list.empty()) {
    nlohmann::json list;
    try {
      list = nlohmann::json::parse(x.params_list);
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError(std::string("cannot parse --params-list: ") + e.what());
    }
    if (!list.is_array()) throw ParameterError("--params-list must be a JSON array of parameter objects");
    c.method_params_list.clear();
    for (const auto& p : list) c.method_params_list.push_back(p.dump());
  }
  grid_jobs(c);  // cap check before any data is read
  const auto data = load_data(c, true);
  const auto rows = run_grid(c, data.train, data.heldout);
  Sink sink(in_out_dir(c, x.out, "grid.tsv"), out);
  write_grid(sink.get(), rows);
  return kExitOk;
}

int cmd_verify(const RunConfig& c, const Extras& x, std::ostream& out) {
  std::vector<VerificationReport> reports;
  if (x.all || x.theorem.empty()) {
    reports = verify_all(c.seed, x.tolerance);
  } else {
    RandomIdentityOptions identity;
    identity.seed = c.seed;
    if (x.trials > 0) identity.trials = x.trials;
    if (x.tolerance >= 0.0) identity.tolerance = x.tolerance;
    Theorem2Options t2;
    if (x.tolerance >= 0.0) t2.tolerance = x.tolerance;
    const double t3_tol = x.tolerance >= 0.0 ? x.tolerance : 1e-10;
    const int t3_trials = x.trials > 0 ? x.trials : 1000;
    if (x.theorem == "T1") {
      reports.push_back(check_theorem1(identity));
    } else if (x.theorem == "COR") {
      reports.push_back(check_corollary(identity));
    } else if (x.theorem == "COR_CE") {
      reports.push_back(check_corollary_cross_entropy(identity));
    } else if (x.theorem == "T2") {
      reports.push_back(check_theorem2(c.seed, t2));
    } else if (x.theorem == "T3") {
      reports.push_back(check_theorem3(x.dims, t3_trials, c.seed, t3_tol).bracket);
    } else if (x.theorem == "CE_LINEARITY") {
      reports.push_back(check_theorem3(x.dims, t3_trials, c.seed, t3_tol).linearity);
    } else {
      throw ParameterError("unknown theorem '" + x.theorem + "' (expected T1, COR, COR_CE, T2, T3 or CE_LINEARITY)");
    }
  }
  Sink sink(x.out, out);
  bool ok = true;
  for (const auto& r : reports) {
    sink.get() << r.line() << '\n';
    ok = ok && r.passed;
  }
  if (!x.out.empty()) {
    for (const auto& r : reports) out << r.line() << '\n';
  }
  return ok ? kExitOk : kExitVerificationFailed;
}

std::string find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  Extras x;
  try {
    const auto config_path = find_config(args);
    if (!config_path.empty()) c = load_run_config(config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"n-gram smoothing, signed decomposition and regularised training", "smoothreg"};
  app.require_subcommand(1);
  auto shared = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--out", x.out, "Output file (stdout when omitted)");
    sub->add_option("--config", x.config, "JSON run configuration; flags override its keys");
    sub->add_option("--out-dir", c.out_dir, "Directory for default-named outputs");
  };
  auto order = [&](CLI::App* sub) {
    sub->add_option("--order", c.order, "n-gram order")->check(CLI::Range(1, 64));
  };
  auto method = [&](CLI::App* sub) {
    sub->add_option("--method", c.method, "addlambda | gt | sgt | jm | katz | ken");
    sub->add_option("--params", c.method_params, "Method parameters as a JSON object");
  };
  auto training = [&](CLI::App* sub) {
    sub->add_option("--objective", c.objective, "mle | label_smoothing | smoothed_target | split_regularizer");
    sub->add_option("--arch", c.architecture, "tabular | feedforward");
    sub->add_option("--sign", c.sign, "signed | additive");
    sub->add_option("--gamma-plus", c.gamma_plus);
    sub->add_option("--gamma-minus", c.gamma_minus);
    sub->add_option("--gamma-ls", c.gamma_ls);
    sub->add_option("--lr", c.lr, "Learning rate (0 = architecture default)");
    sub->add_option("--epochs", c.epochs);
    sub->add_option("--patience", c.patience);
    sub->add_option("--embed-dim", c.embed_dim);
    sub->add_option("--hidden-dim", c.hidden_dim);
    sub->add_option("--init-scale", c.init_scale);
    sub->add_option("--heldout", c.heldout_path, "Held-out corpus");
  };

  auto* count = app.add_subcommand("count", "Count n-grams of a corpus");
  shared(count);
  order(count);
  count->add_option("--corpus", c.corpus_path, "One sequence per line");
  count->add_option("--workers", c.workers)->check(CLI::Range(1, 256));

  auto* smooth_cmd = app.add_subcommand("smooth", "Build a smoothed conditional LM");
  shared(smooth_cmd);
  order(smooth_cmd);
  method(smooth_cmd);
  smooth_cmd->add_option("--counts", c.counts_path, "Count table TSV");
  smooth_cmd->add_option("--corpus", c.corpus_path, "Corpus to count instead of --counts");

  auto* decompose = app.add_subcommand("decompose", "Signed decomposition of a smoothed LM");
  shared(decompose);
  order(decompose);
  method(decompose);
  decompose->add_option("--counts", c.counts_path);
  decompose->add_option("--corpus", c.corpus_path);
  decompose->add_option("--lm", c.lm_path, "Smoothed LM TSV (otherwise built from --method)");
  decompose->add_option("--gamma-plus", c.gamma_plus);
  decompose->add_option("--gamma-minus", c.gamma_minus);
  decompose->add_option("--sign", c.sign);

  auto* train_cmd = app.add_subcommand("train", "Train a neural or tabular LM");
  shared(train_cmd);
  order(train_cmd);
  method(train_cmd);
  training(train_cmd);
  train_cmd->add_option("--corpus", c.corpus_path);
  train_cmd->add_option("--metrics", x.metrics, "Per-epoch metrics TSV");

  auto* eval = app.add_subcommand("eval", "Perplexity of an LM or model on a corpus");
  shared(eval);
  eval->add_option("--corpus", c.corpus_path);
  eval->add_option("--lm", c.lm_path);
  eval->add_option("--model", c.model_path);

  auto* grid = app.add_subcommand("grid", "Grid search over regulariser weights");
  shared(grid);
  order(grid);
  method(grid);
  training(grid);
  grid->add_option("--corpus", c.corpus_path);
  grid->add_option("--gamma-plus-list", c.gamma_plus_list)->delimiter(',');
  grid->add_option("--gamma-minus-list", c.gamma_minus_list)->delimiter(',');
  grid->add_option("--params-list", x.params_list, "JSON array of method parameter objects");
  grid->add_option("--seeds", c.seeds, "Seeds averaged per row")->delimiter(',');
  grid->add_option("--cap", c.cap, "Maximum number of grid rows");
  grid->add_option("--workers", c.workers)->check(CLI::Range(1, 256));
  grid->add_flag("--baseline", c.baseline, "Add an unregularised MLE row");

  auto* verify = app.add_subcommand("verify", "Numerical checks of the smoothing identities");
  shared(verify);
  verify->add_flag("--all", x.all, "Run T1, COR, T2, T3 and CE_LINEARITY");
  verify->add_option("--theorem", x.theorem, "T1 | COR | COR_CE | T2 | T3 | CE_LINEARITY");
  verify->add_option("--trials", x.trials);
  verify->add_option("--tolerance", x.tolerance, "Override every tolerance");
  verify->add_option("--dims", x.dims, "Simplex dimensions for T3")->delimiter(',');

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*count) return cmd_count(c, x, out);
    if (*smooth_cmd) return cmd_smooth(c, x, out, err);
    if (*decompose) return cmd_decompose(c, x, out, err);
    if (*train_cmd) return cmd_train(c, x, out);
    if (*eval) return cmd_eval(c, x, out);
    if (*grid) return cmd_grid(c, x, out);
    if (*verify) return cmd_verify(c, x, out);
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace smoothreg::cli
