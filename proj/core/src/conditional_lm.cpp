#include "smoothreg/conditional_lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "smoothreg/errors.hpp"

namespace smoothreg {

ConditionalLM::ConditionalLM(int order, std::shared_ptr<const Vocabulary> vocab)
    : order_(order), vocab_(std::move(vocab)) {
  if (order_ < 1) throw ParameterError("n-gram order must be >= 1, got " + std::to_string(order_));
  if (!vocab_) throw ParameterError("conditional LM needs a vocabulary");
  uniform_.assign(outcome_count(), 1.0 / static_cast<double>(outcome_count()));
}

void ConditionalLM::check_history(const History& history) const {
  if (history.size() != static_cast<std::size_t>(order_ - 1)) {
    throw ShapeError("history of length " + std::to_string(history.size()) + " for order-" +
                     std::to_string(order_) + " model");
  }
  bool in_prefix = true;
  for (SymbolId id : history) {
    if (id == vocab_->bos_id()) {
      if (!in_prefix) throw ShapeError("BOS inside history '" + vocab_->render_history(history) + "'");
    } else {
      in_prefix = false;
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_->size()) {
        throw ShapeError("invalid symbol id " + std::to_string(id) + " in history");
      }
    }
  }
}

void ConditionalLM::set(const History& history, std::vector<double> probs) {
  check_history(history);
  if (probs.size() != outcome_count()) {
    throw ShapeError("distribution has " + std::to_string(probs.size()) + " entries, expected " +
                     std::to_string(outcome_count()));
  }
  table_[history] = std::move(probs);
}

void ConditionalLM::set_backstop_undefined() {
  backstop_ = Backstop::kUndefined;
  lower_.reset();
}

void ConditionalLM::set_backstop_uniform() {
  backstop_ = Backstop::kUniform;
  lower_.reset();
}

void ConditionalLM::set_backstop_lower(std::shared_ptr<const ConditionalLM> lower) {
  if (!lower || lower->order() != order_ - 1 || lower->outcome_count() != outcome_count()) {
    throw ParameterError("lower-order backstop must have order n-1 and the same alphabet");
  }
  backstop_ = Backstop::kLowerOrder;
  lower_ = std::move(lower);
}

bool ConditionalLM::defines(const History& history) const {
  if (table_.count(history)) return true;
  switch (backstop_) {
    case Backstop::kUndefined:
      return false;
    case Backstop::kUniform:
      return true;
    case Backstop::kLowerOrder:
      return lower_->defines(History(history.begin() + 1, history.end()));
  }
  return false;
}

std::span<const double> ConditionalLM::conditional(const History& history) const {
  auto it = table_.find(history);
  if (it != table_.end()) return it->second;
  check_history(history);
  switch (backstop_) {
    case Backstop::kUndefined:
      throw UndefinedHistoryError("history '" + vocab_->render_history(history) +
                                  "' was never observed");
    case Backstop::kUniform:
      return uniform_;
    case Backstop::kLowerOrder:
      return lower_->conditional(History(history.begin() + 1, history.end()));
  }
  throw InternalError("unhandled backstop");
}

double ConditionalLM::prob(const History& history, std::size_t outcome) const {
  auto dist = conditional(history);
  if (outcome >= dist.size()) throw ShapeError("outcome index out of range");
  return dist[outcome];
}

void ConditionalLM::validate(double tolerance) const {
  for (const auto& [h, probs] : table_) {
    double s = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ValidationError("history '" + vocab_->render_history(h) +
                              "' has a negative or non-finite probability");
      }
      s += p;
    }
    if (std::abs(s - 1.0) > tolerance) {
      throw ValidationError("history '" + vocab_->render_history(h) + "' sums to " +
                            format_probability(s));
    }
  }
  if (lower_) lower_->validate(tolerance);
}

std::string format_probability(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

namespace {

const char* backstop_name(Backstop b) {
  switch (b) {
    case Backstop::kUndefined:
      return "undefined";
    case Backstop::kUniform:
      return "uniform";
    case Backstop::kLowerOrder:
      return "lower";
  }
  return "undefined";
}

}  // namespace

void write_conditional_lm(std::ostream& out, const ConditionalLM& lm) {
  const ConditionalLM* bottom = &lm;
  std::vector<std::tuple<std::string, std::string, double>> rows;
  for (const ConditionalLM* level = &lm; level; level = level->lower_order()) {
    bottom = level;
    for (const auto& [h, probs] : level->table()) {
      const auto rendered = lm.vocab().render_history(h);
      for (std::size_t x = 0; x < probs.size(); ++x) {
        rows.emplace_back(rendered, lm.vocab().render_outcome(x), probs[x]);
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  out << "# method=" << lm.method << " params=" << lm.params_json
      << " backstop=" << backstop_name(bottom->backstop()) << '\n';
  out << "history\tsymbol\tprobability\n";
  for (const auto& [h, x, p] : rows) out << h << '\t' << x << '\t' << format_probability(p) << '\n';
}

std::string conditional_lm_to_string(const ConditionalLM& lm) {
  std::ostringstream os;
  write_conditional_lm(os, lm);
  return os.str();
}

ConditionalLM read_conditional_lm(std::istream& in) {
  std::string line;
  std::string method = "unknown";
  std::string params = "{}";
  std::string backstop = "undefined";
  if (!std::getline(in, line)) throw InputError("empty LM file");
  if (line.rfind("# ", 0) == 0) {
    std::istringstream meta(line.substr(2));
    std::string field;
    while (meta >> field) {
      auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      auto key = field.substr(0, eq);
      auto value = field.substr(eq + 1);
      if (key == "method") method = value;
      if (key == "params") params = value;
      if (key == "backstop") backstop = value;
    }
    if (!std::getline(in, line)) throw InputError("LM file has no column header");
  }
  if (line != "history\tsymbol\tprobability") {
    throw InputError("LM file must have header 'history\\tsymbol\\tprobability'");
  }
  struct Row {
    std::vector<std::string> history;
    std::string symbol;
    double prob;
  };
  std::vector<Row> rows;
  auto vocab = std::make_shared<Vocabulary>();
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw InputError("LM line " + std::to_string(lineno) + ": expected 3 fields");
    Row row{tokenize(line.substr(0, t1)), line.substr(t1 + 1, t2 - t1 - 1), 0.0};
    try {
      row.prob = std::stod(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw InputError("LM line " + std::to_string(lineno) + ": bad probability");
    }
    for (const auto& tok : row.history) {
      if (tok != kBosToken) vocab->add(tok);
    }
    if (row.symbol != kEosToken) vocab->add(row.symbol);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("LM file has no rows");
  std::shared_ptr<const Vocabulary> frozen = vocab;
  std::map<std::size_t, std::map<History, std::vector<double>>> levels;
  for (const auto& row : rows) {
    History h;
    for (const auto& tok : row.history) h.push_back(frozen->parse_rendered(tok));
    auto& dist = levels[h.size()][h];
    if (dist.empty()) dist.assign(frozen->outcome_count(), 0.0);
    dist[frozen->outcome_of(frozen->parse_rendered(row.symbol))] = row.prob;
  }
  const std::size_t top = levels.rbegin()->first;
  const std::size_t low = levels.begin()->first;
  if (levels.size() != top - low + 1) throw InputError("LM backoff chain has a gap");
  std::shared_ptr<ConditionalLM> below;
  for (std::size_t w = low; w <= top; ++w) {
    auto level = std::make_shared<ConditionalLM>(static_cast<int>(w) + 1, frozen);
    for (auto& [h, dist] : levels[w]) level->set(h, std::move(dist));
    if (below) {
      level->set_backstop_lower(below);
    } else if (backstop == "uniform") {
      level->set_backstop_uniform();
    } else {
      level->set_backstop_undefined();
    }
    level->method = method;
    level->params_json = params;
    below = level;
  }
  return *below;
}

}  // namespace smoothreg
