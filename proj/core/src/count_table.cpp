#include "smoothreg/count_table.hpp"

#include <algorithm>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "smoothreg/errors.hpp"

namespace smoothreg {

CountTable::CountTable(int order, std::shared_ptr<const Vocabulary> vocab)
    : order_(order), vocab_(std::move(vocab)) {
  if (order_ < 1) throw ParameterError("n-gram order must be >= 1, got " + std::to_string(order_));
  if (!vocab_) throw ParameterError("count table needs a vocabulary");
}

const HistoryCounts* CountTable::find(const History& history) const {
  auto it = rows_.find(history);
  return it == rows_.end() ? nullptr : &it->second;
}

std::int64_t CountTable::count(const History& history, std::size_t outcome) const {
  const auto* row = find(history);
  return row ? row->counts.at(outcome) : 0;
}

std::int64_t CountTable::history_count(const History& history) const {
  const auto* row = find(history);
  return row ? row->total : 0;
}

std::size_t CountTable::distinct_grams() const {
  std::size_t n = 0;
  for (const auto& [h, row] : rows_) {
    n += static_cast<std::size_t>(
        std::count_if(row.counts.begin(), row.counts.end(), [](auto c) { return c > 0; }));
  }
  return n;
}

void CountTable::add(const History& history, std::size_t outcome, std::int64_t amount) {
  if (history.size() != static_cast<std::size_t>(order_ - 1)) {
    throw ShapeError("history length " + std::to_string(history.size()) + " for order " +
                     std::to_string(order_));
  }
  if (outcome >= outcome_count()) throw ShapeError("outcome index out of range");
  auto& row = rows_[history];
  if (row.counts.empty()) row.counts.assign(outcome_count(), 0);
  row.counts[outcome] += amount;
  row.total += amount;
  total_tokens_ += amount;
}

void CountTable::merge(const CountTable& other) {
  if (other.order_ != order_ || other.outcome_count() != outcome_count()) {
    throw ShapeError("cannot merge count tables of different shape");
  }
  for (const auto& [h, row] : other.rows_) {
    auto& mine = rows_[h];
    if (mine.counts.empty()) mine.counts.assign(outcome_count(), 0);
    for (std::size_t x = 0; x < row.counts.size(); ++x) mine.counts[x] += row.counts[x];
    mine.total += row.total;
  }
  total_tokens_ += other.total_tokens_;
}

CountTable CountTable::marginalize() const {
  if (order_ <= 1) throw ParameterError("cannot marginalize a unigram table");
  CountTable lower(order_ - 1, vocab_);
  for (const auto& [h, row] : rows_) {
    History suffix(h.begin() + 1, h.end());
    auto& dst = lower.rows_[suffix];
    if (dst.counts.empty()) dst.counts.assign(outcome_count(), 0);
    for (std::size_t x = 0; x < row.counts.size(); ++x) dst.counts[x] += row.counts[x];
    dst.total += row.total;
  }
  lower.total_tokens_ = total_tokens_;
  return lower;
}

bool CountTable::operator==(const CountTable& other) const {
  if (order_ != other.order_ || total_tokens_ != other.total_tokens_ ||
      rows_.size() != other.rows_.size()) {
    return false;
  }
  auto a = rows_.begin();
  auto b = other.rows_.begin();
  for (; a != rows_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.counts != b->second.counts) return false;
  }
  return true;
}

namespace {

void count_range(const Corpus& corpus, std::size_t begin, std::size_t end, CountTable& table) {
  const auto& vocab = table.vocab();
  const auto width = static_cast<std::size_t>(table.order() - 1);
  History history(width, vocab.bos_id());
  for (std::size_t m = begin; m < end; ++m) {
    const auto& seq = corpus.sequences[m];
    std::fill(history.begin(), history.end(), vocab.bos_id());
    for (std::size_t t = 0; t <= seq.size(); ++t) {
      const std::size_t outcome = t < seq.size() ? vocab.outcome_of(seq[t]) : vocab.eos_outcome();
      table.add(history, outcome);
      if (width > 0 && t < seq.size()) {
        std::rotate(history.begin(), history.begin() + 1, history.end());
        history.back() = seq[t];
      }
    }
  }
}

}  // namespace

CountTable count_ngrams(const Corpus& corpus, int order, int workers) {
  if (order < 1) throw ParameterError("n-gram order must be >= 1, got " + std::to_string(order));
  CountTable table(order, corpus.vocab);
  const std::size_t m = corpus.size();
  const auto shards = static_cast<std::size_t>(std::clamp<int>(workers, 1, 64));
  if (shards == 1 || m < 2 * shards) {
    count_range(corpus, 0, m, table);
    return table;
  }
  std::vector<std::future<CountTable>> parts;
  for (std::size_t s = 0; s < shards; ++s) {
    const std::size_t b = m * s / shards;
    const std::size_t e = m * (s + 1) / shards;
    parts.push_back(std::async(std::launch::async, [&corpus, order, b, e] {
      CountTable part(order, corpus.vocab);
      count_range(corpus, b, e, part);
      return part;
    }));
  }
  for (auto& f : parts) table.merge(f.get());
  return table;
}

std::map<std::int64_t, std::int64_t> counts_of_counts(const CountTable& table) {
  std::map<std::int64_t, std::int64_t> r;
  for (const auto& [h, row] : table.rows()) {
    for (auto c : row.counts) {
      if (c > 0) ++r[c];
    }
  }
  return r;
}

std::vector<CountTable> count_hierarchy(const CountTable& table) {
  std::vector<CountTable> levels;
  levels.reserve(static_cast<std::size_t>(table.order()));
  levels.push_back(table);
  while (levels.back().order() > 1) levels.push_back(levels.back().marginalize());
  std::reverse(levels.begin(), levels.end());
  return levels;
}

void write_count_table(std::ostream& out, const CountTable& table) {
  const auto& vocab = table.vocab();
  std::vector<std::tuple<std::string, std::string, std::int64_t>> rows;
  for (const auto& [h, row] : table.rows()) {
    const auto rendered = vocab.render_history(h);
    for (std::size_t x = 0; x < row.counts.size(); ++x) {
      if (row.counts[x] > 0) rows.emplace_back(rendered, vocab.render_outcome(x), row.counts[x]);
    }
  }
  std::sort(rows.begin(), rows.end());
  out << "history\tsymbol\tcount\n";
  for (const auto& [h, x, c] : rows) out << h << '\t' << x << '\t' << c << '\n';
}

std::string count_table_to_string(const CountTable& table) {
  std::ostringstream os;
  write_count_table(os, table);
  return os.str();
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
    fields.back().pop_back();
  }
  return fields;
}

}  // namespace

CountTable read_count_table(std::istream& in, int expected_order) {
  std::string line;
  if (!std::getline(in, line) || split_tabs(line) != std::vector<std::string>{"history", "symbol", "count"}) {
    throw InputError("count table must start with header 'history\\tsymbol\\tcount'");
  }
  struct Row {
    std::vector<std::string> history;
    std::string symbol;
    std::int64_t count;
  };
  std::vector<Row> rows;
  auto vocab = std::make_shared<Vocabulary>();
  int order = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != 3) throw InputError("count table line " + std::to_string(lineno) + ": expected 3 fields");
    Row row{tokenize(f[0]), f[1], 0};
    try {
      std::size_t used = 0;
      row.count = std::stoll(f[2], &used);
      if (used != f[2].size() || row.count <= 0) throw std::invalid_argument("count");
    } catch (const std::exception&) {
      throw InputError("count table line " + std::to_string(lineno) + ": bad count '" + f[2] + "'");
    }
    const int row_order = static_cast<int>(row.history.size()) + 1;
    if (order == 0) order = row_order;
    if (row_order != order) {
      throw InputError("count table line " + std::to_string(lineno) + ": inconsistent history width");
    }
    for (const auto& tok : row.history) {
      if (tok != kBosToken) vocab->add(tok);
    }
    if (row.symbol != kEosToken) vocab->add(row.symbol);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("count table has no rows");
  if (expected_order > 0 && expected_order != order) {
    throw InputError("count table has order " + std::to_string(order) + ", expected " +
                     std::to_string(expected_order));
  }
  std::shared_ptr<const Vocabulary> frozen = vocab;
  CountTable table(order, frozen);
  for (const auto& row : rows) {
    History h;
    for (const auto& tok : row.history) h.push_back(frozen->parse_rendered(tok));
    table.add(h, frozen->outcome_of(frozen->parse_rendered(row.symbol)), row.count);
  }
  return table;
}

}  // namespace smoothreg
