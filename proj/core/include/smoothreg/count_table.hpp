#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "smoothreg/corpus.hpp"

namespace smoothreg {

// Counts of every outcome after one history. `counts` is dense over the
// extended alphabet; histories themselves are stored sparsely.
struct HistoryCounts {
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
};

// n-gram counts of a BOS-padded corpus: #(h x) for every observed history h
// of length n-1 and outcome x, with #(h) the per-history total.
class CountTable {
 public:
  CountTable(int order, std::shared_ptr<const Vocabulary> vocab);

  int order() const { return order_; }
  const Vocabulary& vocab() const { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& vocab_ptr() const { return vocab_; }
  std::size_t outcome_count() const { return vocab_->outcome_count(); }

  const std::map<History, HistoryCounts>& rows() const { return rows_; }
  const HistoryCounts* find(const History& history) const;

  std::int64_t count(const History& history, std::size_t outcome) const;
  std::int64_t history_count(const History& history) const;
  std::int64_t total_tokens() const { return total_tokens_; }
  std::size_t distinct_grams() const;

  void add(const History& history, std::size_t outcome, std::int64_t amount = 1);
  // Commutative in-place sum; orders and vocabularies must match.
  void merge(const CountTable& other);

  // Order n-1 table obtained by dropping the first history symbol. Equals
  // count_ngrams(corpus, n-1) because every position is tallied once per order.
  CountTable marginalize() const;

  bool operator==(const CountTable& other) const;

 private:
  int order_;
  std::shared_ptr<const Vocabulary> vocab_;
  std::map<History, HistoryCounts> rows_;
  std::int64_t total_tokens_ = 0;
};

// Tallies (history, outcome) pairs of the corpus padded with n-1 leading BOS
// symbols. `workers` > 1 counts contiguous shards concurrently and merges them
// in shard order.
CountTable count_ngrams(const Corpus& corpus, int order, int workers = 1);

// r_i: number of distinct grams with count exactly i, for i >= 1.
std::map<std::int64_t, std::int64_t> counts_of_counts(const CountTable& table);

// Tables of every order 1..table.order(); element k-1 has order k.
std::vector<CountTable> count_hierarchy(const CountTable& table);

// TSV with header `history<TAB>symbol<TAB>count`, positive rows only, sorted
// by rendered history then rendered symbol.
void write_count_table(std::ostream& out, const CountTable& table);
std::string count_table_to_string(const CountTable& table);

// Parses the TSV written by write_count_table. The vocabulary is rebuilt in
// first-appearance order of the symbol column; the order is inferred from the
// history width and must agree with `expected_order` when that is positive.
CountTable read_count_table(std::istream& in, int expected_order = 0);

}  // namespace smoothreg
