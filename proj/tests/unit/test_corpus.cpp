#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "smoothreg/corpus.hpp"
#include "smoothreg/count_table.hpp"
#include "smoothreg/errors.hpp"

using namespace smoothreg;

namespace {

Corpus tiny() { return make_corpus(std::vector<std::string>{"a b", "b a"}); }

Sequence ids(const Corpus& c, std::initializer_list<const char*> tokens) {
  Sequence s;
  for (auto t : tokens) s.push_back(c.vocab->id_of(t));
  return s;
}

}  // namespace

TEST(Vocabulary, FirstAppearanceOrderAndSentinels) {
  std::vector<std::string> lines{"a b", "b a"};
  const auto v = build_vocabulary(lines);
  ASSERT_EQ(v.symbols(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(v.bos_id(), 2);
  EXPECT_EQ(v.eos_id(), 3);
  EXPECT_EQ(v.id_of("b"), 1);
}

TEST(Vocabulary, SingletonAndDedup) {
  std::vector<std::string> one{"x"};
  EXPECT_EQ(build_vocabulary(one).symbols(), std::vector<std::string>{"x"});
  std::vector<std::string> rep{"a a a"};
  EXPECT_EQ(build_vocabulary(rep).symbols(), std::vector<std::string>{"a"});
}

TEST(Vocabulary, EmptyCorpusRejected) {
  std::vector<std::string> blank{"", "   ", "\t"};
  try {
    build_vocabulary(blank);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("empty corpus"), std::string::npos);
  }
}

TEST(Vocabulary, RenderRoundTrip) {
  const auto c = tiny();
  const auto& v = *c.vocab;
  History h{v.bos_id(), v.id_of("a")};
  EXPECT_EQ(v.render_history(h), "<bos> a");
  EXPECT_EQ(v.parse_history("<bos> a"), h);
  EXPECT_EQ(v.render_outcome(v.eos_outcome()), "</s>");
  EXPECT_TRUE(v.parse_history("").empty());
}

TEST(Corpus, BlankLinesSkippedAndCounted) {
  LoadStats stats;
  const auto c = make_corpus(std::vector<std::string>{"a", "", "  ", "b a\r"}, &stats);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(stats.skipped_empty_lines, 2u);
  EXPECT_EQ(c.emission_count(), 5);
}

TEST(Corpus, UnknownTokenNamesTokenAndLine) {
  auto vocab = std::make_shared<const Vocabulary>(build_vocabulary(std::vector<std::string>{"a"}));
  try {
    encode_corpus(std::vector<std::string>{"a", "a z"}, vocab);
    FAIL();
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'z'"), std::string::npos);
    EXPECT_NE(msg.find("line 2"), std::string::npos);
  }
}

TEST(CountSubstrings, TinyExamples) {
  const auto c = tiny();
  EXPECT_EQ(count_substrings(c, ids(c, {"a"}), false), 2);
  EXPECT_EQ(count_substrings(c, ids(c, {"a", "b"}), false), 1);
  EXPECT_EQ(count_substrings(c, ids(c, {"a"}), true), 1);
  EXPECT_EQ(count_substrings(c, Sequence{}, true), 2);
  EXPECT_EQ(count_substrings(c, Sequence{}, false), 6);
}

TEST(CountSubstrings, MatchesBruteForceOnRandomCorpora) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const auto lines = oracle::random_lines(rng, 3, 6, 1 + static_cast<int>(rng() % 5));
    const auto corpus = make_corpus(lines);
    const auto strings = oracle::split_all(lines);
    const auto& syms = corpus.vocab->symbols();
    // Every query of length <= 3 over the observed symbols.
    std::vector<std::vector<std::string>> queries{{}};
    for (int len = 1; len <= 3; ++len) {
      std::vector<std::vector<std::string>> next;
      for (const auto& q : queries) {
        if (static_cast<int>(q.size()) != len - 1) continue;
        for (const auto& s : syms) {
          auto e = q;
          e.push_back(s);
          next.push_back(e);
        }
      }
      queries.insert(queries.end(), next.begin(), next.end());
    }
    for (const auto& q : queries) {
      Sequence encoded;
      for (const auto& t : q) encoded.push_back(corpus.vocab->id_of(t));
      for (bool eos : {false, true}) {
        ASSERT_EQ(count_substrings(corpus, encoded, eos), oracle::count_substring(strings, q, eos));
      }
      if (!q.empty()) {
        Sequence shorter(encoded.begin(), encoded.end() - 1);
        EXPECT_LE(count_substrings(corpus, encoded, false), count_substrings(corpus, shorter, false));
      }
    }
  }
}

TEST(CountNgrams, BigramTiny) {
  const auto c = tiny();
  const auto t = count_ngrams(c, 2);
  const auto& v = *c.vocab;
  const SymbolId a = v.id_of("a"), b = v.id_of("b"), bos = v.bos_id();
  const auto eos = v.eos_outcome();
  EXPECT_EQ(t.count({bos}, v.outcome_of(a)), 1);
  EXPECT_EQ(t.count({bos}, v.outcome_of(b)), 1);
  EXPECT_EQ(t.count({a}, v.outcome_of(b)), 1);
  EXPECT_EQ(t.count({b}, v.outcome_of(a)), 1);
  EXPECT_EQ(t.count({a}, eos), 1);
  EXPECT_EQ(t.count({b}, eos), 1);
  EXPECT_EQ(t.history_count({bos}), 2);
  EXPECT_EQ(t.distinct_grams(), 6u);
  const auto r = counts_of_counts(t);
  EXPECT_EQ(r, (std::map<std::int64_t, std::int64_t>{{1, 6}}));
}

TEST(CountNgrams, UnigramAndTrigramPadding) {
  const auto c = tiny();
  EXPECT_EQ(count_ngrams(c, 1).history_count({}), 6);
  const auto one = make_corpus(std::vector<std::string>{"a"});
  const auto& v = *one.vocab;
  const auto t = count_ngrams(one, 3);
  EXPECT_EQ(t.count({v.bos_id(), v.bos_id()}, 0), 1);
  EXPECT_EQ(t.count({v.bos_id(), 0}, v.eos_outcome()), 1);
}

TEST(CountNgrams, OrderZeroRejected) { EXPECT_THROW(count_ngrams(tiny(), 0), ParameterError); }

TEST(CountNgrams, MatchesTallyAndInvariants) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto lines = oracle::random_lines(rng, 4, 7, 1 + static_cast<int>(rng() % 6));
    const auto corpus = make_corpus(lines);
    const auto strings = oracle::split_all(lines);
    for (int n = 1; n <= 4; ++n) {
      const auto t = count_ngrams(corpus, n);
      const auto tally = oracle::ngram_tally(strings, n);
      std::size_t grams = 0;
      std::int64_t total = 0;
      for (const auto& [h, row] : t.rows()) {
        std::int64_t s = 0;
        for (std::size_t x = 0; x < row.counts.size(); ++x) {
          s += row.counts[x];
          if (row.counts[x] == 0) continue;
          ++grams;
          std::vector<std::string> hs;
          for (auto id : h) hs.push_back(corpus.vocab->render(id));
          ASSERT_EQ(row.counts[x], tally.at({hs, corpus.vocab->render_outcome(x)}));
        }
        EXPECT_EQ(s, row.total);
        total += row.total;
      }
      EXPECT_EQ(grams, tally.size());
      EXPECT_EQ(total, corpus.emission_count());
      EXPECT_EQ(t.total_tokens(), corpus.emission_count());
      std::int64_t weighted = 0;
      for (const auto& [i, ri] : counts_of_counts(t)) weighted += i * ri;
      EXPECT_EQ(weighted, t.total_tokens());
      if (n > 1) EXPECT_TRUE(t.marginalize() == count_ngrams(corpus, n - 1));
    }
  }
}

TEST(CountNgrams, ShardedCountingMatchesSerial) {
  std::mt19937_64 rng(9);
  const auto corpus = make_corpus(oracle::random_lines(rng, 5, 9, 40));
  const auto serial = count_ngrams(corpus, 3, 1);
  for (int w : {2, 3, 8, 64}) EXPECT_TRUE(count_ngrams(corpus, 3, w) == serial);
}

TEST(CountTableIo, RoundTripIsByteIdentical) {
  std::mt19937_64 rng(3);
  const auto corpus = make_corpus(oracle::random_lines(rng, 4, 6, 12));
  for (int n : {1, 2, 3}) {
    const auto text = count_table_to_string(count_ngrams(corpus, n));
    std::istringstream in(text);
    const auto back = read_count_table(in, n);
    EXPECT_EQ(count_table_to_string(back), text);
  }
}

TEST(CountTableIo, TinyExport) {
  EXPECT_EQ(count_table_to_string(count_ngrams(tiny(), 2)),
            "history\tsymbol\tcount\n<bos>\ta\t1\n<bos>\tb\t1\na\t</s>\t1\na\tb\t1\nb\t</s>\t1\nb\ta\t1\n");
}

TEST(CountTableIo, MalformedInputRejected) {
  std::istringstream bad("history\tsymbol\tcount\na\tb\tx\n");
  EXPECT_THROW(read_count_table(bad), InputError);
  std::istringstream header("nope\n");
  EXPECT_THROW(read_count_table(header), InputError);
}
