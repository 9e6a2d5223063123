#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "smoothreg/errors.hpp"
#include "smoothreg/ngram_eval.hpp"
#include "smoothreg/smoothers.hpp"
#include "smoothreg/synthetic.hpp"

using namespace smoothreg;

namespace {

Corpus tiny() { return make_corpus(std::vector<std::string>{"a b", "b a"}); }

std::shared_ptr<const Vocabulary> vocab_of(std::size_t n) {
  std::vector<std::string> syms;
  for (std::size_t i = 0; i < n; ++i) syms.push_back("s" + std::to_string(i));
  return std::make_shared<const Vocabulary>(Vocabulary(syms));
}

// Order-2 table over a vocabulary of `v` symbols holding exactly r[i] grams
// of count i, laid out cell by cell.
CountTable table_with_counts(const std::map<std::int64_t, std::int64_t>& r, std::size_t v) {
  auto vocab = vocab_of(v);
  CountTable t(2, vocab);
  std::size_t cell = 0;
  const std::size_t k = vocab->outcome_count();
  for (const auto& [count, n] : r) {
    for (std::int64_t j = 0; j < n; ++j, ++cell) {
      const auto h = static_cast<SymbolId>(cell / k);
      EXPECT_LT(static_cast<std::size_t>(h), v);
      t.add({h}, cell % k, count);
    }
  }
  return t;
}

void expect_normalized(const ConditionalLM& lm, bool full_support, const std::string& label) {
  for (const ConditionalLM* level = &lm; level; level = level->lower_order()) {
    for (const auto& [h, p] : level->table()) {
      double s = 0.0;
      for (double v : p) {
        EXPECT_GE(v, 0.0) << label;
        if (full_support) EXPECT_GT(v, 0.0) << label << " history " << lm.vocab().render_history(h);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-9) << label;
    }
  }
}

std::vector<SmootherSpec> all_specs(int order) {
  std::vector<double> lambdas;
  for (int i = 0; i < order; ++i) lambdas.push_back(0.5 + 0.1 * i);
  return {
      SmootherSpec::make(SmoothingMethod::kAddLambda, {{"lambda", 0.5}}, order),
      SmootherSpec::make(SmoothingMethod::kGoodTuring, nlohmann::json::object(), order),
      SmootherSpec::make(SmoothingMethod::kSimpleGoodTuring, nlohmann::json::object(), order),
      SmootherSpec::make(SmoothingMethod::kJelinekMercer, {{"lambdas", lambdas}}, order),
      SmootherSpec::make(SmoothingMethod::kKatz, {{"k", 3}}, order),
      SmootherSpec::make(SmoothingMethod::kKneserEssenNey, nlohmann::json::object(), order),
  };
}

}  // namespace

TEST(SmootherSpec, ParsingAndDefaults) {
  EXPECT_EQ(SmootherSpec::parse("ken", "", 2).params_string(), R"({"D":0.75})");
  EXPECT_EQ(SmootherSpec::parse("katz", "{}", 2).params_string(), R"({"k":5})");
  EXPECT_THROW(SmootherSpec::parse("addlambda", R"({"lambda":0})", 2), ParameterError);
  EXPECT_THROW(SmootherSpec::parse("addlambda", R"({"lamda":1})", 2), ParameterError);
  EXPECT_THROW(SmootherSpec::parse("jm", R"({"lambdas":[0.5]})", 2), ParameterError);
  EXPECT_THROW(SmootherSpec::parse("jm", R"({"lambdas":[0.5,1.5]})", 2), ParameterError);
  EXPECT_THROW(SmootherSpec::parse("katz", R"({"k":0})", 2), ParameterError);
  EXPECT_THROW(SmootherSpec::parse("katz", R"({"k":1.5})", 2), ParameterError);
  EXPECT_THROW(SmootherSpec::parse("ken", R"({"D":1})", 2), ParameterError);
  EXPECT_THROW(SmootherSpec::parse("ken", "{}", 1), ParameterError);
  EXPECT_THROW(SmootherSpec::parse("witten", "{}", 2), ParameterError);
  EXPECT_THROW(SmootherSpec::parse("gt", "{not json", 2), ParameterError);
}

TEST(AddLambda, Examples) {
  auto v = vocab_of(2);
  CountTable t(2, v);
  t.add({0}, 0, 2);
  t.add({0}, 2, 1);
  const auto lm = smooth_add_lambda(t, 1.0);
  EXPECT_NEAR(lm.prob({0}, 0), 3.0 / 6, 1e-15);
  EXPECT_NEAR(lm.prob({0}, 1), 1.0 / 6, 1e-15);
  EXPECT_NEAR(lm.prob({0}, 2), 2.0 / 6, 1e-15);
  for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(lm.prob({1}, x), 1.0 / 3, 1e-15);

  CountTable one(1, vocab_of(1));
  one.add({}, 0, 3);
  one.add({}, 1, 1);
  const auto lm1 = smooth_add_lambda(one, 1.0);
  EXPECT_NEAR(lm1.prob({}, 0), 4.0 / 6, 1e-15);
  EXPECT_NEAR(lm1.prob({}, 1), 2.0 / 6, 1e-15);
  EXPECT_THROW(smooth_add_lambda(one, 0.0), ParameterError);
}

TEST(AddLambda, ConvergesToMleAsLambdaVanishes) {
  std::mt19937_64 rng(1);
  const auto c = make_corpus(oracle::random_lines(rng, 4, 6, 20));
  const auto t = count_ngrams(c, 2);
  const auto mle = empirical_conditional(t);
  const auto lm = smooth_add_lambda(t, 1e-8);
  for (const auto& [h, p] : mle.table()) {
    for (std::size_t x = 0; x < p.size(); ++x) EXPECT_NEAR(lm.prob(h, x), p[x], 1e-6);
  }
}

TEST(GoodTuring, AdjustedCountsShowNullCountDefect) {
  auto v = vocab_of(2);
  CountTable t(2, v);
  t.add({0}, 1, 2);  // ab
  t.add({1}, 0, 1);  // ba
  t.add({0}, 0, 1);  // aa
  const auto gt = good_turing_counts(t);
  EXPECT_DOUBLE_EQ(gt.adjusted.at(1), 1.0);
  EXPECT_DOUBLE_EQ(gt.adjusted.at(2), 0.0);
  // Unseen mass equals r_1 / N.
  EXPECT_NEAR(gt.zero_grams * good_turing_global_probability(gt, 0), 2.0 / 4, 1e-15);
  const auto lm = smooth_good_turing(t);
  EXPECT_DOUBLE_EQ(lm.prob({0}, 1), 0.0);
  expect_normalized(lm, false, "gt");
}

TEST(GoodTuring, MassLawOnRandomCorpora) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto lines = oracle::random_lines(rng, 5, 8, 30);
    const auto t = count_ngrams(make_corpus(lines), 2);
    // Independent r_i from the brute-force tally.
    std::map<std::int64_t, std::int64_t> r;
    std::int64_t n = 0;
    for (const auto& [key, c] : oracle::ngram_tally(oracle::split_all(lines), 2)) {
      ++r[c];
      n += c;
    }
    const auto gt = good_turing_counts(t);
    for (const auto& [i, ri] : r) {
      double mass = 0.0;
      for (const auto& [h, row] : t.rows()) {
        for (auto c : row.counts) {
          if (c == i) mass += good_turing_global_probability(gt, c);
        }
      }
      const double expected = static_cast<double>(i + 1) * static_cast<double>(r.count(i + 1) ? r[i + 1] : 0) / n;
      EXPECT_NEAR(mass, expected, 1e-12);
    }
  }
}

TEST(SimpleGoodTuring, TwoPointSlope) {
  const auto fit = fit_simple_good_turing({{1, 10}, {2, 5}});
  EXPECT_NEAR(fit.slope, -1.0, 1e-15);
  EXPECT_NEAR(fit.smoothed_r(1.0), 10.0, 1e-12);
}

TEST(SimpleGoodTuring, SlopeAboveMinusOneWarns) {
  Warnings w;
  fit_simple_good_turing({{1, 3}, {2, 3}, {3, 3}}, &w);
  ASSERT_FALSE(w.empty());
  EXPECT_NE(w.front().find("slope"), std::string::npos);
}

TEST(SimpleGoodTuring, TuringBranchAgreesWithGoodTuring) {
  const std::map<std::int64_t, std::int64_t> r{{1, 1000}, {2, 10}, {3, 500}, {4, 1}};
  const auto fit = fit_simple_good_turing(r);
  const auto gt = good_turing_counts(table_with_counts(r, 40));
  ASSERT_TRUE(fit.used_turing.at(1));
  int turing = 0;
  for (const auto& [c, used] : fit.used_turing) {
    if (!used) continue;
    ++turing;
    EXPECT_NEAR(fit.adjusted.at(c), gt.adjusted.at(c), 1e-12) << "count " << c;
  }
  EXPECT_GE(turing, 1);
  EXPECT_FALSE(fit.used_turing.at(4));
}

TEST(SimpleGoodTuring, SingleCountFallsBack) {
  Warnings w;
  const auto lm = smooth_simple_good_turing(count_ngrams(tiny(), 2), &w);
  ASSERT_FALSE(w.empty());
  EXPECT_NE(w.front().find("add-lambda"), std::string::npos);
  const auto ref = smooth_add_lambda(count_ngrams(tiny(), 2), 1e-3);
  for (const auto& [h, p] : ref.table()) {
    for (std::size_t x = 0; x < p.size(); ++x) EXPECT_DOUBLE_EQ(lm.prob(h, x), p[x]);
  }
}

TEST(JelinekMercer, HandRecursion) {
  const auto c = tiny();
  const std::vector<double> lambdas{0.5, 0.5};
  const auto lm = smooth_jelinek_mercer(count_ngrams(c, 2), lambdas);
  const auto& v = *c.vocab;
  EXPECT_NEAR(lm.prob({v.id_of("a")}, v.outcome_of(v.id_of("b"))), 5.0 / 12, 1e-15);
}

TEST(JelinekMercer, DegenerateWeights) {
  std::mt19937_64 rng(6);
  const auto c = make_corpus(oracle::random_lines(rng, 3, 5, 15));
  const auto t = count_ngrams(c, 2);
  const std::vector<double> zero{0.7, 0.0};
  const auto lm0 = smooth_jelinek_mercer(t, zero);
  const std::vector<double> uni{0.7};
  const auto lower = smooth_jelinek_mercer(count_ngrams(c, 1), uni);
  for (const auto& [h, p] : lm0.table()) {
    for (std::size_t x = 0; x < p.size(); ++x) EXPECT_DOUBLE_EQ(p[x], lower.prob({}, x));
  }
  const std::vector<double> one{0.3, 1.0};
  const auto lm1 = smooth_jelinek_mercer(t, one);
  const auto mle = empirical_conditional(t);
  for (const auto& [h, p] : mle.table()) {
    for (std::size_t x = 0; x < p.size(); ++x) EXPECT_NEAR(lm1.prob(h, x), p[x], 1e-15);
  }
}

TEST(JelinekMercer, AffineInTopWeight) {
  std::mt19937_64 rng(7);
  const auto c = make_corpus(oracle::random_lines(rng, 4, 6, 15));
  const auto t = count_ngrams(c, 3);
  auto at = [&](double top) { return smooth_jelinek_mercer(t, std::vector<double>{0.6, 0.4, top}); };
  const auto a = at(0.1), b = at(0.4), m = at(0.25);
  for (const auto& [h, p] : m.table()) {
    for (std::size_t x = 0; x < p.size(); ++x) EXPECT_NEAR(p[x], 0.5 * (a.prob(h, x) + b.prob(h, x)), 1e-14);
  }
}

TEST(JelinekMercer, UnseenHistoryUsesLowerOrder) {
  const auto c = tiny();
  const auto lm = smooth_jelinek_mercer(count_ngrams(c, 3), std::vector<double>{0.5, 0.5, 0.5});
  const auto& v = *c.vocab;
  const History unseen{v.id_of("a"), v.id_of("a")};
  const History suffix{v.id_of("a")};
  ASSERT_FALSE(lm.stores(unseen));
  ASSERT_NE(lm.lower_order(), nullptr);
  for (std::size_t x = 0; x < 3; ++x) EXPECT_DOUBLE_EQ(lm.prob(unseen, x), lm.lower_order()->prob(suffix, x));
}

TEST(Katz, DiscountFormula) {
  auto d = katz_discounts({{1, 10}, {2, 4}, {3, 2}}, 2);
  ASSERT_TRUE(d.well_defined);
  EXPECT_NEAR(d.discount.at(1), 0.5, 1e-15);
  EXPECT_NEAR(d.discount.at(2), 0.375, 1e-15);

  // r_{k+1} = 0 leaves the pure Good-Turing ratio c*/c.
  d = katz_discounts({{1, 4}, {2, 2}, {3, 1}}, 5);
  EXPECT_NEAR(d.discount.at(1), 1.0, 1e-15);
  EXPECT_NEAR(d.discount.at(2), 0.75, 1e-15);
  EXPECT_NEAR(d.discount.at(3), 0.0, 1e-15);
}

TEST(Katz, ClampsOutOfRangeDiscounts) {
  Warnings w;
  const auto d = katz_discounts({{1, 1}, {2, 2}}, 5, &w);
  EXPECT_DOUBLE_EQ(d.discount.at(1), 1.0);  // c*/c = 4
  EXPECT_DOUBLE_EQ(d.discount.at(2), 0.0);
  EXPECT_FALSE(w.empty());
}

TEST(Katz, UndefinedDiscountNamesK) {
  const auto t = table_with_counts({{1, 2}, {2, 5}}, 3);
  try {
    smooth_katz(t, 1);
    FAIL();
  } catch (const ConfigurationError& e) {
    EXPECT_NE(std::string(e.what()).find("k=1"), std::string::npos);
  }
}

TEST(Katz, CountsAboveKAreKeptRaw) {
  ZipfBigramConfig cfg;
  cfg.vocab_size = 50;
  cfg.sequences = 300;
  const auto c = make_corpus(zipf_bigram_lines(cfg));
  const auto t = count_ngrams(c, 2);
  const int k = 2;
  const auto lm = smooth_katz(t, k);
  int checked = 0;
  for (const auto& [h, row] : t.rows()) {
    for (std::size_t x = 0; x < row.counts.size(); ++x) {
      if (row.counts[x] > k) {
        EXPECT_NEAR(lm.prob(h, x), static_cast<double>(row.counts[x]) / row.total, 1e-12);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 0);
  expect_normalized(lm, true, "katz");
}

TEST(KneserEssenNey, TypeCounts) {
  const auto c = tiny();
  const auto types = build_type_counts(count_ngrams(c, 2));
  const auto& v = *c.vocab;
  EXPECT_EQ(types.left_marginal[v.outcome_of(v.id_of("a"))], 2);
  EXPECT_EQ(types.right_marginal.at({v.id_of("a")}), 2);
  EXPECT_EQ(types.grand_total, 6);
}

TEST(KneserEssenNey, HandRecursion) {
  const auto c = tiny();
  const auto lm = smooth_kneser_essen_ney(count_ngrams(c, 2), 0.5);
  const auto& v = *c.vocab;
  EXPECT_NEAR(lm.prob({v.id_of("a")}, v.outcome_of(v.id_of("b"))), 0.25 + 0.5 * 2 * (2.0 / 6) / 2, 1e-15);
  expect_normalized(lm, true, "ken");
}

TEST(KneserEssenNey, SmallDiscountApproachesMle) {
  std::mt19937_64 rng(13);
  const auto c = make_corpus(oracle::random_lines(rng, 4, 6, 25));
  const auto t = count_ngrams(c, 2);
  const auto lm = smooth_kneser_essen_ney(t, 1e-9);
  const auto mle = empirical_conditional(t);
  for (const auto& [h, p] : mle.table()) {
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (p[x] > 0) EXPECT_NEAR(lm.prob(h, x), p[x], 1e-8);
    }
  }
}

TEST(KneserEssenNey, ContinuationUnigramDiscountsBoundWords) {
  std::vector<std::string> lines;
  for (int i = 0; i < 10; ++i) lines.push_back("s f");
  for (const char* l : {"a b c", "b c a", "c a b", "a c b", "b a c", "c b a"}) lines.push_back(l);
  const auto c = make_corpus(lines);
  const auto t = count_ngrams(c, 2);
  const auto lm = smooth_kneser_essen_ney(t);
  const ConditionalLM* uni = lm.lower_order();
  ASSERT_NE(uni, nullptr);
  ASSERT_EQ(uni->order(), 1);
  const auto f = c.vocab->outcome_of(c.vocab->id_of("f"));
  const double mle = empirical_conditional(count_ngrams(c, 1)).prob({}, f);
  EXPECT_LT(uni->prob({}, f), mle);
  double s = 0.0;
  for (double p : uni->conditional({})) s += p;
  EXPECT_EQ(s, 1.0);
}

TEST(Smoothers, NormalizationAndSupportOnSyntheticCorpora) {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    ZipfBigramConfig cfg;
    // Small vocabularies saturate the bigram table and leave Katz without singletons.
    cfg.vocab_size = 50;
    cfg.sequences = 300;
    cfg.seed = seed;
    const auto c = make_corpus(zipf_bigram_lines(cfg));
    for (int order : {2, 3}) {
      const auto t = count_ngrams(c, order);
      for (const auto& spec : all_specs(order)) {
        Warnings w;
        const auto lm = smooth(t, spec, &w);
        EXPECT_NO_THROW(lm.validate(1e-9)) << spec.name();
        expect_normalized(lm, spec.method != SmoothingMethod::kGoodTuring, spec.name());
        EXPECT_EQ(lm.method, spec.name());
      }
    }
  }
}
