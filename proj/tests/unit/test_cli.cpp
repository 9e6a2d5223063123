#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "oracles.hpp"
#include "smoothreg/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = smoothreg::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = oracle::temp_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
    tiny_ = oracle::write_temp(dir_ / "tiny.txt", {"a b", "b a"});
  }
  std::string path(const char* name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::string tiny_;
};

}  // namespace

TEST_F(Cli, CountWritesSixRows) {
  const auto r = run({"count", "--corpus", tiny_, "--order", "2", "--out", path("c.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = oracle::read_file(path("c.tsv"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
}

TEST_F(Cli, CountErrors) {
  EXPECT_EQ(run({"count", "--corpus", tiny_, "--order", "0"}).code, 2);
  const auto missing = run({"count", "--corpus", path("nope.txt")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("nope.txt"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, CountRoundTripIsByteIdentical) {
  ASSERT_EQ(run({"count", "--corpus", tiny_, "--order", "3", "--out", path("c.tsv")}).code, 0);
  const auto first = oracle::read_file(path("c.tsv"));
  const auto r = run({"smooth", "--counts", path("c.tsv"), "--method", "addlambda", "--params", R"({"lambda":1})"});
  ASSERT_EQ(r.code, 0);
  ASSERT_EQ(run({"count", "--corpus", tiny_, "--order", "3", "--out", path("c2.tsv")}).code, 0);
  EXPECT_EQ(oracle::read_file(path("c2.tsv")), first);
}

TEST_F(Cli, SmoothAddLambdaMatchesClosedForm) {
  ASSERT_EQ(run({"count", "--corpus", tiny_, "--order", "2", "--out", path("c.tsv")}).code, 0);
  const auto r = run({"smooth", "--counts", path("c.tsv"), "--method", "addlambda", "--params", R"({"lambda":1.0})"});
  ASSERT_EQ(r.code, 0) << r.err;
  // (1 + 1) / (2 + 3) for every observed bigram, 1/5 for the rest.
  EXPECT_NE(r.out.find("# method=addlambda params={\"lambda\":1.0}"), std::string::npos);
  EXPECT_NE(r.out.find("a\tb\t0.4\n"), std::string::npos);
  EXPECT_NE(r.out.find("a\ta\t0.2\n"), std::string::npos);
}

TEST_F(Cli, SmoothJmMatchesHandRecursion) {
  const auto r = run({"smooth", "--corpus", tiny_, "--method", "jm", "--params", R"({"lambdas":[0.5,0.5]})"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("a\tb\t0.416666666667\n"), std::string::npos);
}

TEST_F(Cli, SmoothKenEchoesDefaultDiscount) {
  const auto r = run({"smooth", "--corpus", tiny_, "--method", "ken"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("# method=ken params={\"D\":0.75}", 0), 0u);
}

TEST_F(Cli, SmoothErrors) {
  EXPECT_EQ(run({"smooth", "--corpus", tiny_, "--method", "wb"}).code, 2);
  EXPECT_EQ(run({"smooth", "--corpus", tiny_, "--method", "addlambda", "--params", R"({"lambda":-1})"}).code, 2);
  // No singletons, so Katz discounts are undefined.
  const auto doubled = oracle::write_temp(dir_ / "doubled.txt", {"a", "a"});
  EXPECT_EQ(run({"smooth", "--corpus", doubled, "--method", "katz", "--params", R"({"k":1})"}).code, 2);
}

TEST_F(Cli, DecomposeFromMethodAndFromFile) {
  const auto a = run({"decompose", "--corpus", tiny_, "--method", "addlambda", "--params", R"({"lambda":1})"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("<bos>\t</s>\t1\t0\t0.2\t0.2"), std::string::npos);
  ASSERT_EQ(run({"smooth", "--corpus", tiny_, "--method", "addlambda", "--params", R"({"lambda":1})", "--out",
                 path("lm.tsv")})
                .code,
            0);
  const auto b = run({"decompose", "--corpus", tiny_, "--lm", path("lm.tsv")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, TrainThenEval) {
  const auto r = run({"train", "--corpus", tiny_, "--heldout", tiny_, "--arch", "tabular", "--epochs", "30", "--out",
                      path("m.json"), "--metrics", path("metrics.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("heldout_perplexity="), std::string::npos);
  const auto e = run({"eval", "--corpus", tiny_, "--model", path("m.json")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(e.out.rfind("perplexity\t", 0), 0u);
  const auto metrics = oracle::read_file(path("metrics.tsv"));
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 31);
}

TEST_F(Cli, EvalRejectsUnknownTokens) {
  ASSERT_EQ(run({"smooth", "--corpus", tiny_, "--method", "gt", "--out", path("lm.tsv")}).code, 0);
  const auto oov = oracle::write_temp(dir_ / "oov.txt", {"a c"});
  const auto r = run({"eval", "--corpus", oov, "--lm", path("lm.tsv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'c'"), std::string::npos);
}

TEST_F(Cli, TrainObjectivesAndBadValues) {
  for (const char* obj : {"mle", "label_smoothing", "smoothed_target", "split_regularizer"}) {
    const auto r = run({"train", "--corpus", tiny_, "--objective", obj, "--method", "jm", "--params",
                        R"({"lambdas":[1,0.5]})", "--gamma-ls", "0.1", "--gamma-plus", "0.5", "--gamma-minus", "0.5",
                        "--epochs", "3"});
    EXPECT_EQ(r.code, 0) << obj << ": " << r.err;
  }
  EXPECT_EQ(run({"train", "--corpus", tiny_, "--objective", "magic"}).code, 2);
  EXPECT_EQ(run({"train", "--corpus", tiny_, "--arch", "rnn"}).code, 2);
  EXPECT_EQ(run({"train", "--corpus", tiny_, "--epochs", "0"}).code, 2);
}

TEST_F(Cli, GridRowsSortedAndDeterministic) {
  smoothreg::ZipfBigramConfig z;
  z.vocab_size = 8;
  const auto split = smoothreg::zipf_bigram_split(z, 60, 20);
  const auto train = oracle::write_temp(dir_ / "train.txt", split.train);
  const auto held = oracle::write_temp(dir_ / "held.txt", split.heldout);
  const std::vector<std::string> args{"grid",      "--corpus",          train,          "--heldout", held,
                                      "--method",  "jm",                "--params-list", R"([{"lambdas":[1,0.5]}])",
                                      "--gamma-plus-list", "0.1,0.5",   "--gamma-minus-list", "0.1,0.5",
                                      "--epochs",  "20",                "--workers",     "3"};
  auto a = args;
  a.insert(a.end(), {"--out", path("g1.tsv")});
  auto b = args;
  b.insert(b.end(), {"--out", path("g2.tsv")});
  b[b.size() - 3] = "1";
  const auto ra = run(a);
  ASSERT_EQ(ra.code, 0) << ra.err;
  const auto rb = run(b);
  ASSERT_EQ(rb.code, 0) << rb.err;
  const auto text = oracle::read_file(path("g1.tsv"));
  EXPECT_EQ(text, oracle::read_file(path("g2.tsv")));
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index\tobjective\tmethod\tparams\tgamma_plus\tgamma_minus\ttrain_loss\theldout_perplexity\tepochs");
  std::vector<double> ppl;
  while (std::getline(in, line)) {
    const auto cols = oracle::split(line);
    ASSERT_EQ(cols.size(), 9u);
    ppl.push_back(std::stod(cols[7]));
  }
  ASSERT_EQ(ppl.size(), 4u);
  EXPECT_TRUE(std::is_sorted(ppl.begin(), ppl.end()));

  auto with_baseline = args;
  with_baseline.push_back("--baseline");
  const auto r = run(with_baseline);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 6);
  EXPECT_NE(r.out.find("\tmle\tnone\t{}\t"), std::string::npos);
}

TEST_F(Cli, GridCapExceeded) {
  const auto held = oracle::write_temp(dir_ / "held.txt", {"a"});
  const auto r = run({"grid", "--corpus", tiny_, "--heldout", held, "--method", "addlambda", "--params",
                      R"({"lambda":1})", "--gamma-plus-list", "0,0.1,0.2,0.3", "--gamma-minus-list", "0,0.1,0.2",
                      "--cap", "10"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--cap"), std::string::npos);
}

TEST_F(Cli, ConfigFileWithFlagOverrides) {
  const auto held = oracle::write_temp(dir_ / "held.txt", {"b a b"});
  nlohmann::json cfg{{"corpus_path", tiny_},  {"heldout_path", held}, {"order", 2},          {"method", "jm"},
                     {"method_params", {{"lambdas", {1.0, 0.5}}}}, {"architecture", "tabular"}, {"epochs", 5},
                     {"gamma_plus_list", {0.1, 0.5}}, {"gamma_minus_list", {0.1}}, {"seeds", {0, 1}}};
  std::ofstream(path("cfg.json")) << cfg.dump(2);
  const auto r = run({"grid", "--config", path("cfg.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
  const auto o = run({"grid", "--config", path("cfg.json"), "--gamma-minus-list", "0.1,0.2"});
  EXPECT_EQ(std::count(o.out.begin(), o.out.end(), '\n'), 5);

  std::ofstream(path("bad.json")) << R"({"corpus_path": "/does/not/exist"})";
  EXPECT_EQ(run({"count", "--config", path("bad.json")}).code, 2);
  std::ofstream(path("unknown.json")) << R"({"colour": 1})";
  EXPECT_EQ(run({"count", "--config", path("unknown.json")}).code, 2);
}

TEST_F(Cli, VerifyExitCodes) {
  const auto all = run({"verify", "--all", "--seed", "0"});
  EXPECT_EQ(std::count(all.out.begin(), all.out.end(), '\n'), 5);
  // The literal corollary check fails (see README), so --all exits 1.
  EXPECT_EQ(all.code, 1);
  const auto t3 = run({"verify", "--theorem", "T3", "--trials", "1000"});
  EXPECT_EQ(t3.code, 0);
  EXPECT_EQ(std::count(t3.out.begin(), t3.out.end(), '\n'), 1);
  EXPECT_EQ(t3.out.rfind("T3 trials=1000 ", 0), 0u);
  EXPECT_EQ(run({"verify", "--theorem", "T1", "--tolerance", "0"}).code, 1);
  EXPECT_EQ(run({"verify", "--theorem", "T9"}).code, 2);
  EXPECT_EQ(run({"verify", "--theorem", "COR_CE"}).code, 0);
}
