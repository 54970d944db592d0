#include <cmath>
#include <random>
#include <sstream>

#include "../common/toy_data.h"
#include "../oracles/chain_oracle.h"
#include "conceptag/crf/chain.h"
#include "conceptag/crf/crf_model.h"
#include "conceptag/crf/features.h"
#include "conceptag/errors.h"
#include "conceptag/eval/scorer.h"
#include "doctest.h"

using namespace conceptag;
using namespace conceptag::crf;
using conceptag::testing::MakeSentence;
using conceptag::testing::SeparableToy;

namespace {

chain::Matrix ToMatrix(const oracle::Grid &grid) {
  chain::Matrix m(grid.size(), grid[0].size());
  for (size_t i = 0; i < grid.size(); ++i) {
    for (size_t j = 0; j < grid[i].size(); ++j) m(i, j) = grid[i][j];
  }
  return m;
}

chain::Vector ToVector(const std::vector<double> &v) {
  chain::Vector out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

std::vector<CrfInstance> RandomInstances(std::mt19937_64 &rng, int features, int labels,
                                         int count) {
  std::vector<CrfInstance> out;
  std::uniform_int_distribution<int> feat(0, features - 1), lab(0, labels - 1), len(1, 6);
  std::uniform_real_distribution<double> value(-1.5, 1.5);
  for (int k = 0; k < count; ++k) {
    CrfInstance inst;
    const int n = len(rng);
    for (int t = 0; t < n; ++t) {
      SparseVector pos;
      for (int a = 0; a < 3; ++a) pos.emplace_back(feat(rng), a == 2 ? value(rng) : 1.0);
      inst.positions.push_back(pos);
      inst.labels.push_back(lab(rng));
    }
    out.push_back(inst);
  }
  return out;
}

std::vector<double> RandomWeights(std::mt19937_64 &rng, size_t n, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> w(n);
  for (double &v : w) v = normal(rng);
  return w;
}

}  // namespace

TEST_CASE("template parsing") {
  auto ts = ParseTemplates("token:-4..4; pos:-1..0;prefix:-1..0:3;suffix:0..0;lemma;conj-prev-cur");
  REQUIRE(ts.size() == 6);
  CHECK(ts[0].kind == TemplateKind::kTokenWindow);
  CHECK(ts[0].lo == -4);
  CHECK(ts[0].hi == 4);
  CHECK(ts[2].affix_length == 3);
  CHECK_FALSE(ts[3].affix_length.has_value());
  CHECK(TemplatesToString(ts) ==
        "token:-4..4;pos:-1..0;prefix:-1..0:3;suffix:0..0;lemma;conj-prev-cur");
  CHECK_THROWS_AS(FeatureTemplate::Parse("token:2..1"), ParameterError);
  CHECK_THROWS_AS(FeatureTemplate::Parse("prefix:0..0:0"), ParameterError);
  CHECK_THROWS_AS(FeatureTemplate::Parse("token:0..0:2"), ParameterError);
  CHECK_THROWS_AS(FeatureTemplate::Parse("shape:0..0"), ParameterError);
  CHECK_THROWS_AS(FeatureTemplate::Parse("token"), ParameterError);
  CHECK_THROWS_AS(FeatureTemplate::Parse("lemma:0..0"), ParameterError);
  CHECK_THROWS_AS(ParseTemplates(" ; "), ParameterError);
}

TEST_CASE("apply_templates boundary and counts") {
  Sentence s = MakeSentence({"show", "me", "the", "movie", "titanic"}, {"O", "O", "O", "O", "B-t"}, true);
  auto left = ParseTemplates("token:-1..-1");
  auto f = ApplyTemplates(s, 0, left);
  REQUIRE(f.size() == 1);
  CHECK(f[0].key == "w[-1]=BOS-1");
  CHECK(f[0].value == 1.0);
  CHECK(ApplyTemplates(s, 4, ParseTemplates("token:2..2"))[0].key == "w[2]=EOS-2");

  // One affix length per offset: 9 + 2 + 2 + 1 + 1 + 2.
  auto movies = ParseTemplates(
      "token:-4..4;pos:-1..0;prefix:-1..0:3;suffix:0..0:3;lemma;conj-prev-cur;conj-cur-next");
  auto active = ApplyTemplates(s, 2, movies);
  CHECK(active.size() == 17);
  for (const auto &x : active) CHECK(x.value == 1.0);
  // Unset affix length expands to lengths 1..4.
  CHECK(ApplyTemplates(s, 2, ParseTemplates("prefix:-1..0;suffix:0..0")).size() == 12);

  auto pre = ApplyTemplates(s, 3, ParseTemplates("prefix:0..0;suffix:0..0:2"));
  REQUIRE(pre.size() == 5);
  CHECK(pre[0].key == "pre1[0]=m");
  CHECK(pre[3].key == "pre4[0]=movi");
  CHECK(pre[4].key == "suf2[0]=ie");
  // Words shorter than the affix give the whole word.
  CHECK(ApplyTemplates(s, 1, ParseTemplates("prefix:0..0:4"))[0].key == "pre4[0]=me");

  auto conj = ApplyTemplates(s, 0, ParseTemplates("conj-prev-cur;conj-cur-next;lemma;pos:0..0"));
  CHECK(conj[0].key == "w[-1]|w[0]=BOS-1|show");
  CHECK(conj[1].key == "w[0]|w[1]=show|me");
  CHECK(conj[2].key == "l[0]=show_l");
  CHECK(conj[3].key == "p[0]=Ps");

  auto grams = ApplyTemplates(s, 2, ParseTemplates("char-ngrams"));
  CHECK(grams.size() == 3);  // "th", "he", "the"
  CHECK(grams[2].key == "c3=the");
}

TEST_CASE("apply_templates embeddings") {
  Sentence s = MakeSentence({"to", "Boston", "zz"}, {"O", "B-city", "O"});
  EmbeddingTable table;
  table.dimension = 4;
  table.vectors["to"] = {1, 2, 3, 4};
  table.vectors["boston"] = {5, 6, 7, 8};
  auto f = ApplyTemplates(s, 1, ParseTemplates("emb:-1..0"), &table);
  REQUIRE(f.size() == 8);
  CHECK(f[0].key == "e[-1]:0");
  CHECK(f[0].value == 1.0);
  CHECK(f[7].key == "e[0]:3");
  CHECK(f[7].value == 8.0);
  auto missing = ApplyTemplates(s, 2, ParseTemplates("emb:0..1"), &table);
  REQUIRE(missing.size() == 8);
  for (const auto &x : missing) CHECK(x.value == 0.0);
  CHECK_THROWS_AS(ApplyTemplates(s, 1, ParseTemplates("emb:0..0")), ConfigError);
}

TEST_CASE("missing columns fail with the template name") {
  Sentence s = MakeSentence({"a", "b"}, {"O", "O"});
  auto ts = ParseTemplates("token:0..0;pos:-1..0");
  try {
    CheckTemplateInputs({s}, ts, nullptr);
    FAIL("expected ConfigError");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("pos:-1..0") != std::string::npos);
  }
  CHECK_THROWS_AS(ApplyTemplates(s, 1, ParseTemplates("lemma")), ConfigError);
  CHECK_THROWS_AS(TrainCrf({s}, ParseTemplates("lemma"), {}), ConfigError);
}

TEST_CASE("chain log-partition and argmax match enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + rng() % 6;
    const int l = 1 + static_cast<int>(rng() % 4);
    const bool bounds = trial % 2 == 1;
    auto c = oracle::RandomChain(rng, n, l, bounds);
    auto brute = oracle::Enumerate(c);
    const chain::Matrix u = ToMatrix(c.unary), tr = ToMatrix(c.trans);
    const chain::Vector st = ToVector(c.start), sp = ToVector(c.stop);
    const chain::ChainScores scores{u, tr, st, sp};
    chain::Matrix alpha, beta;
    const double fwd = chain::ForwardLogZ(scores, &alpha);
    const double bwd = chain::BackwardLogZ(scores, &beta);
    CHECK(std::abs(fwd - brute.log_z) < 1e-8);
    CHECK(std::abs(fwd - bwd) < 1e-10);
    double score = 0.0;
    CHECK(chain::Viterbi(scores, &score) == brute.best);
    CHECK(score == brute.best_score);
    const auto m = chain::ComputeMarginals(scores);
    for (size_t t = 0; t < n; ++t) {
      CHECK(std::abs(m.node.row(t).sum() - 1.0) < 1e-10);
      for (int y = 0; y < l; ++y) CHECK(std::abs(m.node(t, y) - brute.node[t][y]) < 1e-9);
    }
  }
}

TEST_CASE("viterbi tie-break picks the lexicographically smallest sequence") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const size_t n = 1 + rng() % 5;
    const int l = 2 + static_cast<int>(rng() % 3);
    auto c = oracle::TiedChain(rng, n, l);
    auto brute = oracle::Enumerate(c);
    const chain::Matrix u = ToMatrix(c.unary), tr = ToMatrix(c.trans);
    CHECK(chain::Viterbi({u, tr, chain::kNoBoundary, chain::kNoBoundary}) == brute.best);
  }
  const chain::Matrix zeros = chain::Matrix::Zero(4, 3), tz = chain::Matrix::Zero(3, 3);
  CHECK(chain::Viterbi({zeros, tz, chain::kNoBoundary, chain::kNoBoundary}) ==
        std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("decoding is invariant to per-position unary shifts") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> shift(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = oracle::RandomChain(rng, 1 + rng() % 6, 1 + static_cast<int>(rng() % 4), false);
    chain::Matrix u = ToMatrix(c.unary);
    const chain::Matrix tr = ToMatrix(c.trans);
    auto before = chain::Viterbi({u, tr, chain::kNoBoundary, chain::kNoBoundary});
    const int t = static_cast<int>(rng() % u.rows());
    u.row(t).array() += shift(rng);
    CHECK(chain::Viterbi({u, tr, chain::kNoBoundary, chain::kNoBoundary}) == before);
  }
}

TEST_CASE("chain shape errors") {
  const chain::Matrix u = chain::Matrix::Zero(2, 3), bad = chain::Matrix::Zero(2, 2);
  CHECK_THROWS_AS(chain::ForwardLogZ({u, bad, chain::kNoBoundary, chain::kNoBoundary}), ShapeError);
  const chain::Matrix empty(0, 3), tr = chain::Matrix::Zero(3, 3);
  CHECK_THROWS_AS(chain::Viterbi({empty, tr, chain::kNoBoundary, chain::kNoBoundary}), ShapeError);
}

TEST_CASE("objective at zero weights is N ln L") {
  std::mt19937_64 rng(2);
  for (int l : {1, 2, 3, 5}) {
    auto instances = RandomInstances(rng, 7, l, 9);
    CrfObjective objective(7, l, instances, 0.0);
    std::vector<double> zeros(objective.NumWeights(), 0.0);
    size_t tokens = 0;
    for (const auto &inst : instances) tokens += inst.positions.size();
    CHECK(std::abs(objective.Evaluate(zeros, nullptr) - tokens * std::log(l)) < 1e-9);
  }
}

TEST_CASE("objective gradient matches central differences") {
  std::mt19937_64 rng(3);
  for (double l2 : {0.0, 0.7}) {
    auto instances = RandomInstances(rng, 6, 3, 12);
    CrfObjective objective(6, 3, instances, l2);
    auto w = RandomWeights(rng, objective.NumWeights(), 0.8);
    std::vector<double> grad;
    objective.Evaluate(w, &grad);
    auto f = [&](const std::vector<double> &x) { return objective.Evaluate(x, nullptr); };
    std::uniform_int_distribution<size_t> coord(0, w.size() - 1);
    for (int k = 0; k < 10; ++k) {
      const size_t i = coord(rng);
      CHECK(oracle::RelativeError(grad[i], oracle::CentralDifference(f, w, i, 1e-5)) < 1e-4);
    }
  }
}

TEST_CASE("objective is convex and non-negative") {
  std::mt19937_64 rng(4);
  auto instances = RandomInstances(rng, 5, 4, 10);
  CrfObjective unregularized(5, 4, instances, 0.0);
  CrfObjective objective(5, 4, instances, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = RandomWeights(rng, objective.NumWeights(), 2.0);
    auto b = RandomWeights(rng, objective.NumWeights(), 2.0);
    std::vector<double> mid(a.size());
    for (size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
    CHECK(objective.Evaluate(mid, nullptr) <=
          0.5 * (objective.Evaluate(a, nullptr) + objective.Evaluate(b, nullptr)) + 1e-9);
    CHECK(unregularized.Evaluate(a, nullptr) >= 0.0);
  }
}

TEST_CASE("objective is bit-identical across thread counts") {
  std::mt19937_64 rng(6);
  auto instances = RandomInstances(rng, 9, 3, 70);
  CrfObjective one(9, 3, instances, 1.0, 1);
  CrfObjective four(9, 3, instances, 1.0, 4);
  auto w = RandomWeights(rng, one.NumWeights(), 1.0);
  std::vector<double> g1, g4;
  CHECK(one.Evaluate(w, &g1) == four.Evaluate(w, &g4));
  CHECK(g1 == g4);
}

TEST_CASE("objective rejects overflowing weights") {
  std::vector<CrfInstance> instances = {{{{{0, 1.0}}}, {0}}};
  CrfObjective objective(1, 2, instances, 0.0);
  std::vector<double> w(objective.NumWeights(), 0.0);
  w[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(objective.Evaluate(w, nullptr), NumericError);
}

TEST_CASE("training with zero iterations returns zero weights") {
  auto train = SeparableToy();
  CrfTrainOptions options;
  options.max_iterations = 0;
  auto model = TrainCrf(train, ParseTemplates("token:-1..1"), options);
  for (double w : model.weights()) CHECK(w == 0.0);
  // All-zero model decodes to the lowest label id everywhere.
  for (const auto &tag : model.Decode(train[0])) CHECK(tag == model.labels()[0]);
  CHECK_THROWS_AS(TrainCrf({}, ParseTemplates("token:0..0"), {}), TrainingError);
}

TEST_CASE("separable toy set is fitted exactly") {
  auto train = SeparableToy();
  CrfTrainOptions options;
  options.l2 = 0.1;
  options.max_iterations = 200;
  CrfTrainReport report;
  auto model = TrainCrf(train, ParseTemplates("token:0..0"), options, nullptr, &report);
  CHECK(report.final_objective < report.initial_objective);
  std::vector<std::vector<std::string>> gold, pred;
  for (const auto &s : train) {
    gold.push_back(s.tags);
    pred.push_back(model.Decode(s));
  }
  CHECK(eval::Score(gold, pred).F1Percent() == 100.0);
}

TEST_CASE("dominant unary feature decides the label") {
  CrfModel model({"A", "B", "C"}, {"w[0]=x", "w[0]=y", "w[0]=z"}, ParseTemplates("token:0..0"), 1.0);
  auto &w = model.weights();
  w[0 * 3 + 2] = 10.0;  // x -> C
  w[1 * 3 + 0] = 10.0;  // y -> A
  w[2 * 3 + 1] = 10.0;  // z -> B
  for (size_t i = 9; i < w.size(); ++i) w[i] = 0.3 * static_cast<double>(i % 4);
  Sentence s = MakeSentence({"y", "x", "z", "x", "q"}, {});
  auto tags = model.Decode(s);
  CHECK(tags[0] == "A");
  CHECK(tags[1] == "C");
  CHECK(tags[2] == "B");
  CHECK(tags[3] == "C");
}

TEST_CASE("model save/load round-trip is exact") {
  auto train = SeparableToy();
  CrfTrainOptions options;
  options.max_iterations = 15;
  auto model = TrainCrf(train, ParseTemplates("token:-1..1;suffix:0..0:2;char-ngrams"), options);
  std::stringstream buffer;
  model.Save(buffer);
  auto loaded = CrfModel::Load(buffer);
  CHECK(loaded.labels() == model.labels());
  CHECK(loaded.features() == model.features());
  CHECK(loaded.weights() == model.weights());
  CHECK(loaded.l2() == model.l2());
  CHECK(TemplatesToString(loaded.templates()) == TemplatesToString(model.templates()));
  for (const auto &s : train) CHECK(loaded.Decode(s) == model.Decode(s));
  std::stringstream bad("conceptag-crf 2\n");
  CHECK_THROWS_AS(CrfModel::Load(bad), FormatError);
}

TEST_CASE("unknown gold tag is a validation error") {
  auto train = SeparableToy();
  CrfTrainOptions options;
  options.max_iterations = 0;
  auto model = TrainCrf(train, ParseTemplates("token:0..0"), options);
  Sentence s = MakeSentence({"to"}, {"B-unseen"});
  CHECK_THROWS_AS(model.Extract(s, nullptr, true), ValidationError);
}
