#include <cmath>
#include <random>
#include <sstream>

#include "../common/grad_suite.h"
#include "../common/toy_data.h"
#include "../oracles/chain_oracle.h"
#include "../oracles/nn_oracle.h"
#include "conceptag/errors.h"
#include "conceptag/nn/autodiff.h"
#include "conceptag/nn/layers.h"
#include "conceptag/nn/tagger.h"
#include "conceptag/nn/trainer.h"
#include "doctest.h"

using namespace conceptag;
using namespace conceptag::nn;
using conceptag::testing::RandomTensor;
using conceptag::testing::SeparableToy;

namespace {

oracle::Flat ToFlat(const Tensor &t) { return {t.data(), t.data() + t.size()}; }

Tensor FromGrid(const oracle::Grid &grid) {
  Tensor m(grid.size(), grid[0].size());
  for (size_t i = 0; i < grid.size(); ++i) {
    for (size_t j = 0; j < grid[i].size(); ++j) m(i, j) = grid[i][j];
  }
  return m;
}

// Transition matrix in the (L+2) layout plus the equivalent oracle chain.
std::pair<Tensor, oracle::BruteChain> RandomNeuralChain(std::mt19937_64 &rng, size_t n, int l) {
  oracle::BruteChain c = oracle::RandomChain(rng, n, l, true);
  Tensor t = RandomTensor(rng, l + 2, l + 2);  // unused entries stay random
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) t(i, j) = c.trans[i][j];
    t(l, i) = c.start[i];
    t(i, l + 1) = c.stop[i];
  }
  return {t, c};
}

ArchitectureConfig SmallConfig(ArchKind kind) {
  ArchitectureConfig c;
  c.kind = kind;
  c.hidden = 8;
  c.embedding_dim = 6;
  c.epochs = 1;
  c.batch_size = 3;
  c.lr = 0.01;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("matmul identity and its gradient") {
  std::mt19937_64 rng(1);
  ParameterStore store;
  Parameter &x = store.AddZero("x", 4, 3);
  x.value = RandomTensor(rng, 4, 3);
  Graph g(true);
  Var y = MatMul(g.Constant(Tensor::Identity(4, 4)), g.Param(x));
  CHECK(y.value() == x.value);
  g.Backward(Sum(y));
  CHECK(x.grad == Tensor::Ones(4, 3));
}

TEST_CASE("softmax cross-entropy of uniform logits is ln L") {
  for (int l : {1, 2, 5, 9}) {
    Graph g;
    Var loss = SoftmaxCrossEntropy(g.Constant(Tensor::Constant(1, l, 0.3)), {l - 1});
    CHECK(std::abs(loss.value()(0, 0) - std::log(l)) < 1e-12);
  }
}

TEST_CASE("shape errors name the op and the shapes") {
  Graph g;
  Var a = g.Constant(Tensor::Zero(2, 3));
  Var b = g.Constant(Tensor::Zero(2, 3));
  try {
    MatMul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError &e) {
    const std::string what = e.what();
    CHECK(what.find("matmul") != std::string::npos);
    CHECK(what.find("(2,3)") != std::string::npos);
  }
  CHECK_THROWS_AS(Add(a, g.Constant(Tensor::Zero(1, 2))), ShapeError);
  CHECK_THROWS_AS(ConcatRows({a, g.Constant(Tensor::Zero(1, 2))}), ShapeError);
  CHECK_THROWS_AS(SoftmaxCrossEntropy(a, {0}), ShapeError);
  CHECK_THROWS_AS(Unfold(a, 3), ShapeError);
  CHECK_THROWS_AS(g.Backward(a), ShapeError);
}

TEST_CASE("backward visits each node once") {
  // y = x * x used three times; d/dx sum(3 x^2) = 6 x.
  ParameterStore store;
  Parameter &x = store.AddZero("x", 1, 2);
  x.value << 1.5, -2.0;
  Graph g(true);
  Var xv = g.Param(x);
  Var sq = Mul(xv, xv);
  g.Backward(Sum(AddN({sq, sq, sq})));
  CHECK(x.grad(0, 0) == doctest::Approx(9.0));
  CHECK(x.grad(0, 1) == doctest::Approx(-12.0));
}

TEST_CASE("frozen parameters receive no gradient") {
  ParameterStore store;
  Parameter &x = store.AddZero("x", 2, 2);
  x.value.setOnes();
  x.trainable = false;
  Graph g(true);
  g.Backward(Sum(Tanh(g.Param(x))));
  CHECK(x.grad.isZero());
}

TEST_CASE("every op passes grad_check on 20 random shapes") {
  for (const auto &c : testing::OpGradCases()) {
    double worst = 0.0;
    for (uint64_t seed = 1; seed <= 20; ++seed) worst = std::max(worst, c.run(seed).max_relative_error);
    INFO(c.name << " max relative error " << worst);
    CHECK(worst < testing::kGradTolerance);
  }
}

TEST_CASE("cells, char conv and the LSTM-CRF loss pass grad_check") {
  for (const auto &c : testing::ModelGradCases()) {
    for (uint64_t seed = 1; seed <= 3; ++seed) {
      auto r = c.run(seed);
      INFO(c.name << " seed " << seed << " max relative error " << r.max_relative_error);
      CHECK(r.checked > 0);
      CHECK(r.max_relative_error < testing::kGradTolerance);
    }
  }
}

TEST_CASE("grad_check flags a wrong backward rule") {
  ParameterStore store;
  Parameter &x = store.AddZero("x", 2, 3);
  std::mt19937_64 rng(3);
  x.value = RandomTensor(rng, 2, 3);
  auto broken = [&](Graph &g) {
    Var v = g.Param(x);
    Tensor sq = v.value().array().square();
    const int id = v.id;
    Var y = g.Record(sq, {id}, [id](Graph &gr, int self) {
      gr.Grad(id) += gr.Grad(self);  // should be 2 x * upstream
    });
    return Sum(y);
  };
  CHECK(GradCheck(broken, store.All(), -1, 1e-5, 1).max_relative_error > 0.1);
  CHECK_THROWS_AS(GradCheck(broken, store.All(), -1, 1e-2, 1), ParameterError);
}

TEST_CASE("grad_check agrees with an independent central difference") {
  std::mt19937_64 rng(9);
  ParameterStore store;
  Parameter &w = store.AddZero("w", 3, 4);
  w.value = RandomTensor(rng, 3, 4);
  const Tensor x = RandomTensor(rng, 2, 3);
  auto loss = [&](Graph &g) { return Sum(Tanh(MatMul(g.Constant(x), g.Param(w)))); };
  GradCheck(loss, store.All(), 0, 1e-5, 1);  // fills w.grad
  const Tensor analytic = w.grad;
  auto f = [&](const std::vector<double> &flat) {
    Tensor m = w.value;
    std::copy(flat.begin(), flat.end(), m.data());
    return (x * m).array().tanh().sum();
  };
  const std::vector<double> at = ToFlat(w.value);
  for (size_t i = 0; i < at.size(); ++i) {
    CHECK(oracle::RelativeError(analytic.data()[i], oracle::CentralDifference(f, at, i, 1e-5)) < 1e-8);
  }
}

TEST_CASE("affine layer grad_check is exact up to roundoff") {
  std::mt19937_64 rng(4);
  ParameterStore store;
  Parameter &w = store.AddZero("w", 5, 3);
  Parameter &b = store.AddZero("b", 1, 3);
  w.value = RandomTensor(rng, 5, 3);
  b.value = RandomTensor(rng, 1, 3);
  const Tensor x = RandomTensor(rng, 4, 5);
  const Tensor proj = RandomTensor(rng, 4, 3);
  auto loss = [&](Graph &g) {
    return Sum(Mul(Add(MatMul(g.Constant(x), g.Param(w)), g.Param(b)), g.Constant(proj)));
  };
  CHECK(GradCheck(loss, store.All(), -1, 1e-5, 2).max_relative_error < 1e-8);
}

TEST_CASE("embedding grad_check away from the max-norm boundary") {
  auto train = SeparableToy();
  ArchitectureConfig config = SmallConfig(ArchKind::kLstm);
  config.emb_norm = 0.6;
  NeuralTagger tagger = NeuralTagger::Build(config, train, {"B-city", "B-day", "I-city", "O"}, nullptr);
  Parameter *table = tagger.params().Find("emb.word");
  REQUIRE(table);
  ApplyMaxNorm(tagger.params().All(), config.emb_norm);
  auto inactive = [&](const Parameter &p, long index) {
    if (&p != table) return false;
    const long row = index / p.value.cols();
    return p.value.row(row).norm() < config.emb_norm - 0.1;
  };
  const Sentence *batch[] = {&train[5]};
  auto loss = [&](Graph &g) {
    std::mt19937_64 unused(0);
    return tagger.Loss(g, batch, unused);
  };
  auto r = GradCheck(loss, tagger.params().All(), 60, 1e-5, 3, inactive);
  CHECK(r.checked > 0);
  CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("cell steps at zero parameters") {
  std::mt19937_64 rng(2);
  ParameterStore store;
  Cell lstm(CellKind::kLstm, 3, 4, store, "lstm", rng);
  Cell gru(CellKind::kGru, 3, 4, store, "gru", rng);
  for (Parameter *p : store.All()) p->value.setZero();
  Graph g;
  Var x = g.Constant(RandomTensor(rng, 2, 3));
  CellState zero = lstm.Zero(g, 2);
  CellState out = lstm.Step(g, x, zero);
  CHECK(out.h.value().isZero());
  CHECK(out.c.value().isZero());
  const Tensor h = RandomTensor(rng, 2, 4);
  CellState next = gru.Step(g, x, {g.Constant(h), {}});
  CHECK((next.h.value() - 0.5 * h).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("cell steps match the scalar oracle") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int in = 1 + static_cast<int>(rng() % 5), hidden = 1 + static_cast<int>(rng() % 4);
    ParameterStore store;
    Cell elman(CellKind::kElman, in, hidden, store, "e", rng);
    Cell gru(CellKind::kGru, in, hidden, store, "g", rng);
    Cell lstm(CellKind::kLstm, in, hidden, store, "l", rng);
    const Tensor x = RandomTensor(rng, 1, in), h = RandomTensor(rng, 1, hidden),
                 c = RandomTensor(rng, 1, hidden);
    Graph g;
    Var xv = g.Constant(x), hv = g.Constant(h), cv = g.Constant(c);
    auto close = [](const Tensor &got, const oracle::Flat &want) {
      double worst = 0.0;
      for (size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(got.data()[i] - want[i]));
      return worst <= 1e-12;
    };
    CHECK(close(elman.Step(g, xv, {hv, {}}).h.value(),
                oracle::ElmanStep(ToFlat(x), ToFlat(h), ToFlat(elman.w->value),
                                  ToFlat(elman.u->value), ToFlat(elman.b->value))));
    CHECK(close(gru.Step(g, xv, {hv, {}}).h.value(),
                oracle::GruStep(ToFlat(x), ToFlat(h), ToFlat(gru.w->value), ToFlat(gru.u->value),
                                ToFlat(gru.un->value), ToFlat(gru.b->value))));
    CellState s = lstm.Step(g, xv, {hv, cv});
    auto [hn, cn] = oracle::LstmStep(ToFlat(x), ToFlat(h), ToFlat(c), ToFlat(lstm.w->value),
                                     ToFlat(lstm.u->value), ToFlat(lstm.b->value));
    CHECK(close(s.h.value(), hn));
    CHECK(close(s.c.value(), cn));
  }
}

TEST_CASE("char conv embedding") {
  std::mt19937_64 rng(13);
  ParameterStore store;
  CharConv conv(8, 5, 4, store, "char", rng);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> word;
    const int len = 1 + trial % 6;
    for (int i = 0; i < len; ++i) word.push_back(2 + static_cast<int>(rng() % 6));
    Graph g;
    const Tensor got = conv.Embed(g, word).value();
    const auto want = oracle::CharConvEmbed(word, ToFlat(conv.table->value), 5,
                                            ToFlat(conv.kernel->value), ToFlat(conv.bias->value), 4);
    for (int f = 0; f < 4; ++f) CHECK(std::abs(got(0, f) - want[f]) < 1e-12);
  }
  // A one-character word is a single padded window.
  {
    Graph g;
    const Tensor one = conv.Embed(g, {3}).value();
    const Tensor window = conv.table->value.row(3);
    double expected = conv.bias->value(0, 1);
    for (int d = 0; d < 5; ++d) {
      expected += window(0, d) * conv.kernel->value(d, 1);
      expected += conv.table->value(kCharPad, d) * conv.kernel->value(5 + d, 1);
      expected += conv.table->value(kCharPad, d) * conv.kernel->value(10 + d, 1);
    }
    CHECK(std::abs(one(0, 1) - expected) < 1e-12);
  }
  conv.kernel->value.setZero();
  conv.bias->value.setZero();
  Graph g;
  CHECK(conv.Embed(g, {2, 3, 4, 5}).value().isZero());
  CHECK_THROWS_AS(conv.Embed(g, {}), ParameterError);
}

TEST_CASE("neural CRF matches enumeration") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + rng() % 5;
    const int l = 1 + static_cast<int>(rng() % 4);
    auto [trans, c] = RandomNeuralChain(rng, n, l);
    const Tensor e = FromGrid(c.unary);
    const auto brute = oracle::Enumerate(c);
    CHECK(std::abs(NeuralCrfLogZ(e, trans) - brute.log_z) < 1e-8);
    CHECK(NeuralCrfViterbi(e, trans) == brute.best);
    std::vector<int> gold(n);
    for (auto &y : gold) y = static_cast<int>(rng() % l);
    Graph g;
    const double loss = NeuralCrfLoss(g.Constant(e), g.Constant(trans), {gold}).value()(0, 0);
    CHECK(std::abs(loss - (brute.log_z - oracle::BruteScore(c, gold))) < 1e-8);
    CHECK(loss >= 0.0);
  }
}

TEST_CASE("neural CRF single position collapses analytically") {
  std::mt19937_64 rng(32);
  const int l = 4;
  const Tensor e = RandomTensor(rng, 1, l), t = RandomTensor(rng, l + 2, l + 2);
  const CrfLayout layout{l};
  std::vector<double> terms;
  for (int j = 0; j < l; ++j) terms.push_back(e(0, j) + t(layout.Start(), j) + t(j, layout.Stop()));
  const double lse = chain::LogSumExp(terms.data(), l);
  Graph g;
  const double loss = NeuralCrfLoss(g.Constant(e), g.Constant(t), {{2}}).value()(0, 0);
  CHECK(std::abs(loss - (lse - terms[2])) < 1e-12);
}

TEST_CASE("neural CRF loss vanishes on a dominant gold path") {
  const int l = 3;
  Tensor e = Tensor::Constant(4, l, -40.0);
  const std::vector<int> gold = {2, 0, 1, 1};
  for (int t = 0; t < 4; ++t) e(t, gold[t]) = 40.0;
  Graph g;
  const double loss = NeuralCrfLoss(g.Constant(e), g.Constant(Tensor::Zero(l + 2, l + 2)), {gold})
                          .value()(0, 0);
  CHECK(loss >= 0.0);
  CHECK(loss < 1e-9);
  CHECK_THROWS_AS(NeuralCrfLoss(g.Constant(e), g.Constant(Tensor::Zero(l + 2, l + 2)), {{0, 1}}),
                  ShapeError);
}

TEST_CASE("architecture sizes") {
  auto train = SeparableToy();
  const std::vector<std::string> labels = {"B-city", "B-day", "I-city", "O"};
  ArchitectureConfig rnn = SmallConfig(ArchKind::kRnn);
  rnn.hidden = 400;
  CHECK(rnn.DirectionHidden() == 200);
  NeuralTagger t = NeuralTagger::Build(rnn, train, labels, nullptr);
  CHECK(t.params().Find("enc.f.u")->value.rows() == 200);
  CHECK(t.params().Find("enc.b.u")->value.rows() == 200);
  CHECK(t.params().Find("out.w")->value.rows() == 400);

  ArchitectureConfig two = SmallConfig(ArchKind::kLstm2Ch);
  two.hidden = 400;
  CHECK(two.ChannelHidden() == 200);
  CHECK(two.DirectionHidden() == 100);
  NeuralTagger t2 = NeuralTagger::Build(two, train, labels, nullptr);
  CHECK(t2.params().Find("enc.f.u")->value.rows() == 100);
  CHECK(t2.params().Find("ch2.b.u")->value.rows() == 100);
  CHECK_FALSE(t2.params().Find("emb.frozen")->trainable);
  CHECK(t2.params().Find("emb.word")->trainable);

  ArchitectureConfig crf = SmallConfig(ArchKind::kLstmCrf);
  NeuralTagger t3 = NeuralTagger::Build(crf, train, labels, nullptr);
  CHECK(t3.params().Find("crf.trans")->size() == 36);
  // A 43-tag set adds (43 + 2)^2 = 2025 transition weights.
  CHECK((43 + 2) * (43 + 2) <= 2500);

  CHECK_THROWS_AS(ParseArch("FOO"), ConfigError);
  ArchitectureConfig odd = SmallConfig(ArchKind::kLstm);
  odd.hidden = 7;
  CHECK_THROWS_AS(odd.Validate(), ConfigError);
  ArchitectureConfig bad2 = SmallConfig(ArchKind::kLstm2Ch);
  bad2.hidden = 6;
  CHECK_THROWS_AS(bad2.Validate(), ConfigError);
  for (const auto &name : ArchNames()) CHECK(ArchName(ParseArch(name)) == name);
  CHECK(ArchNames().size() == 11);
}

TEST_CASE("parameter count is a function of config and data") {
  auto train = SeparableToy();
  const std::vector<std::string> labels = {"B-city", "B-day", "I-city", "O"};
  for (const auto &name : ArchNames()) {
    ArchitectureConfig a = SmallConfig(ParseArch(name));
    ArchitectureConfig b = a;
    b.seed = 99;
    CHECK(NeuralTagger::Build(a, train, labels, nullptr).ParameterCount() ==
          NeuralTagger::Build(b, train, labels, nullptr).ParameterCount());
  }
}

TEST_CASE("all architectures emit one label per token") {
  auto train = SeparableToy();
  std::vector<Sentence> test = train;
  test.push_back(testing::MakeSentence({"unseen", "x"}, {"O", "O"}));
  test.push_back(testing::MakeSentence({"a", "b", "c", "d", "e", "f", "g", "h"},
                                       {"O", "O", "O", "O", "O", "O", "O", "O"}));
  for (const auto &name : ArchNames()) {
    ArchitectureConfig config = SmallConfig(ParseArch(name));
    config.drop_rate = 0.25;
    TrainTrace trace;
    NeuralTagger tagger = TrainNeural(config, train, test, nullptr, &trace);
    INFO(name);
    CHECK(trace.epoch_f1.size() == 1);
    auto predictions = tagger.PredictAll(test);
    for (size_t i = 0; i < test.size(); ++i) CHECK(predictions[i].size() == test[i].size());
    if (!config.UsesCrf()) {
      for (const Sentence &s : test) {
        const Tensor p = tagger.Distributions(s);
        CHECK(p.rows() == static_cast<long>(s.size()));
        for (long r = 0; r < p.rows(); ++r) CHECK(std::abs(p.row(r).sum() - 1.0) < 1e-10);
      }
    }
  }
}

TEST_CASE("batches share a length and cover every sentence once") {
  auto train = SeparableToy();
  std::mt19937_64 rng(5);
  auto batches = MakeBatches(train, 2, rng);
  size_t total = 0;
  for (const auto &batch : batches) {
    CHECK(batch.size() <= 2);
    for (const Sentence *s : batch) CHECK(s->size() == batch[0]->size());
    total += batch.size();
  }
  CHECK(total == train.size());
}

TEST_CASE("max-norm rescales only oversized rows") {
  ParameterStore store;
  Parameter &e = store.AddZero("e", 2, 2);
  e.embedding = true;
  e.value << 3.0, 4.0, 0.3, 0.4;
  ApplyMaxNorm(store.All(), 1.0);
  CHECK(e.value.row(0).norm() == doctest::Approx(1.0));
  CHECK(e.value(1, 0) == 0.3);
}

TEST_CASE("training is deterministic per seed") {
  auto train = SeparableToy();
  ArchitectureConfig config = SmallConfig(ArchKind::kLstmCrf);
  config.epochs = 3;
  config.drop_rate = 0.3;
  TrainTrace a, b, c;
  TrainNeural(config, train, train, nullptr, &a);
  TrainNeural(config, train, train, nullptr, &b);
  CHECK(a.epoch_f1 == b.epoch_f1);
  CHECK(a.epoch_loss == b.epoch_loss);
  config.seed = 8;
  TrainNeural(config, train, train, nullptr, &c);
  CHECK(a.epoch_loss != c.epoch_loss);
}

TEST_CASE("LSTM overfits the separable toy set") {
  auto train = SeparableToy();
  ArchitectureConfig config = SmallConfig(ArchKind::kLstm);
  config.hidden = 16;
  config.embedding_dim = 10;
  config.epochs = 200;
  config.batch_size = 1;
  TrainTrace trace;
  NeuralTagger tagger = TrainNeural(config, train, train, nullptr, &trace);
  CHECK(trace.epoch_f1.back() == 100.0);
  CHECK(EvaluateF1(tagger, train) == 100.0);
}

TEST_CASE("checkpoint round-trip reproduces the recorded F1") {
  auto train = SeparableToy();
  ArchitectureConfig config = SmallConfig(ArchKind::kLstmCrfCharRep);
  config.epochs = 4;
  TrainTrace trace;
  NeuralTagger tagger = TrainNeural(config, train, train, nullptr, &trace);
  std::stringstream buffer;
  tagger.Save(buffer, trace.epoch_f1.back());
  std::optional<double> recorded;
  NeuralTagger loaded = NeuralTagger::Load(buffer, &recorded);
  REQUIRE(recorded.has_value());
  CHECK(EvaluateF1(loaded, train) == *recorded);
  CHECK(loaded.ParameterCount() == tagger.ParameterCount());
  auto a = tagger.params().All();
  auto b = loaded.params().All();
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i]->value == b[i]->value);
  std::stringstream bad("conceptag-nn 7\n");
  CHECK_THROWS_AS(NeuralTagger::Load(bad), FormatError);
}
