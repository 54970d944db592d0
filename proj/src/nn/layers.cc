#include "conceptag/nn/layers.h"

#include <algorithm>
#include <cmath>

#include "conceptag/errors.h"

namespace conceptag::nn {

Cell::Cell(CellKind kind, int input, int hidden, ParameterStore &store, const std::string &prefix,
           std::mt19937_64 &rng)
    : kind_(kind), input_(input), hidden_(hidden) {
  if (input < 1 || hidden < 1) throw ParameterError("cell: sizes must be positive");
  const int gates = Gates();
  w = &store.Add(prefix + ".w", input, gates * hidden, input, rng);
  if (kind == CellKind::kGru) {
    u = &store.Add(prefix + ".u", hidden, 2 * hidden, hidden, rng);
    un = &store.Add(prefix + ".un", hidden, hidden, hidden, rng);
  } else {
    u = &store.Add(prefix + ".u", hidden, gates * hidden, hidden, rng);
  }
  b = &store.Add(prefix + ".b", 1, gates * hidden, hidden, rng);
}

int Cell::Gates() const {
  switch (kind_) {
    case CellKind::kElman: return 1;
    case CellKind::kGru: return 3;
    case CellKind::kLstm: return 4;
  }
  return 0;
}

CellState Cell::Zero(Graph &g, long batch) const {
  CellState s;
  s.h = g.Constant(Tensor::Zero(batch, hidden_));
  if (kind_ == CellKind::kLstm) s.c = g.Constant(Tensor::Zero(batch, hidden_));
  return s;
}

CellState Cell::Step(Graph &g, Var x, const CellState &state) const {
  if (x.cols() != input_ || state.h.cols() != hidden_ || state.h.rows() != x.rows()) {
    throw ShapeError("cell step: input " + ShapeString(x.value()) + " and state " +
                     ShapeString(state.h.value()) + " do not match sizes " +
                     std::to_string(input_) + "/" + std::to_string(hidden_));
  }
  const long h = hidden_;
  Var xw = Add(MatMul(x, g.Param(*w)), g.Param(*b));
  switch (kind_) {
    case CellKind::kElman:
      return {Tanh(Add(xw, MatMul(state.h, g.Param(*u)))), {}};
    case CellKind::kGru: {
      Var hu = MatMul(state.h, g.Param(*u));
      Var z = Sigmoid(Add(SliceCols(xw, 0, h), SliceCols(hu, 0, h)));
      Var r = Sigmoid(Add(SliceCols(xw, h, h), SliceCols(hu, h, h)));
      Var n = Tanh(Add(SliceCols(xw, 2 * h, h), MatMul(Mul(r, state.h), g.Param(*un))));
      return {Add(Mul(OneMinus(z), state.h), Mul(z, n)), {}};
    }
    case CellKind::kLstm: {
      if (!state.c.graph) throw ShapeError("lstm step: missing cell state");
      Var pre = Add(xw, MatMul(state.h, g.Param(*u)));
      Var i = Sigmoid(SliceCols(pre, 0, h));
      Var f = Sigmoid(SliceCols(pre, h, h));
      Var o = Sigmoid(SliceCols(pre, 2 * h, h));
      Var cand = Tanh(SliceCols(pre, 3 * h, h));
      Var c = Add(Mul(f, state.c), Mul(i, cand));
      return {Mul(o, Tanh(c)), c};
    }
  }
  throw ParameterError("cell: unknown kind");
}

CharConv::CharConv(int chars, int char_dim, int filters, ParameterStore &store,
                   const std::string &prefix, std::mt19937_64 &rng)
    : filters_(filters) {
  if (chars < 2 || char_dim < 1 || filters < 1) throw ParameterError("char conv: bad sizes");
  table = &store.Add(prefix + ".chars", chars, char_dim, char_dim, rng);
  table->embedding = true;
  kernel = &store.Add(prefix + ".kernel", kCharWidth * char_dim, filters, kCharWidth * char_dim, rng);
  bias = &store.Add(prefix + ".bias", 1, filters, kCharWidth * char_dim, rng);
}

Var CharConv::Embed(Graph &g, const std::vector<int> &char_ids) const {
  if (char_ids.empty()) throw ParameterError("char conv: empty word");
  std::vector<int> ids = char_ids;
  while (ids.size() < static_cast<size_t>(kCharWidth)) ids.push_back(kCharPad);
  Var chars = Gather(g.Param(*table), ids);
  return MaxOverTime(Conv1d(chars, g.Param(*kernel), g.Param(*bias), kCharWidth));
}

namespace {

struct Split {
  chain::Matrix trans;
  chain::Vector start, stop;
};

Split SplitTransitions(const Tensor &t, int labels) {
  if (t.rows() != labels + 2 || t.cols() != labels + 2) {
    throw ShapeError("neural crf: transitions " + ShapeString(t) + " for " +
                     std::to_string(labels) + " labels");
  }
  const CrfLayout layout{labels};
  Split s;
  s.trans = t.topLeftCorner(labels, labels);
  s.start = t.row(layout.Start()).head(labels).transpose();
  s.stop = t.col(layout.Stop()).head(labels);
  return s;
}

}  // namespace

Var NeuralCrfLoss(Var emissions, Var transitions, const std::vector<std::vector<int>> &gold) {
  const Tensor &e = emissions.value();
  const Tensor &tr = transitions.value();
  const int labels = static_cast<int>(e.cols());
  const CrfLayout layout{labels};
  const Split split = SplitTransitions(tr, labels);
  const long batch = static_cast<long>(gold.size());
  if (batch == 0 || gold[0].empty()) throw ShapeError("neural crf: empty gold sequence");
  const long steps = static_cast<long>(gold[0].size());
  if (e.rows() != steps * batch) {
    throw ShapeError("neural crf: emissions " + ShapeString(e) + " for " +
                     std::to_string(batch) + " sequences of length " + std::to_string(steps));
  }
  Tensor de = Tensor::Zero(e.rows(), e.cols());
  Tensor dt = Tensor::Zero(tr.rows(), tr.cols());
  double loss = 0.0;
  for (long b = 0; b < batch; ++b) {
    if (static_cast<long>(gold[b].size()) != steps) {
      throw ShapeError("neural crf: gold length mismatch in sequence " + std::to_string(b));
    }
    for (int y : gold[b]) {
      if (y < 0 || y >= labels) throw ShapeError("neural crf: gold label out of range");
    }
    chain::Matrix unary(steps, labels);
    for (long t = 0; t < steps; ++t) unary.row(t) = e.row(t * batch + b);
    const chain::ChainScores scores{unary, split.trans, split.start, split.stop};
    const chain::Marginals m = chain::ComputeMarginals(scores);
    // Non-negative in exact arithmetic; clamp away the roundoff.
    loss += std::max(0.0, m.log_z - chain::PathScore(scores, gold[b]));
    for (long t = 0; t < steps; ++t) {
      de.row(t * batch + b) += m.node.row(t);
      de(t * batch + b, gold[b][t]) -= 1.0;
    }
    dt.topLeftCorner(labels, labels) += m.edge;
    for (long t = 1; t < steps; ++t) dt(gold[b][t - 1], gold[b][t]) -= 1.0;
    dt.row(layout.Start()).head(labels) += m.node.row(0);
    dt(layout.Start(), gold[b][0]) -= 1.0;
    dt.col(layout.Stop()).head(labels) += m.node.row(steps - 1).transpose();
    dt(gold[b][steps - 1], layout.Stop()) -= 1.0;
  }
  if (!std::isfinite(loss)) throw NumericError("neural crf: non-finite loss");
  Tensor out(1, 1);
  out(0, 0) = loss;
  const int ie = emissions.id, it = transitions.id;
  return emissions.graph->Record(
      std::move(out), {ie, it},
      [ie, it, de = std::move(de), dt = std::move(dt)](Graph &g, int self) {
        const double d = g.Grad(self)(0, 0);
        if (g.RequiresGrad(ie)) g.Grad(ie) += d * de;
        if (g.RequiresGrad(it)) g.Grad(it) += d * dt;
      });
}

double NeuralCrfLogZ(const Tensor &emissions, const Tensor &transitions) {
  const Split s = SplitTransitions(transitions, static_cast<int>(emissions.cols()));
  return chain::ForwardLogZ({emissions, s.trans, s.start, s.stop});
}

std::vector<int> NeuralCrfViterbi(const Tensor &emissions, const Tensor &transitions,
                                  double *score) {
  const Split s = SplitTransitions(transitions, static_cast<int>(emissions.cols()));
  return chain::Viterbi({emissions, s.trans, s.start, s.stop}, score);
}

}  // namespace conceptag::nn
