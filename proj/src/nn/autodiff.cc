#include "conceptag/nn/autodiff.h"

#include <algorithm>
#include <cmath>

#include "conceptag/errors.h"

namespace conceptag::nn {
namespace {

[[noreturn]] void ShapeFail(const char *op, const Tensor &a, const Tensor &b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + ShapeString(a) + " and " +
                   ShapeString(b));
}

Graph &GraphOf(Var v) {
  if (!v.graph) throw Error("autodiff: unbound variable");
  return *v.graph;
}

Graph &GraphOf(const std::vector<Var> &vs, const char *op) {
  if (vs.empty()) throw ShapeError(std::string(op) + ": no inputs");
  return GraphOf(vs[0]);
}

// Adds `delta` to the gradient of node `id` if it requires one.
void Accumulate(Graph &g, int id, const Tensor &delta) {
  if (g.RequiresGrad(id)) g.Grad(id) += delta;
}

template <typename F>
Var Unary(Var a, Tensor value, F local) {
  const int ia = a.id;
  return GraphOf(a).Record(std::move(value), {ia}, [ia, local](Graph &g, int self) {
    if (!g.RequiresGrad(ia)) return;
    g.Grad(ia).array() += g.Grad(self).array() * local(g.Value(ia), g.Value(self)).array();
  });
}

}  // namespace

std::string ShapeString(const Tensor &t) {
  return "(" + std::to_string(t.rows()) + "," + std::to_string(t.cols()) + ")";
}

Parameter &ParameterStore::Add(const std::string &name, int rows, int cols, int fan_in,
                               std::mt19937_64 &rng) {
  Parameter &p = AddZero(name, rows, cols);
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, fan_in)));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  for (long i = 0; i < p.value.size(); ++i) p.value.data()[i] = uniform(rng);
  return p;
}

Parameter &ParameterStore::AddZero(const std::string &name, int rows, int cols) {
  if (Find(name)) throw ParameterError("duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Tensor::Zero(rows, cols);
  p->grad = Tensor::Zero(rows, cols);
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter *ParameterStore::Find(const std::string &name) {
  for (auto &p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter *ParameterStore::Find(const std::string &name) const {
  for (const auto &p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

std::vector<Parameter *> ParameterStore::All() {
  std::vector<Parameter *> out;
  for (auto &p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter *> ParameterStore::All() const {
  std::vector<const Parameter *> out;
  for (const auto &p : params_) out.push_back(p.get());
  return out;
}

size_t ParameterStore::TotalSize() const {
  size_t total = 0;
  for (const auto &p : params_) total += p->size();
  return total;
}

void ParameterStore::ZeroGrad() {
  for (auto &p : params_) p->grad.setZero();
}

const Tensor &Var::value() const { return GraphOf(*this).Value(id); }

Var Graph::Constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::Param(Parameter &p) {
  Node n;
  n.view = &p.value;
  if (p.trainable) {
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
      p.grad = Tensor::Zero(p.value.rows(), p.value.cols());
    }
    n.grad_target = &p.grad;
    n.requires_grad = true;
  }
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

const Tensor &Graph::Value(int id) const {
  const Node &n = nodes_.at(id);
  return n.view ? *n.view : n.value;
}

Tensor &Graph::Grad(int id) {
  Node &n = nodes_[id];
  if (n.grad_target) return *n.grad_target;
  if (n.grad.size() == 0) {
    const Tensor &v = Value(id);
    n.grad = Tensor::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

Var Graph::Record(Tensor value, std::vector<int> parents,
                  std::function<void(Graph &, int)> backward) {
  Node n;
  n.value = std::move(value);
  for (int p : parents) n.requires_grad = n.requires_grad || nodes_.at(p).requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

void Graph::Backward(Var out) {
  if (out.graph != this) throw Error("autodiff: variable from another graph");
  const Tensor &v = Value(out.id);
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeError("backward: output must be 1 x 1, got " + ShapeString(v));
  }
  if (!nodes_[out.id].requires_grad) return;
  Grad(out.id)(0, 0) += 1.0;
  for (int id = out.id; id >= 0; --id) {
    Node &n = nodes_[id];
    if (!n.backward) continue;
    if (!n.grad_target && n.grad.size() == 0) continue;  // no gradient reached it
    n.backward(*this, id);
  }
}

Var MatMul(Var a, Var b) {
  const Tensor &x = a.value(), &y = b.value();
  if (x.cols() != y.rows()) ShapeFail("matmul", x, y);
  const int ia = a.id, ib = b.id;
  return GraphOf(a).Record(x * y, {ia, ib}, [ia, ib](Graph &g, int self) {
    const Tensor &d = g.Grad(self);
    if (g.RequiresGrad(ia)) g.Grad(ia).noalias() += d * g.Value(ib).transpose();
    if (g.RequiresGrad(ib)) g.Grad(ib).noalias() += g.Value(ia).transpose() * d;
  });
}

Var Add(Var a, Var b) {
  const Tensor &x = a.value(), &y = b.value();
  const int ia = a.id, ib = b.id;
  if (x.rows() == y.rows() && x.cols() == y.cols()) {
    return GraphOf(a).Record(x + y, {ia, ib}, [ia, ib](Graph &g, int self) {
      Accumulate(g, ia, g.Grad(self));
      Accumulate(g, ib, g.Grad(self));
    });
  }
  if (y.rows() != 1 || y.cols() != x.cols()) ShapeFail("add", x, y);
  Tensor out = x.rowwise() + y.row(0);
  return GraphOf(a).Record(std::move(out), {ia, ib}, [ia, ib](Graph &g, int self) {
    Accumulate(g, ia, g.Grad(self));
    if (g.RequiresGrad(ib)) g.Grad(ib) += g.Grad(self).colwise().sum();
  });
}

Var Sub(Var a, Var b) {
  const Tensor &x = a.value(), &y = b.value();
  if (x.rows() != y.rows() || x.cols() != y.cols()) ShapeFail("sub", x, y);
  const int ia = a.id, ib = b.id;
  return GraphOf(a).Record(x - y, {ia, ib}, [ia, ib](Graph &g, int self) {
    Accumulate(g, ia, g.Grad(self));
    if (g.RequiresGrad(ib)) g.Grad(ib) -= g.Grad(self);
  });
}

Var Mul(Var a, Var b) {
  const Tensor &x = a.value(), &y = b.value();
  if (x.rows() != y.rows() || x.cols() != y.cols()) ShapeFail("mul", x, y);
  const int ia = a.id, ib = b.id;
  Tensor out = x.cwiseProduct(y);
  return GraphOf(a).Record(std::move(out), {ia, ib}, [ia, ib](Graph &g, int self) {
    const Tensor &d = g.Grad(self);
    if (g.RequiresGrad(ia)) g.Grad(ia) += d.cwiseProduct(g.Value(ib));
    if (g.RequiresGrad(ib)) g.Grad(ib) += d.cwiseProduct(g.Value(ia));
  });
}

Var ScaleRows(Var x, Var s) {
  const Tensor &v = x.value(), &w = s.value();
  if (w.cols() != 1 || w.rows() != v.rows()) ShapeFail("scale_rows", v, w);
  const int ix = x.id, is = s.id;
  Tensor out = v.array().colwise() * w.col(0).array();
  return GraphOf(x).Record(std::move(out), {ix, is}, [ix, is](Graph &g, int self) {
    const Tensor &d = g.Grad(self);
    if (g.RequiresGrad(ix)) {
      g.Grad(ix).array() += d.array().colwise() * g.Value(is).col(0).array();
    }
    if (g.RequiresGrad(is)) {
      g.Grad(is).col(0) += d.cwiseProduct(g.Value(ix)).rowwise().sum();
    }
  });
}

Var Scale(Var a, double c) {
  const int ia = a.id;
  return GraphOf(a).Record(a.value() * c, {ia}, [ia, c](Graph &g, int self) {
    if (g.RequiresGrad(ia)) g.Grad(ia) += c * g.Grad(self);
  });
}

Var OneMinus(Var a) {
  const int ia = a.id;
  Tensor out = (1.0 - a.value().array()).matrix();
  return GraphOf(a).Record(std::move(out), {ia}, [ia](Graph &g, int self) {
    if (g.RequiresGrad(ia)) g.Grad(ia) -= g.Grad(self);
  });
}

Var Sigmoid(Var a) {
  Tensor out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return Unary(a, std::move(out), [](const Tensor &, const Tensor &y) {
    return Tensor(y.array() * (1.0 - y.array()));
  });
}

Var Tanh(Var a) {
  Tensor out = a.value().array().tanh().matrix();
  return Unary(a, std::move(out), [](const Tensor &, const Tensor &y) {
    return Tensor(1.0 - y.array().square());
  });
}

Var Relu(Var a) {
  Tensor out = a.value().cwiseMax(0.0);
  return Unary(a, std::move(out), [](const Tensor &x, const Tensor &) {
    return Tensor((x.array() > 0.0).cast<double>());
  });
}

Var ConcatCols(const std::vector<Var> &parts) {
  Graph &graph = GraphOf(parts, "concat_cols");
  const long rows = parts[0].rows();
  long cols = 0;
  for (const Var &p : parts) {
    if (p.rows() != rows) ShapeFail("concat_cols", parts[0].value(), p.value());
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::vector<int> ids;
  std::vector<long> offsets;
  long at = 0;
  for (const Var &p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    ids.push_back(p.id);
    offsets.push_back(at);
    at += p.cols();
  }
  return graph.Record(std::move(out), ids, [ids, offsets](Graph &g, int self) {
    for (size_t k = 0; k < ids.size(); ++k) {
      if (!g.RequiresGrad(ids[k])) continue;
      Tensor &d = g.Grad(ids[k]);
      d += g.Grad(self).middleCols(offsets[k], d.cols());
    }
  });
}

Var ConcatRows(const std::vector<Var> &parts) {
  Graph &graph = GraphOf(parts, "concat_rows");
  const long cols = parts[0].cols();
  long rows = 0;
  for (const Var &p : parts) {
    if (p.cols() != cols) ShapeFail("concat_rows", parts[0].value(), p.value());
    rows += p.rows();
  }
  Tensor out(rows, cols);
  std::vector<int> ids;
  std::vector<long> offsets;
  long at = 0;
  for (const Var &p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    ids.push_back(p.id);
    offsets.push_back(at);
    at += p.rows();
  }
  return graph.Record(std::move(out), ids, [ids, offsets](Graph &g, int self) {
    for (size_t k = 0; k < ids.size(); ++k) {
      if (!g.RequiresGrad(ids[k])) continue;
      Tensor &d = g.Grad(ids[k]);
      d += g.Grad(self).middleRows(offsets[k], d.rows());
    }
  });
}

Var SliceCols(Var a, long begin, long count) {
  const Tensor &v = a.value();
  if (begin < 0 || count < 1 || begin + count > v.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + ShapeString(v));
  }
  const int ia = a.id;
  return GraphOf(a).Record(v.middleCols(begin, count), {ia}, [ia, begin, count](Graph &g, int self) {
    if (g.RequiresGrad(ia)) g.Grad(ia).middleCols(begin, count) += g.Grad(self);
  });
}

Var SliceRows(Var a, long begin, long count) {
  const Tensor &v = a.value();
  if (begin < 0 || count < 1 || begin + count > v.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + ShapeString(v));
  }
  const int ia = a.id;
  return GraphOf(a).Record(v.middleRows(begin, count), {ia}, [ia, begin, count](Graph &g, int self) {
    if (g.RequiresGrad(ia)) g.Grad(ia).middleRows(begin, count) += g.Grad(self);
  });
}

Var Softmax(Var a) {
  const Tensor &x = a.value();
  Tensor out(x.rows(), x.cols());
  for (long r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  const int ia = a.id;
  return GraphOf(a).Record(std::move(out), {ia}, [ia](Graph &g, int self) {
    if (!g.RequiresGrad(ia)) return;
    const Tensor &y = g.Value(self);
    const Tensor &d = g.Grad(self);
    Tensor &da = g.Grad(ia);
    for (long r = 0; r < y.rows(); ++r) {
      const double dot = d.row(r).dot(y.row(r));
      da.row(r).array() += y.row(r).array() * (d.row(r).array() - dot);
    }
  });
}

Var SoftmaxCrossEntropy(Var logits, const std::vector<int> &labels) {
  const Tensor &x = logits.value();
  if (static_cast<long>(labels.size()) != x.rows()) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for logits " + ShapeString(x));
  }
  Tensor probs(x.rows(), x.cols());
  double loss = 0.0;
  for (long r = 0; r < x.rows(); ++r) {
    const int y = labels[r];
    if (y < 0 || y >= x.cols()) throw ShapeError("softmax_cross_entropy: label out of range");
    const double m = x.row(r).maxCoeff();
    probs.row(r) = (x.row(r).array() - m).exp().matrix();
    const double z = probs.row(r).sum();
    probs.row(r) /= z;
    loss += m + std::log(z) - x(r, y);
  }
  Tensor out(1, 1);
  out(0, 0) = loss;
  const int ia = logits.id;
  return GraphOf(logits).Record(std::move(out), {ia},
                                [ia, probs = std::move(probs), labels](Graph &g, int self) {
    if (!g.RequiresGrad(ia)) return;
    const double d = g.Grad(self)(0, 0);
    Tensor &dx = g.Grad(ia);
    dx += d * probs;
    for (size_t r = 0; r < labels.size(); ++r) dx(r, labels[r]) -= d;
  });
}

Var Unfold(Var x, int width) {
  const Tensor &v = x.value();
  if (width < 1 || v.rows() < width) {
    throw ShapeError("unfold: width " + std::to_string(width) + " exceeds rows of " +
                     ShapeString(v));
  }
  const long windows = v.rows() - width + 1, d = v.cols();
  Tensor out(windows, width * d);
  for (long r = 0; r < windows; ++r) {
    for (int k = 0; k < width; ++k) out.row(r).segment(k * d, d) = v.row(r + k);
  }
  const int ix = x.id;
  return GraphOf(x).Record(std::move(out), {ix}, [ix, width, windows, d](Graph &g, int self) {
    if (!g.RequiresGrad(ix)) return;
    const Tensor &dy = g.Grad(self);
    Tensor &dx = g.Grad(ix);
    for (long r = 0; r < windows; ++r) {
      for (int k = 0; k < width; ++k) dx.row(r + k) += dy.row(r).segment(k * d, d);
    }
  });
}

Var Conv1d(Var x, Var filters, Var bias, int width) {
  return Add(MatMul(Unfold(x, width), filters), bias);
}

Var MaxOverTime(Var a) {
  const Tensor &x = a.value();
  if (x.rows() < 1) throw ShapeError("max_over_time: empty input " + ShapeString(x));
  Tensor out(1, x.cols());
  std::vector<long> argmax(x.cols());
  for (long c = 0; c < x.cols(); ++c) {
    long best = 0;
    for (long r = 1; r < x.rows(); ++r) {
      if (x(r, c) > x(best, c)) best = r;
    }
    argmax[c] = best;
    out(0, c) = x(best, c);
  }
  const int ia = a.id;
  return GraphOf(a).Record(std::move(out), {ia}, [ia, argmax](Graph &g, int self) {
    if (!g.RequiresGrad(ia)) return;
    Tensor &dx = g.Grad(ia);
    const Tensor &dy = g.Grad(self);
    for (size_t c = 0; c < argmax.size(); ++c) dx(argmax[c], c) += dy(0, c);
  });
}

Var MeanRows(Var a) {
  const Tensor &x = a.value();
  if (x.rows() < 1) throw ShapeError("mean_rows: empty input " + ShapeString(x));
  const long n = x.rows();
  const int ia = a.id;
  Tensor out = x.colwise().mean();
  return GraphOf(a).Record(std::move(out), {ia}, [ia, n](Graph &g, int self) {
    if (g.RequiresGrad(ia)) g.Grad(ia).rowwise() += g.Grad(self).row(0) / static_cast<double>(n);
  });
}

Var Sum(Var a) {
  Tensor out(1, 1);
  out(0, 0) = a.value().sum();
  const int ia = a.id;
  return GraphOf(a).Record(std::move(out), {ia}, [ia](Graph &g, int self) {
    if (g.RequiresGrad(ia)) g.Grad(ia).array() += g.Grad(self)(0, 0);
  });
}

Var AddN(const std::vector<Var> &terms) {
  Graph &graph = GraphOf(terms, "add_n");
  Tensor out = terms[0].value();
  std::vector<int> ids{terms[0].id};
  for (size_t k = 1; k < terms.size(); ++k) {
    const Tensor &v = terms[k].value();
    if (v.rows() != out.rows() || v.cols() != out.cols()) ShapeFail("add_n", out, v);
    out += v;
    ids.push_back(terms[k].id);
  }
  return graph.Record(std::move(out), ids, [ids](Graph &g, int self) {
    for (int id : ids) Accumulate(g, id, g.Grad(self));
  });
}

Var Gather(Var table, const std::vector<int> &rows) {
  const Tensor &t = table.value();
  Tensor out(static_cast<long>(rows.size()), t.cols());
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= t.rows()) {
      throw ShapeError("gather: row " + std::to_string(rows[r]) + " outside " + ShapeString(t));
    }
    out.row(r) = t.row(rows[r]);
  }
  if (rows.empty()) throw ShapeError("gather: no rows requested");
  const int it = table.id;
  return GraphOf(table).Record(std::move(out), {it}, [it, rows](Graph &g, int self) {
    if (!g.RequiresGrad(it)) return;
    Tensor &dt = g.Grad(it);
    const Tensor &dy = g.Grad(self);
    for (size_t r = 0; r < rows.size(); ++r) dt.row(rows[r]) += dy.row(r);
  });
}

Var ApplyMask(Var a, const Tensor &mask) {
  const Tensor &x = a.value();
  if (x.rows() != mask.rows() || x.cols() != mask.cols()) ShapeFail("apply_mask", x, mask);
  const int ia = a.id;
  Tensor out = x.cwiseProduct(mask);
  return GraphOf(a).Record(std::move(out), {ia}, [ia, mask](Graph &g, int self) {
    if (g.RequiresGrad(ia)) g.Grad(ia) += g.Grad(self).cwiseProduct(mask);
  });
}

Var Dropout(Var a, double rate, std::mt19937_64 &rng) {
  if (!GraphOf(a).training() || rate <= 0.0) return a;
  if (rate >= 1.0) throw ParameterError("dropout: rate must be < 1");
  std::bernoulli_distribution keep(1.0 - rate);
  Tensor mask(a.rows(), a.cols());
  const double scale = 1.0 / (1.0 - rate);
  for (long i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale : 0.0;
  return ApplyMask(a, mask);
}

}  // namespace conceptag::nn
