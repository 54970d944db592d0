#ifndef CONCEPTAG_NN_AUTODIFF_H_
#define CONCEPTAG_NN_AUTODIFF_H_

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "conceptag/crf/chain.h"

namespace conceptag::nn {

// Dense 2-D row-major tensor. Vectors are 1 x n rows; batches are B x n.
using Tensor = chain::Matrix;

std::string ShapeString(const Tensor &t);

// Trainable (or frozen) tensor that outlives graphs. `grad` is accumulated
// by Graph::Backward and cleared by the optimizer.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
  bool embedding = false;  // subject to the max-norm constraint

  size_t size() const { return static_cast<size_t>(value.size()); }
};

// Owns parameters in registration order.
class ParameterStore {
 public:
  // Uniform in +-1/sqrt(fan_in).
  Parameter &Add(const std::string &name, int rows, int cols, int fan_in, std::mt19937_64 &rng);
  Parameter &AddZero(const std::string &name, int rows, int cols);
  Parameter *Find(const std::string &name);
  const Parameter *Find(const std::string &name) const;
  std::vector<Parameter *> All();
  std::vector<const Parameter *> All() const;
  size_t TotalSize() const;
  void ZeroGrad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

class Graph;

// Handle to a node of a Graph.
struct Var {
  Graph *graph = nullptr;
  int id = -1;

  const Tensor &value() const;
  long rows() const { return static_cast<long>(value().rows()); }
  long cols() const { return static_cast<long>(value().cols()); }
};

// Tape of nodes in creation order. Creation order is a topological order, so
// Backward walks it in reverse and visits each node once.
class Graph {
 public:
  explicit Graph(bool training = false) : training_(training) {}
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;

  bool training() const { return training_; }

  Var Constant(Tensor value);
  // Leaf bound to `p`. Gradients flow into p.grad when p.trainable.
  Var Param(Parameter &p);

  const Tensor &Value(int id) const;
  bool RequiresGrad(int id) const { return nodes_[id].requires_grad; }
  // Gradient buffer of a node, allocated as zeros on first use.
  Tensor &Grad(int id);

  // Registers an op result. `backward` runs once with the node's gradient
  // available via Grad(id) if any parent requires a gradient.
  Var Record(Tensor value, std::vector<int> parents, std::function<void(Graph &, int)> backward);

  // Seeds d(out)/d(out) = 1 for a 1 x 1 node and propagates.
  void Backward(Var out);
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor *view = nullptr;
    Tensor grad;
    Tensor *grad_target = nullptr;
    bool requires_grad = false;
    std::function<void(Graph &, int)> backward;
  };
  std::vector<Node> nodes_;
  bool training_;
};

// Each op throws ShapeError naming the op and the offending shapes.
Var MatMul(Var a, Var b);
Var Add(Var a, Var b);       // b is a x-shaped tensor or a 1 x cols row
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);       // elementwise
Var ScaleRows(Var x, Var s); // s is rows x 1
Var Scale(Var a, double c);
Var OneMinus(Var a);
Var Sigmoid(Var a);
Var Tanh(Var a);
Var Relu(Var a);
Var ConcatCols(const std::vector<Var> &parts);
Var ConcatRows(const std::vector<Var> &parts);
Var SliceCols(Var a, long begin, long count);
Var SliceRows(Var a, long begin, long count);
Var Softmax(Var a);          // row-wise
// Sum over rows of -log softmax(logits)[row, labels[row]]; 1 x 1.
Var SoftmaxCrossEntropy(Var logits, const std::vector<int> &labels);
// Rows are the width-`width` windows of x flattened: (T - width + 1) x (width * d).
Var Unfold(Var x, int width);
// Valid 1-D convolution over rows: Unfold(x) * filters + bias.
Var Conv1d(Var x, Var filters, Var bias, int width);
Var MaxOverTime(Var a);      // column-wise max, 1 x cols
Var MeanRows(Var a);
Var Sum(Var a);
Var AddN(const std::vector<Var> &terms);
Var Gather(Var table, const std::vector<int> &rows);
// Multiplies by a fixed mask (the dropout mask apply).
Var ApplyMask(Var a, const Tensor &mask);
// Inverted dropout; identity outside training or at rate 0.
Var Dropout(Var a, double rate, std::mt19937_64 &rng);

}  // namespace conceptag::nn

#endif  // CONCEPTAG_NN_AUTODIFF_H_
