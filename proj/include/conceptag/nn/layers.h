#ifndef CONCEPTAG_NN_LAYERS_H_
#define CONCEPTAG_NN_LAYERS_H_

#include <random>
#include <string>
#include <vector>

#include "conceptag/nn/autodiff.h"

namespace conceptag::nn {

enum class CellKind { kElman, kGru, kLstm };

struct CellState {
  Var h;
  Var c;  // LSTM only
};

// Recurrent cell over row-major batches (x: B x input, h: B x hidden).
// Weight matrices are stored input x gates, so x W plays the role of W x.
//   elman: h' = tanh(x W + h U + b)
//   gru:   z = s(x Wz + h Uz + bz), r = s(x Wr + h Ur + br),
//          n = tanh(x Wn + (r * h) Un + bn), h' = (1 - z) * h + z * n
//   lstm:  [i f o g] = x W + h U + b; c' = s(f) * c + s(i) * tanh(g);
//          h' = s(o) * tanh(c')
// Gate blocks are laid out left to right in the order written above.
class Cell {
 public:
  Cell() = default;
  Cell(CellKind kind, int input, int hidden, ParameterStore &store, const std::string &prefix,
       std::mt19937_64 &rng);

  CellKind kind() const { return kind_; }
  int input() const { return input_; }
  int hidden() const { return hidden_; }
  int Gates() const;

  CellState Zero(Graph &g, long batch) const;
  CellState Step(Graph &g, Var x, const CellState &state) const;

  Parameter *w = nullptr;  // input x gates*hidden
  Parameter *u = nullptr;  // hidden x gates*hidden (gru: z and r blocks only)
  Parameter *un = nullptr; // gru only: hidden x hidden
  Parameter *b = nullptr;  // 1 x gates*hidden

 private:
  CellKind kind_ = CellKind::kLstm;
  int input_ = 0;
  int hidden_ = 0;
};

// Character vocabulary ids.
inline constexpr int kCharPad = 0;
inline constexpr int kCharUnknown = 1;
inline constexpr int kCharWidth = 3;

// Char-CNN word encoder: embeds character ids, right-pads to the kernel
// width with kCharPad, convolves with width-3 filters and max-pools over
// time. Throws ParameterError on an empty word.
class CharConv {
 public:
  CharConv() = default;
  CharConv(int chars, int char_dim, int filters, ParameterStore &store, const std::string &prefix,
           std::mt19937_64 &rng);

  int filters() const { return filters_; }
  Var Embed(Graph &g, const std::vector<int> &char_ids) const;

  Parameter *table = nullptr;    // chars x char_dim
  Parameter *kernel = nullptr;   // (3 * char_dim) x filters
  Parameter *bias = nullptr;     // 1 x filters

 private:
  int filters_ = 0;
};

// Neural CRF transition layout over L labels: an (L+2) x (L+2) matrix whose
// index L is the start state and L+1 the stop state. Entries into start and
// out of stop are unused.
struct CrfLayout {
  int labels;
  int Start() const { return labels; }
  int Stop() const { return labels + 1; }
};

// Sum over the B sequences of [logZ - gold score]. `emissions` is
// time-major: row t*B + b holds position t of sequence b. All sequences have
// length gold[b].size() == T. Returns a 1 x 1 node.
Var NeuralCrfLoss(Var emissions, Var transitions, const std::vector<std::vector<int>> &gold);

// Log-partition and best path of one N x L emission matrix under the same
// start/stop convention. Ties resolve to the lexicographically smallest path.
double NeuralCrfLogZ(const Tensor &emissions, const Tensor &transitions);
std::vector<int> NeuralCrfViterbi(const Tensor &emissions, const Tensor &transitions,
                                  double *score = nullptr);

}  // namespace conceptag::nn

#endif  // CONCEPTAG_NN_LAYERS_H_
