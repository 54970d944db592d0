#ifndef CONCEPTAG_CRF_CHAIN_H_
#define CONCEPTAG_CRF_CHAIN_H_

#include <vector>

#include <Eigen/Dense>

namespace conceptag::chain {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Scores of a first-order chain over N positions and L labels:
//   score(y) = start[y0] + sum_t unary(t, y_t) + sum_t trans(y_{t-1}, y_t)
//            + stop[y_{N-1}]
// `start` and `stop` may be empty, meaning all zeros.
struct ChainScores {
  const Matrix &unary;   // N x L
  const Matrix &trans;   // L x L, row = previous label
  const Vector &start;   // L or empty
  const Vector &stop;    // L or empty

  double Start(int y) const { return start.size() ? start[y] : 0.0; }
  double Stop(int y) const { return stop.size() ? stop[y] : 0.0; }
};

// Stand-in for absent start/stop vectors.
inline const Vector kNoBoundary;

double LogSumExp(const double *values, int n);

// Score of a single label sequence.
double PathScore(const ChainScores &chain, const std::vector<int> &labels);

// Log-partition by the forward recursion; fills alpha (N x L) if given.
double ForwardLogZ(const ChainScores &chain, Matrix *alpha = nullptr);
// Log-partition by the backward recursion; fills beta (N x L) if given.
double BackwardLogZ(const ChainScores &chain, Matrix *beta = nullptr);

struct Marginals {
  double log_z = 0.0;
  Matrix node;  // N x L, P(y_t = j)
  Matrix edge;  // L x L, sum over t of P(y_{t-1} = i, y_t = j)
};

// Forward-backward posteriors. Throws NumericError on non-finite values.
Marginals ComputeMarginals(const ChainScores &chain);

// Highest-scoring label sequence. Among equal scores the lexicographically
// smallest label-id sequence wins. `score` receives the path score if given.
std::vector<int> Viterbi(const ChainScores &chain, double *score = nullptr);

}  // namespace conceptag::chain

#endif  // CONCEPTAG_CRF_CHAIN_H_
