#include "conceptag/crf/chain.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conceptag/errors.h"

namespace conceptag::chain {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void CheckShapes(const ChainScores &chain) {
  const auto labels = chain.unary.cols();
  if (chain.unary.rows() < 1) throw ShapeError("chain: at least one position required");
  if (chain.trans.rows() != labels || chain.trans.cols() != labels) {
    throw ShapeError("chain: transition matrix must be L x L");
  }
  if ((chain.start.size() && chain.start.size() != labels) ||
      (chain.stop.size() && chain.stop.size() != labels)) {
    throw ShapeError("chain: start/stop vectors must have L entries");
  }
}

}  // namespace

double LogSumExp(const double *values, int n) {
  double max = kNegInf;
  for (int i = 0; i < n; ++i) max = std::max(max, values[i]);
  if (max == kNegInf) return kNegInf;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::exp(values[i] - max);
  return max + std::log(sum);
}

double PathScore(const ChainScores &chain, const std::vector<int> &labels) {
  CheckShapes(chain);
  if (static_cast<Eigen::Index>(labels.size()) != chain.unary.rows()) {
    throw ShapeError("chain: label sequence length differs from position count");
  }
  double score = chain.Start(labels[0]) + chain.unary(0, labels[0]);
  for (size_t t = 1; t < labels.size(); ++t) {
    score += chain.trans(labels[t - 1], labels[t]) + chain.unary(t, labels[t]);
  }
  return score + chain.Stop(labels.back());
}

double ForwardLogZ(const ChainScores &chain, Matrix *alpha_out) {
  CheckShapes(chain);
  const int n = static_cast<int>(chain.unary.rows());
  const int l = static_cast<int>(chain.unary.cols());
  Matrix alpha(n, l);
  std::vector<double> buffer(l);
  for (int j = 0; j < l; ++j) alpha(0, j) = chain.Start(j) + chain.unary(0, j);
  for (int t = 1; t < n; ++t) {
    for (int j = 0; j < l; ++j) {
      for (int i = 0; i < l; ++i) buffer[i] = alpha(t - 1, i) + chain.trans(i, j);
      alpha(t, j) = LogSumExp(buffer.data(), l) + chain.unary(t, j);
    }
  }
  for (int j = 0; j < l; ++j) buffer[j] = alpha(n - 1, j) + chain.Stop(j);
  double log_z = LogSumExp(buffer.data(), l);
  if (alpha_out) *alpha_out = std::move(alpha);
  return log_z;
}

double BackwardLogZ(const ChainScores &chain, Matrix *beta_out) {
  CheckShapes(chain);
  const int n = static_cast<int>(chain.unary.rows());
  const int l = static_cast<int>(chain.unary.cols());
  Matrix beta(n, l);
  std::vector<double> buffer(l);
  for (int i = 0; i < l; ++i) beta(n - 1, i) = chain.Stop(i);
  for (int t = n - 2; t >= 0; --t) {
    for (int i = 0; i < l; ++i) {
      for (int j = 0; j < l; ++j) {
        buffer[j] = chain.trans(i, j) + chain.unary(t + 1, j) + beta(t + 1, j);
      }
      beta(t, i) = LogSumExp(buffer.data(), l);
    }
  }
  for (int j = 0; j < l; ++j) buffer[j] = chain.Start(j) + chain.unary(0, j) + beta(0, j);
  double log_z = LogSumExp(buffer.data(), l);
  if (beta_out) *beta_out = std::move(beta);
  return log_z;
}

Marginals ComputeMarginals(const ChainScores &chain) {
  Matrix alpha, beta;
  Marginals m;
  m.log_z = ForwardLogZ(chain, &alpha);
  BackwardLogZ(chain, &beta);
  if (!std::isfinite(m.log_z)) throw NumericError("chain: non-finite log-partition");
  const int n = static_cast<int>(chain.unary.rows());
  const int l = static_cast<int>(chain.unary.cols());
  m.node = ((alpha + beta).array() - m.log_z).exp().matrix();
  m.edge = Matrix::Zero(l, l);
  for (int t = 1; t < n; ++t) {
    for (int i = 0; i < l; ++i) {
      for (int j = 0; j < l; ++j) {
        m.edge(i, j) += std::exp(alpha(t - 1, i) + chain.trans(i, j) +
                                 chain.unary(t, j) + beta(t, j) - m.log_z);
      }
    }
  }
  if (!m.node.allFinite() || !m.edge.allFinite()) {
    throw NumericError("chain: non-finite marginals");
  }
  return m;
}

std::vector<int> Viterbi(const ChainScores &chain, double *score) {
  CheckShapes(chain);
  const int n = static_cast<int>(chain.unary.rows());
  const int l = static_cast<int>(chain.unary.cols());
  // best[t][j]: best score of positions t..N-1 given y_t = j, excluding
  // unary(t, j). Deciding left to right against these suffix scores and
  // keeping the first maximizer yields the lexicographically smallest
  // optimal sequence.
  Matrix best(n, l);
  for (int j = 0; j < l; ++j) best(n - 1, j) = chain.Stop(j);
  for (int t = n - 2; t >= 0; --t) {
    for (int i = 0; i < l; ++i) {
      double m = kNegInf;
      for (int j = 0; j < l; ++j) {
        m = std::max(m, chain.trans(i, j) + chain.unary(t + 1, j) + best(t + 1, j));
      }
      best(t, i) = m;
    }
  }
  std::vector<int> labels(n);
  double top = kNegInf;
  for (int j = 0; j < l; ++j) {
    double v = chain.Start(j) + chain.unary(0, j) + best(0, j);
    if (v > top) {
      top = v;
      labels[0] = j;
    }
  }
  for (int t = 1; t < n; ++t) {
    double m = kNegInf;
    for (int j = 0; j < l; ++j) {
      double v = chain.trans(labels[t - 1], j) + chain.unary(t, j) + best(t, j);
      if (v > m) {
        m = v;
        labels[t] = j;
      }
    }
  }
  if (score) *score = PathScore(chain, labels);
  return labels;
}

}  // namespace conceptag::chain
