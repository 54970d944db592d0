#ifndef CONCEPTAG_TESTS_ORACLES_CHAIN_ORACLE_H_
#define CONCEPTAG_TESTS_ORACLES_CHAIN_ORACLE_H_

// Exhaustive enumeration over all L^N label sequences of a linear chain.
// Plain nested vectors, no dependency on the library's matrix types.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace conceptag::oracle {

using Grid = std::vector<std::vector<double>>;

struct BruteChain {
  Grid unary;                // N x L
  Grid trans;                // L x L
  std::vector<double> start; // L or empty
  std::vector<double> stop;  // L or empty
};

inline double BruteScore(const BruteChain &c, const std::vector<int> &y) {
  double s = (c.start.empty() ? 0.0 : c.start[y[0]]) + c.unary[0][y[0]];
  for (size_t t = 1; t < y.size(); ++t) s += c.trans[y[t - 1]][y[t]] + c.unary[t][y[t]];
  return s + (c.stop.empty() ? 0.0 : c.stop[y.back()]);
}

// Visits sequences in lexicographic order of label ids.
inline void ForEachSequence(size_t n, int labels, const std::function<void(const std::vector<int> &)> &f) {
  std::vector<int> y(n, 0);
  while (true) {
    f(y);
    size_t i = n;
    while (i > 0 && y[i - 1] == labels - 1) y[--i] = 0;
    if (i == 0) return;
    ++y[i - 1];
  }
}

struct BruteResult {
  double log_z = 0.0;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<int> best;               // first maximizer in lexicographic order
  Grid node;                           // posterior marginals
};

inline BruteResult Enumerate(const BruteChain &c) {
  const size_t n = c.unary.size();
  const int l = static_cast<int>(c.unary[0].size());
  std::vector<std::pair<std::vector<int>, double>> all;
  BruteResult r;
  ForEachSequence(n, l, [&](const std::vector<int> &y) {
    const double s = BruteScore(c, y);
    all.emplace_back(y, s);
    if (s > r.best_score) {
      r.best_score = s;
      r.best = y;
    }
  });
  double sum = 0.0;
  for (const auto &[y, s] : all) sum += std::exp(s - r.best_score);
  r.log_z = r.best_score + std::log(sum);
  r.node.assign(n, std::vector<double>(l, 0.0));
  for (const auto &[y, s] : all) {
    const double p = std::exp(s - r.log_z);
    for (size_t t = 0; t < n; ++t) r.node[t][y[t]] += p;
  }
  return r;
}

inline BruteChain RandomChain(std::mt19937_64 &rng, size_t n, int labels, bool boundaries,
                              double scale = 2.0) {
  std::normal_distribution<double> normal(0.0, scale);
  BruteChain c;
  c.unary.assign(n, std::vector<double>(labels));
  c.trans.assign(labels, std::vector<double>(labels));
  for (auto &row : c.unary) for (double &v : row) v = normal(rng);
  for (auto &row : c.trans) for (double &v : row) v = normal(rng);
  if (boundaries) {
    c.start.resize(labels);
    c.stop.resize(labels);
    for (double &v : c.start) v = normal(rng);
    for (double &v : c.stop) v = normal(rng);
  }
  return c;
}

// Small-integer scores so that ties are frequent and sums exact.
inline BruteChain TiedChain(std::mt19937_64 &rng, size_t n, int labels) {
  std::uniform_int_distribution<int> pick(0, 1);
  BruteChain c;
  c.unary.assign(n, std::vector<double>(labels));
  c.trans.assign(labels, std::vector<double>(labels));
  for (auto &row : c.unary) for (double &v : row) v = pick(rng);
  for (auto &row : c.trans) for (double &v : row) v = pick(rng);
  return c;
}

// Central differences of f at x along coordinate i.
inline double CentralDifference(const std::function<double(const std::vector<double> &)> &f,
                                std::vector<double> x, size_t i, double step) {
  const double x0 = x[i];
  x[i] = x0 + step;
  const double plus = f(x);
  x[i] = x0 - step;
  const double minus = f(x);
  return (plus - minus) / (2.0 * step);
}

inline double RelativeError(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::max(std::abs(analytic), std::abs(numeric)));
}

}  // namespace conceptag::oracle

#endif  // CONCEPTAG_TESTS_ORACLES_CHAIN_ORACLE_H_
