#ifndef CONCEPTAG_TESTS_ORACLES_NN_ORACLE_H_
#define CONCEPTAG_TESTS_ORACLES_NN_ORACLE_H_

// Scalar-loop reference implementations of one recurrent step and of the
// char-CNN encoder. Weights use the library's storage convention
// (input x gate-blocks, row-major) but nothing else from it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace conceptag::oracle {

using Flat = std::vector<double>;  // row-major matrix with known column count

inline double Sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// sum_i x[i] * W[i][col]
inline double Dot(const Flat &x, const Flat &w, int cols, int col) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * w[i * cols + col];
  return s;
}

inline Flat ElmanStep(const Flat &x, const Flat &h, const Flat &w, const Flat &u, const Flat &b) {
  const int n = static_cast<int>(h.size());
  Flat out(n);
  for (int j = 0; j < n; ++j) out[j] = std::tanh(Dot(x, w, n, j) + Dot(h, u, n, j) + b[j]);
  return out;
}

// u holds the z and r blocks (H x 2H); un is H x H.
inline Flat GruStep(const Flat &x, const Flat &h, const Flat &w, const Flat &u, const Flat &un,
                    const Flat &b) {
  const int n = static_cast<int>(h.size());
  Flat z(n), r(n), rh(n), out(n);
  for (int j = 0; j < n; ++j) {
    z[j] = Sig(Dot(x, w, 3 * n, j) + Dot(h, u, 2 * n, j) + b[j]);
    r[j] = Sig(Dot(x, w, 3 * n, n + j) + Dot(h, u, 2 * n, n + j) + b[n + j]);
  }
  for (int j = 0; j < n; ++j) rh[j] = r[j] * h[j];
  for (int j = 0; j < n; ++j) {
    const double cand = std::tanh(Dot(x, w, 3 * n, 2 * n + j) + Dot(rh, un, n, j) + b[2 * n + j]);
    out[j] = (1.0 - z[j]) * h[j] + z[j] * cand;
  }
  return out;
}

// Gate blocks i, f, o, g. Returns {h', c'}.
inline std::pair<Flat, Flat> LstmStep(const Flat &x, const Flat &h, const Flat &c, const Flat &w,
                                      const Flat &u, const Flat &b) {
  const int n = static_cast<int>(h.size());
  Flat hn(n), cn(n);
  for (int j = 0; j < n; ++j) {
    auto pre = [&](int block) {
      return Dot(x, w, 4 * n, block * n + j) + Dot(h, u, 4 * n, block * n + j) + b[block * n + j];
    };
    const double i = Sig(pre(0)), f = Sig(pre(1)), o = Sig(pre(2)), g = std::tanh(pre(3));
    cn[j] = f * c[j] + i * g;
    hn[j] = o * std::tanh(cn[j]);
  }
  return {hn, cn};
}

// table: chars x dim; kernel: (3 * dim) x filters; right-pads with id 0.
inline Flat CharConvEmbed(std::vector<int> ids, const Flat &table, int dim, const Flat &kernel,
                          const Flat &bias, int filters) {
  while (ids.size() < 3) ids.push_back(0);
  Flat out(filters, -std::numeric_limits<double>::infinity());
  for (size_t start = 0; start + 3 <= ids.size(); ++start) {
    for (int f = 0; f < filters; ++f) {
      double s = bias[f];
      for (int k = 0; k < 3; ++k) {
        for (int d = 0; d < dim; ++d) {
          s += table[ids[start + k] * dim + d] * kernel[(k * dim + d) * filters + f];
        }
      }
      out[f] = std::max(out[f], s);
    }
  }
  return out;
}

}  // namespace conceptag::oracle

#endif  // CONCEPTAG_TESTS_ORACLES_NN_ORACLE_H_
