#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "minihes/curvature.hpp"
#include "minihes/data.hpp"
#include "minihes/model.hpp"

// Dense brute-force references used for verification only. Everything here
// is O(n^2) or worse and guarded by a size cap.
namespace minihes::verify {

struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), values(std::size_t(r) * c) {}

  double& at(int r, int c) { return values[std::size_t(r) * cols + c]; }
  double at(int r, int c) const { return values[std::size_t(r) * cols + c]; }

  std::vector<double> matvec(const std::vector<double>& x) const {
    std::vector<double> y(rows, 0.0);
    for (int r = 0; r < rows; ++r) {
      double s = 0.0;
      for (int c = 0; c < cols; ++c) s += at(r, c) * x[c];
      y[r] = s;
    }
    return y;
  }
};

inline constexpr int kDefaultSizeCap = 200;

namespace detail {

inline void check_cap(const FactorState& s, int cap) {
  long long dim = static_cast<long long>(s.entity_count()) * s.f;
  if (dim > cap)
    throw std::invalid_argument("oracle: problem dimension " +
                                std::to_string(dim) + " exceeds cap " +
                                std::to_string(cap));
}

}  // namespace detail

// Exact Hessian of the regularized loss, assembled blockwise:
// per-entity diagonal blocks, user-item coupling blocks where the pair is
// observed, zero elsewhere. Assembled symmetrically.
inline DenseMatrix dense_hessian(const FactorState& s, const HdiDataset& data,
                                 double lambda, int cap = kDefaultSizeCap) {
  detail::check_cap(s, cap);
  const int f = s.f;
  const int n = s.entity_count() * f;
  DenseMatrix h(n, n);

  // entity diagonal blocks: sum over the entity's observations of
  // (counterpart outer product + lambda * I)
  for (int e = 0; e < s.entity_count(); ++e) {
    const auto& adj = entity_adjacency(data, s.num_users, e);
    for (const auto& [other, rating] : adj) {
      int counterpart = e < s.num_users ? s.num_users + other : other;
      auto xo = s.block(counterpart);
      for (int a = 0; a < f; ++a) {
        for (int b = 0; b < f; ++b)
          h.at(e * f + a, e * f + b) += xo[a] * xo[b];
        h.at(e * f + a, e * f + a) += lambda;
      }
    }
  }

  // user-item coupling blocks for observed pairs
  for (const auto& entry : data.entries) {
    auto xu = s.user(entry.user_id);
    auto xi = s.item(entry.item_id);
    double residual_term = -entry.rating + dot(xu, xi);
    int ur = entry.user_id * f;
    int ic = (s.num_users + entry.item_id) * f;
    for (int a = 0; a < f; ++a) {
      for (int b = 0; b < f; ++b) {
        double v = xu[b] * xi[a];
        if (a == b) v += residual_term;
        h.at(ur + a, ic + b) += v;
        h.at(ic + b, ur + a) += v;
      }
    }
  }
  return h;
}

// |R_K| x (|U|+|I|)f Jacobian of the prediction map: row per observation,
// counterpart factors in the entity columns.
inline DenseMatrix dense_jacobian(const FactorState& s, const HdiDataset& data,
                                  int cap = kDefaultSizeCap) {
  detail::check_cap(s, cap);
  const int f = s.f;
  DenseMatrix j(static_cast<int>(data.entries.size()), s.entity_count() * f);
  for (std::size_t row = 0; row < data.entries.size(); ++row) {
    const auto& e = data.entries[row];
    auto xu = s.user(e.user_id);
    auto xi = s.item(e.item_id);
    for (int d = 0; d < f; ++d) {
      j.at(static_cast<int>(row), e.user_id * f + d) = xi[d];
      j.at(static_cast<int>(row), (s.num_users + e.item_id) * f + d) = xu[d];
    }
  }
  return j;
}

inline DenseMatrix dense_gauss_newton(const FactorState& s,
                                      const HdiDataset& data,
                                      int cap = kDefaultSizeCap) {
  DenseMatrix j = dense_jacobian(s, data, cap);
  DenseMatrix g(j.cols, j.cols);
  for (int r = 0; r < j.rows; ++r)
    for (int a = 0; a < j.cols; ++a) {
      double ja = j.at(r, a);
      if (ja == 0.0) continue;
      for (int b = 0; b < j.cols; ++b) g.at(a, b) += ja * j.at(r, b);
    }
  return g;
}

struct OffdiagMass {
  double diag_block_norm = 0.0;
  double offdiag_norm = 0.0;
};

// Frobenius norm of the per-entity block-diagonal part of the exact Hessian
// vs everything else. Diagnostic for diagonal dominance.
inline OffdiagMass hessian_offdiag_mass(const FactorState& s,
                                        const HdiDataset& data, double lambda,
                                        int cap = kDefaultSizeCap) {
  DenseMatrix h = dense_hessian(s, data, lambda, cap);
  const int f = s.f;
  double diag_sq = 0.0, off_sq = 0.0;
  for (int r = 0; r < h.rows; ++r)
    for (int c = 0; c < h.cols; ++c) {
      double v = h.at(r, c);
      if (r / f == c / f)
        diag_sq += v * v;
      else
        off_sq += v * v;
    }
  return {std::sqrt(diag_sq), std::sqrt(off_sq)};
}

// Central finite differences of the loss.
inline BlockVector fd_gradient(const FactorState& s, const HdiDataset& data,
                               double lambda, double step = 1e-6) {
  FactorState probe = s;
  BlockVector g(s.dim(), 0.0);
  for (std::size_t k = 0; k < s.dim(); ++k) {
    double saved = probe.values[k];
    probe.values[k] = saved + step;
    double up = loss(probe, data, lambda);
    probe.values[k] = saved - step;
    double down = loss(probe, data, lambda);
    probe.values[k] = saved;
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

// Central finite differences of the analytic gradient.
inline DenseMatrix fd_hessian(const FactorState& s, const HdiDataset& data,
                              double lambda, double step = 1e-5,
                              int cap = kDefaultSizeCap) {
  detail::check_cap(s, cap);
  const int n = static_cast<int>(s.dim());
  DenseMatrix h(n, n);
  FactorState probe = s;
  for (int k = 0; k < n; ++k) {
    double saved = probe.values[k];
    probe.values[k] = saved + step;
    BlockVector up = gradient(probe, data, lambda);
    probe.values[k] = saved - step;
    BlockVector down = gradient(probe, data, lambda);
    probe.values[k] = saved;
    for (int r = 0; r < n; ++r)
      h.at(r, k) = (up[r] - down[r]) / (2.0 * step);
  }
  return h;
}

// Dense SPD solve via Cholesky; reference for the matrix-free CG path.
inline std::vector<double> cholesky_solve(const DenseMatrix& a,
                                          const std::vector<double>& b) {
  if (a.rows != a.cols || static_cast<int>(b.size()) != a.rows)
    throw std::invalid_argument("cholesky_solve: shape mismatch");
  const int n = a.rows;
  DenseMatrix l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a.at(i, j);
      for (int k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
      if (i == j) {
        if (s <= 0.0)
          throw std::runtime_error("cholesky_solve: matrix not SPD");
        l.at(i, i) = std::sqrt(s);
      } else {
        l.at(i, j) = s / l.at(j, j);
      }
    }
  }
  std::vector<double> y(n), x(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l.at(i, k) * y[k];
    y[i] = s / l.at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= l.at(k, i) * x[k];
    x[i] = s / l.at(i, i);
  }
  return x;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. Fine at
// oracle scale, unsorted output is sorted ascending before returning.
inline std::vector<double> symmetric_eigenvalues(DenseMatrix a,
                                                 int sweeps = 64) {
  if (a.rows != a.cols)
    throw std::invalid_argument("symmetric_eigenvalues: not square");
  const int n = a.rows;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off < 1e-28) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a.at(p, q);
        if (apq == 0.0) continue;
        double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a.at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace minihes::verify
