#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "trcv/model.hpp"

namespace trcv::test {

using Rng = std::mt19937_64;

inline Matrix gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      m(i, j) = dist(rng);
    }
  }
  return m;
}

// Labels 1..k assigned round-robin and then shuffled, so every segment is
// non-empty and sizes differ by at most one.
inline std::vector<int> random_labels(Index n, int k, Rng& rng) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    labels[static_cast<std::size_t>(i)] = static_cast<int>(i % k) + 1;
  }
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

inline std::vector<int> singleton_labels(Index n) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::iota(labels.begin(), labels.end(), 1);
  return labels;
}

// Linear signal plus noise with non-zero column and response offsets.
inline Dataset random_dataset(Index n, Index p, Index q, Rng& rng,
                              std::optional<std::vector<int>> labels = std::nullopt,
                              double noise = 0.5) {
  Matrix x{gaussian(n, p, rng)};
  x.rowwise() += gaussian(1, p, rng).row(0) * 3.0;
  const Matrix beta{gaussian(p, q, rng) / std::sqrt(static_cast<double>(p))};
  Matrix y{x * beta + noise * gaussian(n, q, rng)};
  y.rowwise() += gaussian(1, q, rng).row(0);
  return Dataset::create(std::move(x), std::move(y), std::move(labels));
}

// Ridge solution of min ||yc - xc b||^2 + lambda ||L b||^2 from a QR of the
// stacked system [xc; sqrt(lambda) L].
inline Matrix direct_ridge(const Matrix& xc, const Matrix& yc, const Matrix& l,
                           double lambda) {
  const Index n{xc.rows()};
  const Index p{xc.cols()};
  Matrix a(n + l.rows(), p);
  a << xc, std::sqrt(lambda) * l;
  Matrix rhs{Matrix::Zero(n + l.rows(), yc.cols())};
  rhs.topRows(n) = yc;
  return a.colPivHouseholderQr().solve(rhs);
}

// Normal equations (X^T X + lambda L^T L) b = X^T y on centred data.
inline Matrix normal_equation_ridge(const Matrix& xc, const Matrix& yc,
                                    const Matrix& l, double lambda) {
  const Matrix a{xc.transpose() * xc + lambda * l.transpose() * l};
  return a.ldlt().solve(xc.transpose() * yc);
}

// Hold out each fold, re-centre on the held-in rows, refit by direct solve
// and predict the held-out responses. Returns n x q residuals.
inline Matrix refit_cv_residuals(const Matrix& x, const Matrix& y, const Matrix& l,
                                 double lambda, const std::vector<int>& labels) {
  const Index n{x.rows()};
  const int k{*std::max_element(labels.begin(), labels.end())};
  Matrix out(n, y.cols());
  for (int fold = 1; fold <= k; ++fold) {
    std::vector<Index> in;
    std::vector<Index> held;
    for (Index i = 0; i < n; ++i) {
      (labels[static_cast<std::size_t>(i)] == fold ? held : in).push_back(i);
    }
    const Matrix xin{x(in, Eigen::all)};
    const Matrix yin{y(in, Eigen::all)};
    const RowVector xm{xin.colwise().mean()};
    const RowVector ym{yin.colwise().mean()};
    const Matrix b{direct_ridge(xin.rowwise() - xm, yin.rowwise() - ym, l, lambda)};
    const Matrix pred{((x(held, Eigen::all).rowwise() - xm) * b).rowwise() + ym};
    out(held, Eigen::all) = y(held, Eigen::all) - pred;
  }
  return out;
}

inline double rel_error(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

inline double max_rel_error(const Vector& a, const Vector& b) {
  double worst{0.0};
  for (Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a(i) - b(i)) / std::max(std::abs(b(i)), 1e-300));
  }
  return worst;
}

// Non-increasing up to the first minimum, non-decreasing afterwards.
inline bool is_unimodal(const Vector& v) {
  Index i{0};
  while (i + 1 < v.size() && v(i + 1) <= v(i)) ++i;
  while (i + 1 < v.size() && v(i + 1) >= v(i)) ++i;
  return i + 1 == v.size();
}

inline bool is_grid_local_min(const Vector& v, Index i) {
  const bool left{i == 0 || v(i) <= v(i - 1)};
  const bool right{i + 1 == v.size() || v(i) <= v(i + 1)};
  return left && right;
}

}  // namespace trcv::test
