#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "trcv/error.hpp"
#include "trcv/select.hpp"

namespace trcv {

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x,
                                       std::vector<double> y)
    : x_{std::move(x)}, y_{std::move(y)}, second_(x_.size(), 0.0) {
  const std::size_t k{x_.size()};
  if (k == 0 || y_.size() != k) {
    throw Error{ErrorKind::dimension, "spline needs matching, non-empty knots"};
  }
  for (std::size_t i = 1; i < k; ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw Error{ErrorKind::contract, "spline knots must be strictly increasing"};
    }
  }
  if (k < 3) {
    return;
  }

  // Tridiagonal system for the interior second derivatives (Thomas algorithm);
  // natural boundary: second derivative zero at both ends.
  const std::size_t m{k - 2};
  std::vector<double> diag(m), upper(m), rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double h0{x_[i + 1] - x_[i]};
    const double h1{x_[i + 2] - x_[i + 1]};
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y_[i + 2] - y_[i + 1]) / h1 - (y_[i + 1] - y_[i]) / h0);
  }
  for (std::size_t i = 1; i < m; ++i) {
    const double lower{x_[i + 1] - x_[i]};
    const double w{lower / diag[i - 1]};
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  second_[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) {
    second_[i + 1] = (rhs[i] - upper[i] * second_[i + 2]) / diag[i];
  }
}

double NaturalCubicSpline::operator()(double x) const {
  const std::size_t k{x_.size()};
  if (k == 1) {
    return y_[0];
  }
  // Linear continuation outside the knot range.
  if (x <= x_.front() || x >= x_.back()) {
    const bool left{x <= x_.front()};
    const std::size_t i{left ? 0 : k - 2};
    const double h{x_[i + 1] - x_[i]};
    const double chord{(y_[i + 1] - y_[i]) / h};
    const double slope{
        left ? chord - h * (2.0 * second_[i] + second_[i + 1]) / 6.0
             : chord + h * (second_[i] + 2.0 * second_[i + 1]) / 6.0};
    return left ? y_[0] + slope * (x - x_[0])
                : y_[k - 1] + slope * (x - x_[k - 1]);
  }

  const auto it{std::upper_bound(x_.begin(), x_.end(), x)};
  const std::size_t i{static_cast<std::size_t>(it - x_.begin()) - 1};
  const double h{x_[i + 1] - x_[i]};
  const double a{(x_[i + 1] - x) / h};
  const double b{(x - x_[i]) / h};
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) *
             h * h / 6.0;
}

double SplineEstimate::operator()(double lambda) const {
  return interpolant(std::log10(lambda));
}

Vector SplineEstimate::evaluate(const LambdaGrid& grid) const {
  Vector out(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    out(i) = (*this)(grid[i]);
  }
  return out;
}

namespace {

double relative_error(double estimate, double exact) {
  const double diff{std::abs(estimate - exact)};
  return exact != 0.0 ? diff / std::abs(exact) : diff;
}

}  // namespace

SplineEstimate spline_press_estimate(const CurveEvaluator& evaluator,
                                     const LambdaGrid& grid,
                                     const SplineOptions& options) {
  const Index g{grid.size()};
  if (g < 8) {
    throw Error{ErrorKind::contract, "spline estimation needs at least 8 grid points"};
  }
  if (!(options.rel_tol > 0.0) || options.initial_knots < 2) {
    throw Error{ErrorKind::contract,
                "spline estimation needs rel_tol > 0 and >= 2 initial knots"};
  }
  if (grid.has_zero()) {
    throw Error{ErrorKind::contract,
                "spline estimation works on log10(lambda); grid contains 0"};
  }

  std::vector<double> logs(static_cast<std::size_t>(g));
  for (Index i = 0; i < g; ++i) {
    logs[static_cast<std::size_t>(i)] = std::log10(grid[i]);
  }

  std::map<Index, double> exact;
  auto eval = [&](Index i) {
    auto it{exact.find(i)};
    if (it == exact.end()) {
      it = exact.emplace(i, evaluator(i)).first;
    }
    return it->second;
  };

  // Log-equidistant start: nearest grid index to each target.
  std::set<Index> knots;
  const Index count{std::min(options.initial_knots, g)};
  for (Index t = 0; t < count; ++t) {
    const double target{logs.front() + (logs.back() - logs.front()) *
                                           static_cast<double>(t) /
                                           static_cast<double>(count - 1)};
    const auto it{std::lower_bound(logs.begin(), logs.end(), target)};
    Index idx{static_cast<Index>(it - logs.begin())};
    if (idx >= g) {
      idx = g - 1;
    } else if (idx > 0 &&
               target - logs[static_cast<std::size_t>(idx - 1)] <
                   logs[static_cast<std::size_t>(idx)] - target) {
      --idx;
    }
    knots.insert(idx);
  }
  knots.insert(0);
  knots.insert(g - 1);

  if (options.seed_with_search) {
    min_press_search(eval, grid);
    for (const auto& [idx, value] : exact) {
      knots.insert(idx);
    }
  }

  double max_error{0.0};
  while (true) {
    std::vector<Index> idx(knots.begin(), knots.end());
    std::vector<double> xs, ys;
    for (Index i : idx) {
      xs.push_back(logs[static_cast<std::size_t>(i)]);
      ys.push_back(eval(i));
    }

    // Leave-one-knot-out validation of every interior knot.
    max_error = 0.0;
    std::set<Index> additions;
    for (std::size_t j = 1; j + 1 < idx.size(); ++j) {
      std::vector<double> x_loo, y_loo;
      x_loo.reserve(xs.size() - 1);
      y_loo.reserve(ys.size() - 1);
      for (std::size_t l = 0; l < xs.size(); ++l) {
        if (l != j) {
          x_loo.push_back(xs[l]);
          y_loo.push_back(ys[l]);
        }
      }
      const double err{
          relative_error(NaturalCubicSpline{x_loo, y_loo}(xs[j]), ys[j])};
      max_error = std::max(max_error, err);
      if (err > options.rel_tol) {
        const Index left{(idx[j - 1] + idx[j]) / 2};
        const Index right{(idx[j] + idx[j + 1]) / 2};
        if (!knots.contains(left)) additions.insert(left);
        if (!knots.contains(right)) additions.insert(right);
      }
    }
    if (additions.empty()) {
      break;
    }
    for (Index i : additions) {
      eval(i);
      knots.insert(i);
    }
  }

  SplineEstimate est{{}, {}, {}, NaturalCubicSpline{{0.0}, {0.0}}, max_error,
                     static_cast<Index>(exact.size())};
  std::vector<double> xs;
  for (Index i : knots) {
    est.knot_indices.push_back(i);
    est.knot_lambdas.push_back(grid[i]);
    est.knot_values.push_back(exact.at(i));
    xs.push_back(logs[static_cast<std::size_t>(i)]);
  }
  est.interpolant = NaturalCubicSpline{std::move(xs), est.knot_values};
  return est;
}

}  // namespace trcv
