#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "trcv/crossval.hpp"

namespace trcv {

enum class SelectionRule { min_press, min_gcv, one_se, chi_square };

std::string_view to_string(SelectionRule rule);

struct SelectionResult {
  double lambda{0.0};
  Index index{0};
  double criterion{0.0};  // curve value at the chosen index
  SelectionRule rule{SelectionRule::min_press};
  Index evaluations{0};   // exact curve evaluations used
};

using CurveEvaluator = std::function<double(Index)>;

// Smallest value; ties go to the largest lambda. The rule tag is min_gcv for
// GCV curves and min_press otherwise.
SelectionResult grid_minimum(const CvCurve& curve, Index response);
Index argmin_prefer_last(const Vector& values);

// Brent's golden-section search with parabolic interpolation, restricted to
// grid indices and finished by a discrete neighbour descent. Returns a grid
// local minimum; on unimodal curves this is the global one.
SelectionResult min_press_search(const CurveEvaluator& evaluator,
                                 const LambdaGrid& grid);

// Natural cubic spline through (x_i, y_i), x strictly increasing.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  const std::vector<double>& knots() const { return x_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> second_;  // second derivatives at the knots
};

struct SplineOptions {
  double rel_tol{1e-3};
  Index initial_knots{8};
  // Add the indices visited by min_press_search to the initial knot set.
  bool seed_with_search{false};
};

// PRESS curve interpolated over log10(lambda) from adaptively chosen knots.
struct SplineEstimate {
  std::vector<Index> knot_indices;
  std::vector<double> knot_lambdas;
  std::vector<double> knot_values;  // exact evaluations
  NaturalCubicSpline interpolant;
  // Largest leave-one-knot-out relative error from the final round.
  double max_validated_error{0.0};
  Index evaluations{0};

  double operator()(double lambda) const;
  Vector evaluate(const LambdaGrid& grid) const;
};

// Starts from log-equidistant knots, validates each interior knot by
// predicting it from a spline through the others, and wherever the relative
// error exceeds rel_tol adds the indices halfway to both neighbouring knots.
// Stops once every validated error is within rel_tol or no index is left.
SplineEstimate spline_press_estimate(const CurveEvaluator& evaluator,
                                     const LambdaGrid& grid,
                                     const SplineOptions& options = {});

enum class OneSeScale { mean_squared, raw_press };

// SE = sample sd of the squared cv residuals at the minimum / sqrt(n). On the
// mean_squared scale selects the largest lambda with
// PRESS/n <= PRESS_min/n + SE; raw_press compares PRESS <= PRESS_min + SE.
SelectionResult one_se_rule(const CvCurve& curve, Index response,
                            OneSeScale scale = OneSeScale::mean_squared);

// Largest lambda with n * PRESS_min / PRESS(lambda) >= chi2_{n, alpha}.
// Falls back to the minimum when the quantile exceeds n.
SelectionResult chi_square_rule(const CvCurve& curve, Index response,
                                double alpha);

// Regularised lower incomplete gamma P(a, x).
double regularized_lower_gamma(double a, double x);

// Lower `prob` quantile of the chi-square distribution with `dof` degrees of
// freedom, by bisection on P(dof/2, x/2).
double chi_square_quantile(double dof, double prob);

}  // namespace trcv
