#include "trcv/select.hpp"

#include <cmath>
#include <map>
#include <string>

#include "trcv/error.hpp"

namespace trcv {

namespace {

void check_response(const CvCurve& curve, Index response) {
  if (curve.press.rows() == 0) {
    throw Error{ErrorKind::contract, "selection on an empty curve"};
  }
  if (response < 0 || response >= curve.q()) {
    throw Error{ErrorKind::contract, "response index out of range"};
  }
}

SelectionResult make_result(const CvCurve& curve, Index response, Index index,
                            SelectionRule rule) {
  return {curve.grid[index], index, curve.press(index, response), rule,
          curve.press.rows()};
}

}  // namespace

std::string_view to_string(SelectionRule rule) {
  switch (rule) {
    case SelectionRule::min_press: return "min_press";
    case SelectionRule::min_gcv: return "min_gcv";
    case SelectionRule::one_se: return "one_se";
    case SelectionRule::chi_square: return "chi_square";
  }
  return "unknown";
}

Index argmin_prefer_last(const Vector& values) {
  Index best{0};
  for (Index i = 1; i < values.size(); ++i) {
    if (values(i) <= values(best)) {
      best = i;
    }
  }
  return best;
}

SelectionResult grid_minimum(const CvCurve& curve, Index response) {
  check_response(curve, response);
  const Index idx{argmin_prefer_last(curve.press.col(response))};
  return make_result(curve, response, idx,
                     curve.strategy == CvStrategy::gcv ? SelectionRule::min_gcv
                                                       : SelectionRule::min_press);
}

SelectionResult min_press_search(const CurveEvaluator& evaluator,
                                 const LambdaGrid& grid) {
  const Index g{grid.size()};
  if (g < 4) {
    throw Error{ErrorKind::contract, "min_press_search needs at least 4 grid points"};
  }

  std::map<Index, double> cache;
  auto f_index = [&](Index i) {
    auto it{cache.find(i)};
    if (it == cache.end()) {
      it = cache.emplace(i, evaluator(i)).first;
    }
    return it->second;
  };
  auto f = [&](double x) {
    const double clamped{std::clamp(x, 0.0, static_cast<double>(g - 1))};
    return f_index(static_cast<Index>(std::lround(clamped)));
  };

  // Bounded Brent minimisation over the continuous index range; the
  // objective is the curve at the nearest grid index.
  const double golden{0.5 * (3.0 - std::sqrt(5.0))};
  constexpr double kIndexTol{0.5};
  double a{0.0};
  double b{static_cast<double>(g - 1)};
  double x{a + golden * (b - a)};
  double w{x};
  double v{x};
  double fx{f(x)};
  double fw{fx};
  double fv{fx};
  double d{0.0};
  double e{0.0};

  for (int iter = 0; iter < 500; ++iter) {
    const double xm{0.5 * (a + b)};
    const double tol1{1.5e-8 * std::abs(x) + kIndexTol / 3.0};
    const double tol2{2.0 * tol1};
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) {
      break;
    }

    bool use_golden{true};
    if (std::abs(e) > tol1) {
      double r{(x - w) * (fx - fv)};
      double q{(x - v) * (fx - fw)};
      double p{(x - v) * q - (x - w) * r};
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      r = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * r) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u{x + d};
        if (u - a < tol2 || b - u < tol2) {
          d = xm >= x ? tol1 : -tol1;
        }
        use_golden = false;
      }
    }
    if (use_golden) {
      e = x >= xm ? a - x : b - x;
      d = golden * e;
    }

    const double u{std::abs(d) >= tol1 ? x + d : x + (d >= 0.0 ? tol1 : -tol1)};
    const double fu{f(u)};
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }

  // Discrete descent to a grid-local minimum; ties move to larger lambda.
  Index best{static_cast<Index>(std::lround(std::clamp(x, 0.0, b)))};
  while (true) {
    const double here{f_index(best)};
    if (best + 1 < g && f_index(best + 1) <= here) {
      ++best;
    } else if (best > 0 && f_index(best - 1) < here) {
      --best;
    } else {
      break;
    }
  }

  return {grid[best], best, f_index(best), SelectionRule::min_press,
          static_cast<Index>(cache.size())};
}

SelectionResult one_se_rule(const CvCurve& curve, Index response,
                            OneSeScale scale) {
  check_response(curve, response);
  const Vector press{curve.press.col(response)};
  const Index imin{argmin_prefer_last(press)};
  const Index n{curve.n()};
  if (n < 2) {
    throw Error{ErrorKind::contract, "one_se_rule needs cv residuals for n >= 2"};
  }

  const Vector sq{curve.cv_residuals[static_cast<std::size_t>(response)]
                      .col(imin)
                      .array()
                      .square()};
  const double mean{sq.mean()};
  const double sd{std::sqrt((sq.array() - mean).square().sum() /
                            static_cast<double>(n - 1))};
  const double se{sd / std::sqrt(static_cast<double>(n))};

  const double nn{static_cast<double>(n)};
  const double threshold{scale == OneSeScale::mean_squared
                             ? press(imin) / nn + se
                             : press(imin) + se};
  Index chosen{imin};
  for (Index k = press.size() - 1; k > imin; --k) {
    const double value{scale == OneSeScale::mean_squared ? press(k) / nn
                                                         : press(k)};
    if (value <= threshold) {
      chosen = k;
      break;
    }
  }
  return make_result(curve, response, chosen, SelectionRule::one_se);
}

SelectionResult chi_square_rule(const CvCurve& curve, Index response,
                                double alpha) {
  check_response(curve, response);
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw Error{ErrorKind::contract, "chi_square_rule needs 0 < alpha < 1"};
  }
  const Vector press{curve.press.col(response)};
  const Index imin{argmin_prefer_last(press)};
  const double n{static_cast<double>(curve.n())};
  const double quantile{chi_square_quantile(n, alpha)};
  const double pmin{press(imin)};

  Index chosen{imin};
  for (Index k = press.size() - 1; k > imin; --k) {
    const bool admissible{press(k) == pmin || n * pmin / press(k) >= quantile};
    if (admissible) {
      chosen = k;
      break;
    }
  }
  return make_result(curve, response, chosen, SelectionRule::chi_square);
}

}  // namespace trcv
