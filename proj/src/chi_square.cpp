#include <cmath>
#include <limits>
#include <string>

#include "trcv/error.hpp"
#include "trcv/select.hpp"

namespace trcv {

namespace {

constexpr int kMaxIterations{1000};
constexpr double kEps{1e-16};

// Series: P(a,x) = e^{-x} x^a / Gamma(a+1) * sum_k x^k / ((a+1)...(a+k)).
double lower_gamma_series(double a, double x) {
  double term{1.0 / a};
  double sum{term};
  for (int k = 1; k < kMaxIterations; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw Error{ErrorKind::numeric, "incomplete gamma series did not converge"};
}

// Continued fraction for Q(a,x) = 1 - P(a,x), modified Lentz.
double upper_gamma_fraction(double a, double x) {
  constexpr double kTiny{1e-300};
  double b{x + 1.0 - a};
  double c{1.0 / kTiny};
  double d{1.0 / b};
  double h{d};
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an{-i * (i - a)};
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta{d * c};
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw Error{ErrorKind::numeric,
              "incomplete gamma continued fraction did not converge"};
}

}  // namespace

double regularized_lower_gamma(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || std::isnan(x)) {
    throw Error{ErrorKind::contract, "regularized_lower_gamma: need a > 0, x >= 0"};
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) {
    return lower_gamma_series(a, x);
  }
  return 1.0 - upper_gamma_fraction(a, x);
}

double chi_square_quantile(double dof, double prob) {
  if (!(dof > 0.0) || !(prob > 0.0) || !(prob < 1.0)) {
    throw Error{ErrorKind::contract,
                "chi_square_quantile: need dof > 0 and 0 < prob < 1"};
  }
  const double a{0.5 * dof};
  auto cdf = [a](double x) { return regularized_lower_gamma(a, 0.5 * x); };

  double lo{0.0};
  double hi{std::max(1.0, dof)};
  while (cdf(hi) < prob) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) {
      throw Error{ErrorKind::numeric, "chi_square_quantile: bracket failed"};
    }
  }
  for (int i = 0; i < 2000; ++i) {
    const double mid{0.5 * (lo + hi)};
    if (cdf(mid) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * hi || hi - lo < std::numeric_limits<double>::min()) {
      return 0.5 * (lo + hi);
    }
  }
  throw Error{ErrorKind::numeric, "chi_square_quantile: bisection did not converge"};
}

}  // namespace trcv
