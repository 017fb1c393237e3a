#include "trcv/regularization.hpp"

#include <cmath>
#include <string>

#include "trcv/error.hpp"

namespace trcv {

namespace {

constexpr double kRoundTripTol{1e-8};

void check_round_trip(const Matrix& reconstructed, const Matrix& target,
                      std::string_view what) {
  const double scale{std::max(target.norm(), 1e-300)};
  const double err{(reconstructed - target).norm()};
  if (!(err <= kRoundTripTol * scale) && target.norm() > 0.0) {
    throw Error{ErrorKind::singular,
                std::string{what} +
                    ": regularisation matrix too ill-conditioned (relative "
                    "residual " +
                    std::to_string(err / scale) + ")"};
  }
}

}  // namespace

std::string_view to_string(RegularizationKind kind) {
  switch (kind) {
    case RegularizationKind::identity: return "identity";
    case RegularizationKind::standardize: return "std";
    case RegularizationKind::derivative1: return "d1";
    case RegularizationKind::derivative2: return "d2";
  }
  return "unknown";
}

Vector column_std(const Matrix& x) {
  const Index n{x.rows()};
  if (n < 2) {
    return Vector::Zero(x.cols());
  }
  const Matrix centered{x.rowwise() - x.colwise().mean()};
  return (centered.colwise().squaredNorm() / static_cast<double>(n - 1))
      .cwiseSqrt()
      .transpose();
}

Matrix legendre_rows(Index degree, Index p) {
  if (p < degree + 1) {
    throw Error{ErrorKind::contract, "legendre_rows: too few grid points"};
  }
  Matrix monomials(p, degree + 1);
  for (Index i = 0; i < p; ++i) {
    const double x{p == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) /
                                             static_cast<double>(p - 1)};
    double power{1.0};
    for (Index k = 0; k <= degree; ++k) {
      monomials(i, k) = power;
      power *= x;
    }
  }
  const Eigen::HouseholderQR<Matrix> qr{monomials};
  Matrix q{qr.householderQ() * Matrix::Identity(p, degree + 1)};

  // Fix signs: constant row positive, linear row increasing.
  if (q.col(0).sum() < 0.0) {
    q.col(0) = -q.col(0);
  }
  if (degree >= 1 && q(p - 1, 1) < q(0, 1)) {
    q.col(1) = -q.col(1);
  }
  return q.transpose();
}

RegularizationOperator::RegularizationOperator(RegularizationKind kind,
                                               Matrix l)
    : kind_{kind}, l_{std::move(l)} {
  if (kind_ == RegularizationKind::identity ||
      kind_ == RegularizationKind::standardize) {
    diagonal_ = l_.diagonal();
  } else {
    lu_.compute(l_);
    lu_transposed_.compute(l_.transpose());
  }
}

RegularizationOperator RegularizationOperator::build(
    const RegularizationSpec& spec, Index p,
    const std::optional<Vector>& column_sds) {
  if (!(spec.epsilon > 0.0) || !(spec.sigma_floor > 0.0)) {
    throw Error{ErrorKind::contract,
                "regularisation epsilon and sigma_floor must be positive"};
  }
  if (p < 1) {
    throw Error{ErrorKind::dimension, "regularisation needs p >= 1"};
  }

  switch (spec.kind) {
    case RegularizationKind::identity:
      return {spec.kind, Matrix::Identity(p, p)};

    case RegularizationKind::standardize: {
      if (!column_sds || column_sds->size() != p) {
        throw Error{ErrorKind::dimension,
                    "standardize regularisation needs one sd per column"};
      }
      const double max_sd{column_sds->maxCoeff()};
      const double floor{spec.sigma_floor * max_sd};
      Vector sds{column_sds->cwiseMax(floor)};
      if (!(sds.minCoeff() > 0.0)) {
        throw Error{ErrorKind::numeric,
                    "standardize regularisation: non-positive standard "
                    "deviation after flooring (all columns constant?)"};
      }
      return {spec.kind, Matrix{sds.asDiagonal()}};
    }

    case RegularizationKind::derivative1:
    case RegularizationKind::derivative2: {
      const Index order{spec.kind == RegularizationKind::derivative1 ? 1 : 2};
      if (p < 3) {
        throw Error{ErrorKind::dimension,
                    "derivative regularisation needs p >= 3"};
      }
      Matrix l{Matrix::Zero(p, p)};
      for (Index i = 0; i < p - order; ++i) {
        if (order == 1) {
          l(i, i) = 1.0;
          l(i, i + 1) = -1.0;
        } else {
          l(i, i) = 1.0;
          l(i, i + 1) = -2.0;
          l(i, i + 2) = 1.0;
        }
      }
      l.bottomRows(order) = std::sqrt(spec.epsilon) * legendre_rows(order - 1, p);
      return {spec.kind, std::move(l)};
    }
  }
  throw Error{ErrorKind::contract, "unknown regularisation kind"};
}

Matrix RegularizationOperator::to_standard_form(const Matrix& x) const {
  if (x.cols() != size()) {
    throw Error{ErrorKind::dimension,
                "to_standard_form: predictor has " + std::to_string(x.cols()) +
                    " columns, operator expects " + std::to_string(size())};
  }
  if (kind_ == RegularizationKind::identity) {
    return x;
  }
  if (kind_ == RegularizationKind::standardize) {
    return x * diagonal_.cwiseInverse().asDiagonal();
  }
  // X L^{-1} = (L^{-T} X^T)^T
  Matrix out{lu_transposed_.solve(x.transpose()).transpose()};
  check_round_trip(out * l_, x, "to_standard_form");
  return out;
}

Matrix RegularizationOperator::back_transform(const Matrix& beta) const {
  if (beta.rows() != size()) {
    throw Error{ErrorKind::dimension,
                "back_transform: coefficient rows do not match operator"};
  }
  if (kind_ == RegularizationKind::identity) {
    return beta;
  }
  if (kind_ == RegularizationKind::standardize) {
    return diagonal_.cwiseInverse().asDiagonal() * beta;
  }
  Matrix out{lu_.solve(beta)};
  check_round_trip(l_ * out, beta, "back_transform");
  return out;
}

Matrix RegularizationOperator::apply(const Matrix& b) const {
  if (b.rows() != size()) {
    throw Error{ErrorKind::dimension, "apply: coefficient rows do not match"};
  }
  if (kind_ == RegularizationKind::identity) {
    return b;
  }
  if (kind_ == RegularizationKind::standardize) {
    return diagonal_.asDiagonal() * b;
  }
  return l_ * b;
}

RegularizationOperator build_operator(const RegularizationSpec& spec, Index p,
                                      const std::optional<Vector>& column_sds) {
  return RegularizationOperator::build(spec, p, column_sds);
}

RegularizationOperator build_operator_for(const RegularizationSpec& spec,
                                          const Matrix& x) {
  if (spec.kind == RegularizationKind::standardize) {
    return RegularizationOperator::build(spec, x.cols(), column_std(x));
  }
  return RegularizationOperator::build(spec, x.cols());
}

Matrix to_standard_form(const Matrix& x, const RegularizationOperator& op) {
  return op.to_standard_form(x);
}

Matrix back_transform(const Matrix& beta, const RegularizationOperator& op) {
  return op.back_transform(beta);
}

}  // namespace trcv
