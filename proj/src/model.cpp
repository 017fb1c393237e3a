#include "trcv/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trcv/error.hpp"

namespace trcv {

// ---------------------------------------------------------------- Dataset

Dataset Dataset::create(Matrix x, Matrix y,
                        std::optional<std::vector<int>> segments) {
  if (x.rows() < 2) {
    throw Error{ErrorKind::dimension, "dataset needs at least two rows"};
  }
  if (x.cols() < 1 || y.cols() < 1) {
    throw Error{ErrorKind::dimension,
                "dataset needs at least one predictor and one response"};
  }
  if (y.rows() != x.rows()) {
    throw Error{ErrorKind::dimension,
                "predictor rows (" + std::to_string(x.rows()) +
                    ") and response rows (" + std::to_string(y.rows()) +
                    ") differ"};
  }
  require_finite(x, "predictor matrix");
  require_finite(y, "response matrix");

  if (segments) {
    if (static_cast<Index>(segments->size()) != x.rows()) {
      throw Error{ErrorKind::dimension,
                  "segment labels (" + std::to_string(segments->size()) +
                      ") and predictor rows (" + std::to_string(x.rows()) +
                      ") differ"};
    }
    const int k{*std::max_element(segments->begin(), segments->end())};
    std::vector<int> counts(static_cast<std::size_t>(std::max(k, 0)), 0);
    for (int label : *segments) {
      if (label < 1) {
        throw Error{ErrorKind::contract, "segment labels must be >= 1"};
      }
      ++counts[static_cast<std::size_t>(label - 1)];
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] == 0) {
        throw Error{ErrorKind::contract,
                    "segment " + std::to_string(i + 1) + " is empty"};
      }
    }
  }

  Dataset d;
  d.x_means_ = x.colwise().mean();
  d.y_means_ = y.colwise().mean();
  d.x_ = std::move(x);
  d.y_ = std::move(y);
  d.segments_ = std::move(segments);
  return d;
}

int Dataset::segment_count() const {
  if (!segments_) {
    return 0;
  }
  return *std::max_element(segments_->begin(), segments_->end());
}

std::vector<std::vector<Index>> Dataset::segment_rows() const {
  std::vector<std::vector<Index>> rows(
      static_cast<std::size_t>(segment_count()));
  if (segments_) {
    for (std::size_t i = 0; i < segments_->size(); ++i) {
      rows[static_cast<std::size_t>((*segments_)[i] - 1)].push_back(
          static_cast<Index>(i));
    }
  }
  return rows;
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Matrix xs(static_cast<Index>(rows.size()), p());
  Matrix ys(static_cast<Index>(rows.size()), q());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    xs.row(static_cast<Index>(i)) = x_.row(rows[i]);
    ys.row(static_cast<Index>(i)) = y_.row(rows[i]);
  }
  return create(std::move(xs), std::move(ys));
}

// ------------------------------------------------------------- LambdaGrid

LambdaGrid::LambdaGrid(std::vector<double> values, bool allow_zero)
    : values_{std::move(values)} {
  if (values_.empty()) {
    throw Error{ErrorKind::contract, "lambda grid is empty"};
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v{values_[i]};
    if (!std::isfinite(v) || v < 0.0 || (v == 0.0 && !(allow_zero && i == 0))) {
      throw Error{ErrorKind::contract,
                  "lambda values must be finite and positive (zero only as "
                  "the first value when explicitly allowed)"};
    }
    if (i > 0 && !(v > values_[i - 1])) {
      throw Error{ErrorKind::contract, "lambda grid must be strictly increasing"};
    }
  }
}

LambdaGrid LambdaGrid::log_spaced(double lo, double hi, Index count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw Error{ErrorKind::contract,
                "log-spaced grid needs 0 < lo < hi and at least two points"};
  }
  std::vector<double> v(static_cast<std::size_t>(count));
  const double a{std::log10(lo)};
  const double step{(std::log10(hi) - a) / static_cast<double>(count - 1)};
  for (Index i = 0; i < count; ++i) {
    v[static_cast<std::size_t>(i)] = std::pow(10.0, a + step * static_cast<double>(i));
  }
  v.front() = lo;
  v.back() = hi;
  return LambdaGrid{std::move(v)};
}

LambdaGrid LambdaGrid::linear(double lo, double hi, Index count,
                              bool allow_zero) {
  if (lo < 0.0 || !(hi > lo) || count < 2) {
    throw Error{ErrorKind::contract,
                "linear grid needs 0 <= lo < hi and at least two points"};
  }
  std::vector<double> v(static_cast<std::size_t>(count));
  const double step{(hi - lo) / static_cast<double>(count - 1)};
  for (Index i = 0; i < count; ++i) {
    v[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);
  }
  v.back() = hi;
  return LambdaGrid{std::move(v), allow_zero};
}

// ---------------------------------------------------------------- SvdBasis

std::shared_ptr<const SvdBasis> make_basis_precentered(
    const Matrix& xc, const Matrix& yc, RowVector x_means, RowVector y_means,
    RegularizationOperator op, double rank_tol) {
  if (xc.rows() != yc.rows()) {
    throw Error{ErrorKind::dimension, "make_basis: row counts differ"};
  }
  const Matrix standard{op.to_standard_form(xc)};
  CompactSvd svd{compact_svd(standard, rank_tol)};
  if (svd.rank() == 0) {
    throw Error{ErrorKind::rank, "centred predictors are identically zero"};
  }

  Matrix us{svd.u * svd.s.asDiagonal()};
  Matrix u_squared{svd.u.array().square().matrix()};
  Matrix uty{svd.u.transpose() * yc};
  Matrix orthogonal{svd.rank() + 1 == yc.rows()
                        ? Matrix{Matrix::Zero(yc.rows(), yc.cols())}
                        : Matrix{yc - svd.u * uty}};
  return std::make_shared<const SvdBasis>(
      SvdBasis{std::move(op), std::move(svd), std::move(us),
               std::move(u_squared), std::move(uty), yc, std::move(orthogonal),
               std::move(x_means), std::move(y_means)});
}

std::shared_ptr<const SvdBasis> make_basis(const Dataset& data,
                                           RegularizationOperator op,
                                           double rank_tol) {
  const Matrix xc{data.x().rowwise() - data.x_means()};
  const Matrix yc{data.y().rowwise() - data.y_means()};
  return make_basis_precentered(xc, yc, data.x_means(), data.y_means(),
                                std::move(op), rank_tol);
}

std::shared_ptr<const SvdBasis> make_basis(const Dataset& data,
                                           const RegularizationSpec& spec,
                                           double rank_tol) {
  return make_basis(data, build_operator_for(spec, data.x()), rank_tol);
}

// ------------------------------------------------------------- ModelFamily

ModelFamily::ModelFamily(std::shared_ptr<const SvdBasis> basis, LambdaGrid grid)
    : basis_{std::move(basis)}, grid_{std::move(grid)} {
  const SvdBasis& b{*basis_};
  const Index r{b.rank()};
  const Index g{grid_.size()};

  if (grid_.has_zero()) {
    const Index full{std::min(b.n() - 1, b.p())};
    if (r < full) {
      throw Error{ErrorKind::rank,
                  "lambda = 0 requires full rank " + std::to_string(full) +
                      " but the centred predictors have rank " +
                      std::to_string(r)};
    }
  }

  // d_j = s_j^2 / (s_j^2 + lambda), c_j = u_j^T y / (s_j + lambda / s_j)
  const Vector s{b.svd.s};
  const Vector s2{s.array().square()};
  Matrix inv_denominator(r, g);
  shrinkage_.resize(r, g);
  complement_.resize(r, g);
  for (Index k = 0; k < g; ++k) {
    const double lambda{grid_[k]};
    shrinkage_.col(k) = s2.array() / (s2.array() + lambda);
    complement_.col(k) = lambda / (s2.array() + lambda);
    inv_denominator.col(k) = (s.array() + lambda / s.array()).inverse();
  }

  leverages_ = b.u_squared * shrinkage_;
  df_ = (1.0 + shrinkage_.colwise().sum().array()).transpose();

  coords_.reserve(static_cast<std::size_t>(b.q()));
  residuals_.reserve(static_cast<std::size_t>(b.q()));
  for (Index j = 0; j < b.q(); ++j) {
    Matrix c{inv_denominator.array().colwise() * b.uty.col(j).array()};
    const Matrix shrunk{complement_.array().colwise() * b.uty.col(j).array()};
    Matrix res{(b.svd.u * shrunk).colwise() + b.orthogonal_residual.col(j)};
    coords_.push_back(std::move(c));
    residuals_.push_back(std::move(res));
  }
}

const Matrix& ModelFamily::coords(Index response) const {
  return coords_.at(static_cast<std::size_t>(response));
}

const Matrix& ModelFamily::residuals(Index response) const {
  return residuals_.at(static_cast<std::size_t>(response));
}

Matrix ModelFamily::fitted(Index response) const {
  const Matrix& res{residuals(response)};
  const Vector y{basis_->yc.col(response).array() + basis_->y_means(response)};
  return (-res).colwise() + y;
}

ModelFamily fit_family(std::shared_ptr<const SvdBasis> basis,
                       const LambdaGrid& grid) {
  return ModelFamily{std::move(basis), grid};
}

ModelFamily fit_family(const Dataset& data, const RegularizationSpec& spec,
                       const LambdaGrid& grid) {
  return ModelFamily{make_basis(data, spec), grid};
}

Coefficients coefficients_at(const ModelFamily& family, Index lambda_index) {
  if (lambda_index < 0 || lambda_index >= family.size()) {
    throw Error{ErrorKind::contract, "lambda index out of range"};
  }
  const SvdBasis& b{family.basis()};
  Matrix beta(b.svd.v.rows(), b.q());
  for (Index j = 0; j < b.q(); ++j) {
    beta.col(j) = b.svd.v * family.coords(j).col(lambda_index);
  }
  Matrix coef{b.op.back_transform(beta)};
  RowVector intercept{b.y_means - b.x_means * coef};
  return {std::move(coef), std::move(intercept)};
}

Matrix predict(const ModelFamily& family, Index lambda_index,
               const Matrix& x_new) {
  if (x_new.cols() != family.basis().p()) {
    throw Error{ErrorKind::dimension,
                "predict: expected " + std::to_string(family.basis().p()) +
                    " columns, got " + std::to_string(x_new.cols())};
  }
  const Coefficients c{coefficients_at(family, lambda_index)};
  return (x_new * c.b).rowwise() + c.intercept;
}

Vector degrees_of_freedom(const ModelFamily& family) { return family.df(); }

Vector degrees_of_freedom(const Vector& singular_values,
                          const LambdaGrid& grid) {
  const Vector s2{singular_values.array().square()};
  Vector df(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    df(k) = 1.0 + (s2.array() / (s2.array() + grid[k])).sum();
  }
  return df;
}

}  // namespace trcv
