#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "trcv/linalg.hpp"
#include "trcv/regularization.hpp"

namespace trcv {

// Uncentred predictors and responses with optional segment labels.
// Segment labels are 1..K and every segment is non-empty.
class Dataset {
 public:
  static Dataset create(Matrix x, Matrix y,
                        std::optional<std::vector<int>> segments = std::nullopt);

  const Matrix& x() const { return x_; }
  const Matrix& y() const { return y_; }
  const std::optional<std::vector<int>>& segments() const { return segments_; }
  const RowVector& x_means() const { return x_means_; }
  const RowVector& y_means() const { return y_means_; }

  Index n() const { return x_.rows(); }
  Index p() const { return x_.cols(); }
  Index q() const { return y_.cols(); }
  bool has_segments() const { return segments_.has_value(); }
  int segment_count() const;

  // Row indices of every segment, in label order. Rows within a segment keep
  // their dataset order.
  std::vector<std::vector<Index>> segment_rows() const;

  // Rows selected in the given order; segment labels are dropped.
  Dataset subset(const std::vector<Index>& rows) const;

 private:
  Dataset() = default;

  Matrix x_;
  Matrix y_;
  std::optional<std::vector<int>> segments_;
  RowVector x_means_;
  RowVector y_means_;
};

// Strictly increasing positive regularisation parameters. A leading zero is
// allowed only when requested explicitly.
class LambdaGrid {
 public:
  explicit LambdaGrid(std::vector<double> values, bool allow_zero = false);

  static LambdaGrid log_spaced(double lo, double hi, Index count);
  static LambdaGrid linear(double lo, double hi, Index count,
                           bool allow_zero = false);

  Index size() const { return static_cast<Index>(values_.size()); }
  double operator[](Index i) const { return values_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& values() const { return values_; }
  bool has_zero() const { return !values_.empty() && values_.front() == 0.0; }

 private:
  std::vector<double> values_;
};

// Everything about a fitting problem that does not depend on lambda: the
// operator, the compact SVD of the centred standard-form predictors and the
// fixed products reused for every lambda.
struct SvdBasis {
  RegularizationOperator op;
  CompactSvd svd;
  Matrix us;         // U_r S_r
  Matrix u_squared;  // U_r (.) U_r
  Matrix uty;        // U_r^T y_c, r x q
  Matrix yc;         // centred (or transformed) responses, n x q
  // y_c - U_r U_r^T y_c; exactly zero when U_r spans all of 1^perp.
  Matrix orthogonal_residual;
  RowVector x_means;
  RowVector y_means;

  Index n() const { return yc.rows(); }
  Index q() const { return yc.cols(); }
  Index p() const { return op.size(); }
  Index rank() const { return svd.rank(); }
  // True when rank = n - 1, i.e. [1/sqrt(n), U_r] is a complete orthonormal
  // basis (or [T^T 1/sqrt(n), U_r] after a VirCV rotation).
  bool spans_complement() const { return rank() + 1 == n(); }
};

std::shared_ptr<const SvdBasis> make_basis(const Dataset& data,
                                           const RegularizationSpec& spec,
                                           double rank_tol = kDefaultRankTol);
std::shared_ptr<const SvdBasis> make_basis(const Dataset& data,
                                           RegularizationOperator op,
                                           double rank_tol = kDefaultRankTol);

// For data already centred (or centred and rotated): the columns of xc and
// yc must be orthogonal to a common unit vector (1/sqrt(n) for centred data,
// T^T 1/sqrt(n) after rotation). The means are only used for intercepts and
// predictions in the original coordinates.
std::shared_ptr<const SvdBasis> make_basis_precentered(
    const Matrix& xc, const Matrix& yc, RowVector x_means, RowVector y_means,
    RegularizationOperator op, double rank_tol = kDefaultRankTol);

// Ridge/Tikhonov solutions for every lambda of a grid, sharing one SVD.
class ModelFamily {
 public:
  ModelFamily(std::shared_ptr<const SvdBasis> basis, LambdaGrid grid);

  const SvdBasis& basis() const { return *basis_; }
  const std::shared_ptr<const SvdBasis>& basis_ptr() const { return basis_; }
  const LambdaGrid& grid() const { return grid_; }
  Index n() const { return basis_->n(); }
  Index q() const { return basis_->q(); }
  Index size() const { return grid_.size(); }

  // d_lambda, r x |grid|.
  const Matrix& shrinkage() const { return shrinkage_; }
  // 1 - d_lambda = lambda / (s^2 + lambda), without cancellation.
  const Matrix& shrinkage_complement() const { return complement_; }
  // c_lambda for one response, r x |grid|.
  const Matrix& coords(Index response) const;
  // Diagonal of U_{lambda,r} U_{lambda,r}^T, n x |grid|. The 1/n intercept
  // correction is not included.
  const Matrix& leverages() const { return leverages_; }
  // y_c - U_r S_r c_lambda for one response, n x |grid|, evaluated as
  // orthogonal_residual + U_r (1 - d_lambda) U_r^T y_c.
  const Matrix& residuals(Index response) const;
  // Fitted values in original response units, n x |grid|.
  Matrix fitted(Index response) const;
  const Vector& df() const { return df_; }

 private:
  std::shared_ptr<const SvdBasis> basis_;
  LambdaGrid grid_;
  Matrix shrinkage_;
  Matrix complement_;
  std::vector<Matrix> coords_;
  Matrix leverages_;
  std::vector<Matrix> residuals_;
  Vector df_;
};

ModelFamily fit_family(std::shared_ptr<const SvdBasis> basis,
                       const LambdaGrid& grid);
ModelFamily fit_family(const Dataset& data, const RegularizationSpec& spec,
                       const LambdaGrid& grid);

struct Coefficients {
  Matrix b;             // p x q, original (non-standard-form) coordinates
  RowVector intercept;  // q
};

Coefficients coefficients_at(const ModelFamily& family, Index lambda_index);

// x_new * b_lambda + b0_lambda for uncentred rows.
Matrix predict(const ModelFamily& family, Index lambda_index,
               const Matrix& x_new);

// df(lambda) = 1 + sum_j s_j^2 / (s_j^2 + lambda).
Vector degrees_of_freedom(const ModelFamily& family);
Vector degrees_of_freedom(const Vector& singular_values, const LambdaGrid& grid);

}  // namespace trcv
