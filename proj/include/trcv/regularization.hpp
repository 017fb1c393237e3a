#pragma once

#include <optional>
#include <string_view>

#include "trcv/linalg.hpp"

namespace trcv {

enum class RegularizationKind { identity, standardize, derivative1, derivative2 };

std::string_view to_string(RegularizationKind kind);

struct RegularizationSpec {
  RegularizationKind kind{RegularizationKind::identity};
  // Scale of the appended Legendre rows is sqrt(epsilon).
  double epsilon{1e-10};
  // Standard deviations are floored at sigma_floor * max(sd).
  double sigma_floor{1e-12};
};

// Square, invertible regularisation matrix L together with a factorisation
// for applying L^{-1}. Immutable once built.
class RegularizationOperator {
 public:
  // identity: I_p. standardize: diag of floored column sds.
  // derivative1: (p-1) rows e_i - e_{i+1} plus one sqrt(eps)-scaled
  // degree-0 Legendre row. derivative2: (p-2) rows e_i - 2e_{i+1} + e_{i+2}
  // plus sqrt(eps)-scaled degree-0 and degree-1 Legendre rows.
  static RegularizationOperator build(
      const RegularizationSpec& spec, Index p,
      const std::optional<Vector>& column_sds = std::nullopt);

  RegularizationKind kind() const { return kind_; }
  Index size() const { return l_.rows(); }
  const Matrix& matrix() const { return l_; }

  // X L^{-1}.
  Matrix to_standard_form(const Matrix& x) const;
  // L^{-1} beta, columnwise.
  Matrix back_transform(const Matrix& beta) const;
  // L b.
  Matrix apply(const Matrix& b) const;

 private:
  RegularizationOperator(RegularizationKind kind, Matrix l);

  RegularizationKind kind_;
  Matrix l_;
  Vector diagonal_;  // populated for identity / standardize
  Eigen::PartialPivLU<Matrix> lu_;            // of L
  Eigen::PartialPivLU<Matrix> lu_transposed_;  // of L^T
};

RegularizationOperator build_operator(
    const RegularizationSpec& spec, Index p,
    const std::optional<Vector>& column_sds = std::nullopt);

// Builds the operator for a predictor matrix, estimating column standard
// deviations from x when the kind needs them.
RegularizationOperator build_operator_for(const RegularizationSpec& spec,
                                          const Matrix& x);

Matrix to_standard_form(const Matrix& x, const RegularizationOperator& op);
Matrix back_transform(const Matrix& beta, const RegularizationOperator& op);

// Sample (n - 1) standard deviation of every column.
Vector column_std(const Matrix& x);

// Orthonormal rows spanning the polynomials of degree 0..degree sampled on
// the uniform grid of p points in [-1, 1]. Row k has degree k; the degree-0
// row has positive entries and the degree-1 row is increasing.
Matrix legendre_rows(Index degree, Index p);

}  // namespace trcv
