#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace trcv {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Singular values below rank_tol * s_max are dropped from the compact SVD.
inline constexpr double kDefaultRankTol = 1e-12;

// Seed used by orthonormal_completion unless the caller supplies one.
inline constexpr std::uint64_t kDefaultSeed = 0x5eed'c0de'2024'0001ULL;

struct Centered {
  Matrix centered;
  RowVector means;
};

// Thin factorisation m = u * diag(s) * v^T restricted to the retained rank.
// u is rows x r, v is cols x r and s is strictly positive and non-increasing.
struct CompactSvd {
  Matrix u;
  Vector s;
  Matrix v;

  Index rank() const { return s.size(); }
};

// Subtracts column means. Throws ErrorKind::dimension on an empty matrix.
Centered center_columns(const Matrix& m);

CompactSvd compact_svd(const Matrix& m, double rank_tol = kDefaultRankTol);

// out_i = sum_j m_ij^2 * w_j. With w = 1 this is the leverage of each row of
// an orthonormal basis; with w = d_lambda it gives regularised leverages.
Vector hadamard_square_rowsums(const Matrix& m, const Vector& w);

// Solves a * x = b for small symmetric a (Cholesky, falling back to LDL^T).
// Throws ErrorKind::singular, tagged with `context`, when the reciprocal
// condition estimate drops below 1e-12.
Matrix solve_small_symmetric(const Matrix& a, const Matrix& b,
                             std::string_view context = {});
Vector solve_small_symmetric(const Matrix& a, const Vector& b,
                             std::string_view context = {});

// Extends the orthonormal columns of u to a square orthogonal matrix whose
// leading columns are exactly u. The added columns come from a QR
// factorisation of [u | G] with G Gaussian, drawn from a generator seeded
// with `seed`.
Matrix orthonormal_completion(const Matrix& u,
                              std::uint64_t seed = kDefaultSeed);

// Throws ErrorKind::numeric if any entry of m is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

}  // namespace trcv
