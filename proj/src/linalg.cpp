#include "trcv/linalg.hpp"

#include <cmath>
#include <random>
#include <string>

#include "trcv/error.hpp"

namespace trcv {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::singular: return "singular system";
    case ErrorKind::rank: return "rank error";
    case ErrorKind::contract: return "contract violation";
    case ErrorKind::input: return "input error";
    case ErrorKind::config: return "configuration error";
  }
  return "error";
}

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error{ErrorKind::numeric,
                std::string{what} + " contains NaN or infinite entries"};
  }
}

Centered center_columns(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw Error{ErrorKind::dimension, "center_columns: empty matrix"};
  }
  RowVector means{m.colwise().mean()};
  Matrix centered{m.rowwise() - means};
  return {std::move(centered), std::move(means)};
}

CompactSvd compact_svd(const Matrix& m, double rank_tol) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw Error{ErrorKind::dimension, "compact_svd: empty matrix"};
  }
  require_finite(m, "compact_svd input");

  const Eigen::BDCSVD<Matrix> svd{m, Eigen::ComputeThinU | Eigen::ComputeThinV};
  if (svd.info() != Eigen::Success) {
    throw Error{ErrorKind::numeric,
                "compact_svd: SVD backend failed on a " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    " matrix"};
  }

  const Vector& s{svd.singularValues()};
  const double cutoff{s.size() > 0 ? rank_tol * s(0) : 0.0};
  Index r{0};
  while (r < s.size() && s(r) > cutoff && s(r) > 0.0) {
    ++r;
  }

  return {svd.matrixU().leftCols(r), s.head(r), svd.matrixV().leftCols(r)};
}

Vector hadamard_square_rowsums(const Matrix& m, const Vector& w) {
  if (w.size() != m.cols()) {
    throw Error{ErrorKind::dimension,
                "hadamard_square_rowsums: weight length " +
                    std::to_string(w.size()) + " does not match " +
                    std::to_string(m.cols()) + " columns"};
  }
  return m.array().square().matrix() * w;
}

namespace {

void check_symmetric_system(const Matrix& a, Index rhs_rows,
                            std::string_view context) {
  if (a.rows() != a.cols() || a.rows() != rhs_rows) {
    throw Error{ErrorKind::dimension,
                "solve_small_symmetric: incompatible system " +
                    std::string{context}};
  }
  const double scale{std::max(1.0, a.cwiseAbs().maxCoeff())};
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error{ErrorKind::contract,
                "solve_small_symmetric: matrix is not symmetric " +
                    std::string{context}};
  }
}

[[noreturn]] void throw_singular(double rcond, std::string_view context) {
  std::string msg{"near-singular correction matrix (rcond "};
  msg += std::to_string(rcond);
  msg += ")";
  if (!context.empty()) {
    msg += " for ";
    msg += context;
  }
  throw Error{ErrorKind::singular, msg};
}

}  // namespace

Matrix solve_small_symmetric(const Matrix& a, const Matrix& b,
                             std::string_view context) {
  check_symmetric_system(a, b.rows(), context);
  if (a.rows() == 0) {
    return Matrix(0, b.cols());
  }

  constexpr double kMinRcond{1e-12};
  const Eigen::LLT<Matrix> llt{a};
  if (llt.info() == Eigen::Success) {
    const double rcond{llt.rcond()};
    if (!(rcond >= kMinRcond)) {
      throw_singular(rcond, context);
    }
    return llt.solve(b);
  }

  // Indefinite or semidefinite: fall back to pivoted LDL^T.
  const Eigen::LDLT<Matrix> ldlt{a};
  double rcond{0.0};
  if (ldlt.info() == Eigen::Success) {
    // LDLT::rcond ignores zero pivots, so also bound it by the pivot ratio.
    const Vector pivots{ldlt.vectorD().cwiseAbs()};
    const double largest{pivots.maxCoeff()};
    rcond = largest > 0.0 ? std::min(ldlt.rcond(), pivots.minCoeff() / largest) : 0.0;
  }
  if (!(rcond >= kMinRcond)) {
    throw_singular(rcond, context);
  }
  return ldlt.solve(b);
}

Vector solve_small_symmetric(const Matrix& a, const Vector& b,
                             std::string_view context) {
  return solve_small_symmetric(a, Matrix{b}, context).col(0);
}

Matrix orthonormal_completion(const Matrix& u, std::uint64_t seed) {
  const Index n{u.rows()};
  const Index r{u.cols()};
  if (r > n) {
    throw Error{ErrorKind::contract,
                "orthonormal_completion: more columns than rows"};
  }
  if (r > 0) {
    const Matrix gram{u.transpose() * u};
    if ((gram - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() > 1e-10) {
      throw Error{ErrorKind::contract,
                  "orthonormal_completion: input columns are not orthonormal"};
    }
  }
  if (r == n) {
    return u;
  }

  std::mt19937_64 rng{seed};
  std::normal_distribution<double> normal{0.0, 1.0};
  Matrix stacked(n, n);
  stacked.leftCols(r) = u;
  for (Index j = r; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      stacked(i, j) = normal(rng);
    }
  }

  const Eigen::HouseholderQR<Matrix> qr{stacked};
  Matrix q{qr.householderQ() * Matrix::Identity(n, n)};

  Matrix out(n, n);
  out.leftCols(r) = u;
  for (Index j = r; j < n; ++j) {
    Vector col{q.col(j)};
    // One extra Gram-Schmidt sweep against everything already accepted.
    col -= out.leftCols(j) * (out.leftCols(j).transpose() * col);
    out.col(j) = col.normalized();
  }
  return out;
}

}  // namespace trcv
