#include "trcv/crossval.hpp"

#include <cmath>
#include <string>

#include "parallel.hpp"
#include "trcv/error.hpp"

namespace trcv {

namespace {

constexpr double kMinDenominator{1e-12};

// 1 - df / n as ((n - 1 - r) + sum(1 - d)) / n.
Vector gcv_denominators(const ModelFamily& family) {
  const double n{static_cast<double>(family.n())};
  const double free{static_cast<double>(family.n() - 1 - family.basis().rank())};
  return ((free + family.shrinkage_complement().colwise().sum().array()) / n)
      .transpose();
}

Matrix gcv_matrix(const ModelFamily& family) {
  const Vector denoms{gcv_denominators(family)};
  Matrix gcv(family.size(), family.q());
  for (Index k = 0; k < family.size(); ++k) {
    const double denom{denoms(k)};
    if (!(denom > kMinDenominator)) {
      throw Error{ErrorKind::numeric,
                  "GCV degenerate at lambda index " + std::to_string(k) +
                      ": df(lambda) = " + std::to_string(family.df()(k)) +
                      " reaches n"};
    }
    for (Index j = 0; j < family.q(); ++j) {
      gcv(k, j) = family.residuals(j).col(k).squaredNorm() / (denom * denom);
    }
  }
  return gcv;
}

Matrix press_from_residuals(const std::vector<Matrix>& cv_residuals,
                            Index grid_size) {
  Matrix press(grid_size, static_cast<Index>(cv_residuals.size()));
  for (std::size_t j = 0; j < cv_residuals.size(); ++j) {
    press.col(static_cast<Index>(j)) =
        cv_residuals[j].colwise().squaredNorm().transpose();
  }
  return press;
}

// Divides fitted residuals by 1 - h_i - correction_i, evaluated as
// (1 - |u_i|^2 - correction_i) + sum_j u_ij^2 (1 - d_j). The first term
// vanishes when U_r completes the correction direction to a basis.
CvCurve leverage_corrected(const ModelFamily& family, const Vector& correction,
                           CvStrategy strategy) {
  const Index n{family.n()};
  const Index g{family.size()};
  const SvdBasis& basis{family.basis()};
  Matrix denom{basis.u_squared * family.shrinkage_complement()};
  if (!basis.spans_complement()) {
    const Vector gap{
        (1.0 - basis.u_squared.rowwise().sum().array() - correction.array())
            .matrix()};
    denom.colwise() += gap;
  }
  for (Index k = 0; k < g; ++k) {
    for (Index i = 0; i < n; ++i) {
      if (!(denom(i, k) > kMinDenominator)) {
        throw Error{ErrorKind::numeric,
                    "leverage overflow: 1 - h - correction = " +
                        std::to_string(denom(i, k)) + " for sample " +
                        std::to_string(i + 1) + " at lambda = " +
                        std::to_string(family.grid()[k])};
      }
    }
  }

  CvCurve curve{family.grid(), {}, gcv_matrix(family), {}, strategy};
  for (Index j = 0; j < family.q(); ++j) {
    curve.cv_residuals.push_back(family.residuals(j).cwiseQuotient(denom));
  }
  curve.press = press_from_residuals(curve.cv_residuals, g);
  return curve;
}

// [I - U_k D U_k^T - 1/n]^{-1} r for one segment, assembled as
// P_k + U_k (I - D) U_k^T where P_k = I - U_k U_k^T - 1/n is fixed per segment.
Matrix segment_cv_residuals(const Matrix& u_rows, const Matrix& fixed,
                            const Vector& sqrt_complement,
                            const Matrix& fitted_residuals,
                            std::string_view context) {
  const Matrix w{u_rows * sqrt_complement.asDiagonal()};
  Matrix a{fixed};
  a.noalias() += w * w.transpose();
  a = 0.5 * (a + a.transpose()).eval();
  return solve_small_symmetric(a, fitted_residuals, context);
}

void require_segments(const Dataset& data, std::string_view who) {
  if (!data.has_segments()) {
    throw Error{ErrorKind::contract,
                std::string{who} + " needs segment labels"};
  }
}

}  // namespace

std::string_view to_string(CvStrategy strategy) {
  switch (strategy) {
    case CvStrategy::loocv: return "loocv";
    case CvStrategy::segcv_implicit: return "segcv";
    case CvStrategy::segcv_explicit: return "segcv-explicit";
    case CvStrategy::vircv: return "vircv";
    case CvStrategy::gcv: return "gcv";
  }
  return "unknown";
}

CvCurve loocv_press(const ModelFamily& family) {
  if (family.n() < 3) {
    throw Error{ErrorKind::contract, "LooCV needs at least three samples"};
  }
  const Vector correction{
      Vector::Constant(family.n(), 1.0 / static_cast<double>(family.n()))};
  return leverage_corrected(family, correction, CvStrategy::loocv);
}

CvCurve gcv_curve(const ModelFamily& family) {
  CvCurve curve{family.grid(), {}, gcv_matrix(family), {}, CvStrategy::gcv};
  const Vector scale{gcv_denominators(family).cwiseInverse()};
  for (Index j = 0; j < family.q(); ++j) {
    curve.cv_residuals.push_back(family.residuals(j) * scale.asDiagonal());
  }
  curve.press = press_from_residuals(curve.cv_residuals, family.size());
  return curve;
}

CvCurve segcv_press_implicit(const ModelFamily& family, const Dataset& data,
                             unsigned threads) {
  require_segments(data, "segcv_press_implicit");
  if (data.n() != family.n()) {
    throw Error{ErrorKind::dimension,
                "segcv_press_implicit: dataset and family sizes differ"};
  }
  const auto segments{data.segment_rows()};
  const Index g{family.size()};
  const Index q{family.q()};
  const double n{static_cast<double>(family.n())};
  const Matrix& u{family.basis().svd.u};
  const bool complete{family.basis().spans_complement()};
  const Matrix sqrt_complement{family.shrinkage_complement().cwiseSqrt()};

  std::vector<Matrix> u_rows;
  std::vector<Matrix> fixed;
  u_rows.reserve(segments.size());
  fixed.reserve(segments.size());
  for (const auto& rows : segments) {
    if (static_cast<double>(rows.size()) >= n) {
      throw Error{ErrorKind::contract,
                  "segcv_press_implicit: a segment covers every sample"};
    }
    const Index nk{static_cast<Index>(rows.size())};
    Matrix uk{u(rows, Eigen::all)};
    Matrix pk{Matrix::Zero(nk, nk)};
    if (!complete) {
      pk = Matrix::Identity(nk, nk) - uk * uk.transpose();
      pk.array() -= 1.0 / n;
    }
    u_rows.push_back(std::move(uk));
    fixed.push_back(std::move(pk));
  }

  CvCurve curve{family.grid(), {}, gcv_matrix(family), {},
                CvStrategy::segcv_implicit};
  curve.cv_residuals.assign(static_cast<std::size_t>(q),
                            Matrix(family.n(), g));

  const std::size_t pairs{segments.size() * static_cast<std::size_t>(g)};
  detail::parallel_for(pairs, threads, [&](std::size_t idx) {
    const std::size_t seg{idx / static_cast<std::size_t>(g)};
    const Index k{static_cast<Index>(idx % static_cast<std::size_t>(g))};
    const auto& rows{segments[seg]};

    Matrix fitted(static_cast<Index>(rows.size()), q);
    for (Index j = 0; j < q; ++j) {
      fitted.col(j) = family.residuals(j)(rows, k);
    }
    const std::string context{"segment " + std::to_string(seg + 1) +
                              ", lambda index " + std::to_string(k)};
    const Matrix cv{segment_cv_residuals(u_rows[seg], fixed[seg],
                                         sqrt_complement.col(k), fitted,
                                         context)};
    for (Index j = 0; j < q; ++j) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        curve.cv_residuals[static_cast<std::size_t>(j)](rows[i], k) =
            cv(static_cast<Index>(i), j);
      }
    }
  });

  curve.press = press_from_residuals(curve.cv_residuals, g);
  return curve;
}

CvCurve segcv_press_explicit(const Dataset& data, const RegularizationSpec& spec,
                             const LambdaGrid& grid, FoldScaling scaling) {
  require_segments(data, "segcv_press_explicit");
  const auto segments{data.segment_rows()};
  const Index n{data.n()};
  const Index q{data.q()};
  const Index g{grid.size()};

  std::optional<RegularizationOperator> shared_op;
  if (scaling == FoldScaling::full_data) {
    shared_op = build_operator_for(spec, data.x());
  }

  CvCurve curve{grid, {}, std::nullopt, {}, CvStrategy::segcv_explicit};
  curve.cv_residuals.assign(static_cast<std::size_t>(q), Matrix(n, g));

  std::vector<bool> held_out(static_cast<std::size_t>(n));
  for (std::size_t seg = 0; seg < segments.size(); ++seg) {
    const auto& out_rows{segments[seg]};
    std::fill(held_out.begin(), held_out.end(), false);
    for (Index i : out_rows) {
      held_out[static_cast<std::size_t>(i)] = true;
    }
    std::vector<Index> in_rows;
    for (Index i = 0; i < n; ++i) {
      if (!held_out[static_cast<std::size_t>(i)]) {
        in_rows.push_back(i);
      }
    }
    if (in_rows.size() < 2) {
      throw Error{ErrorKind::contract,
                  "segcv_press_explicit: segment " + std::to_string(seg + 1) +
                      " leaves fewer than two rows for fitting"};
    }

    const Dataset train{data.subset(in_rows)};
    RegularizationOperator op{shared_op ? *shared_op
                                        : build_operator_for(spec, train.x())};
    const ModelFamily family{make_basis(train, std::move(op)), grid};
    const SvdBasis& basis{family.basis()};

    // Held-out predictions: ((x - xbar_in) L^{-1} V_r) c_lambda + ybar_in.
    const Matrix x_out{data.x()(out_rows, Eigen::all)};
    const Matrix z{basis.op.to_standard_form(x_out.rowwise() - basis.x_means) *
                   basis.svd.v};
    for (Index j = 0; j < q; ++j) {
      const Vector y_out{data.y()(out_rows, j).array() - basis.y_means(j)};
      const Matrix resid{(-(z * family.coords(j))).colwise() + y_out};
      for (std::size_t i = 0; i < out_rows.size(); ++i) {
        curve.cv_residuals[static_cast<std::size_t>(j)].row(out_rows[i]) =
            resid.row(static_cast<Index>(i));
      }
    }
  }

  curve.press = press_from_residuals(curve.cv_residuals, g);
  return curve;
}

Matrix VircvTransform::apply_transpose(const Matrix& a) const {
  if (a.rows() != n()) {
    throw Error{ErrorKind::dimension, "VirCV transform: row count mismatch"};
  }
  Matrix out(a.rows(), a.cols());
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& rows{segments[k]};
    out(rows, Eigen::all) =
        block_u[k].transpose() * a(rows, Eigen::all);
  }
  return out;
}

Matrix VircvTransform::dense() const {
  Matrix t{Matrix::Zero(n(), n())};
  for (std::size_t k = 0; k < segments.size(); ++k) {
    t(segments[k], segments[k]) = block_u[k];
  }
  return t;
}

VircvTransform build_vircv_transform(const Dataset& data, std::uint64_t seed,
                                     double rank_tol) {
  require_segments(data, "build_vircv_transform");
  VircvTransform t;
  t.segments = data.segment_rows();
  t.m = Vector::Zero(data.n());
  t.block_u.reserve(t.segments.size());

  for (std::size_t k = 0; k < t.segments.size(); ++k) {
    const auto& rows{t.segments[k]};
    if (rows.empty()) {
      throw Error{ErrorKind::contract,
                  "VirCV: segment " + std::to_string(k + 1) + " is empty"};
    }
    const Matrix xk{data.x()(rows, Eigen::all)};
    Matrix uk;
    if (xk.isZero(0.0)) {
      uk = Matrix::Identity(xk.rows(), xk.rows());
    } else {
      const CompactSvd svd{compact_svd(xk, rank_tol)};
      uk = orthonormal_completion(svd.u, seed + k);
    }
    const Vector ones_rotated{uk.transpose() * Vector::Ones(uk.rows())};
    t.m(rows) = ones_rotated.array().square().matrix();
    t.block_u.push_back(std::move(uk));
  }
  return t;
}

ModelFamily vircv_family(const Dataset& data, const RegularizationSpec& spec,
                         const LambdaGrid& grid,
                         const VircvTransform& transform) {
  const Matrix xc{data.x().rowwise() - data.x_means()};
  const Matrix yc{data.y().rowwise() - data.y_means()};
  auto basis{make_basis_precentered(
      transform.apply_transpose(xc), transform.apply_transpose(yc),
      data.x_means(), data.y_means(), build_operator_for(spec, data.x()))};
  return ModelFamily{std::move(basis), grid};
}

CvCurve vircv_press(const ModelFamily& rotated_family,
                    const VircvTransform& transform) {
  if (transform.n() != rotated_family.n()) {
    throw Error{ErrorKind::dimension, "VirCV transform and family sizes differ"};
  }
  const Vector correction{transform.m /
                          static_cast<double>(rotated_family.n())};
  return leverage_corrected(rotated_family, correction, CvStrategy::vircv);
}

CvCurve vircv_press(const Dataset& data, const RegularizationSpec& spec,
                    const LambdaGrid& grid, std::uint64_t seed) {
  const VircvTransform transform{build_vircv_transform(data, seed)};
  return vircv_press(vircv_family(data, spec, grid, transform), transform);
}

std::function<double(Index)> press_evaluator(
    std::shared_ptr<const SvdBasis> basis, LambdaGrid grid, CvStrategy strategy,
    Index response, const Dataset* segments, const VircvTransform* transform) {
  if (response < 0 || response >= basis->q()) {
    throw Error{ErrorKind::contract, "press_evaluator: response out of range"};
  }
  std::optional<Dataset> seg_data;
  std::optional<VircvTransform> vt;
  switch (strategy) {
    case CvStrategy::segcv_implicit:
      if (segments == nullptr) {
        throw Error{ErrorKind::contract,
                    "press_evaluator: segcv needs segment labels"};
      }
      seg_data = *segments;
      break;
    case CvStrategy::vircv:
      if (transform == nullptr) {
        throw Error{ErrorKind::contract,
                    "press_evaluator: vircv needs the transform"};
      }
      vt = *transform;
      break;
    case CvStrategy::segcv_explicit:
      throw Error{ErrorKind::contract,
                  "press_evaluator: explicit refits are not evaluated lazily"};
    default:
      break;
  }

  return [basis = std::move(basis), grid = std::move(grid), strategy, response,
          seg_data = std::move(seg_data),
          vt = std::move(vt)](Index i) -> double {
    const ModelFamily family{basis, LambdaGrid{{grid[i]}, grid[i] == 0.0}};
    CvCurve curve{[&] {
      switch (strategy) {
        case CvStrategy::segcv_implicit:
          return segcv_press_implicit(family, *seg_data);
        case CvStrategy::vircv:
          return vircv_press(family, *vt);
        case CvStrategy::gcv:
          return gcv_curve(family);
        default:
          return loocv_press(family);
      }
    }()};
    return curve.press(0, response);
  };
}

}  // namespace trcv
