#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "trcv/model.hpp"

namespace trcv {

enum class CvStrategy { loocv, segcv_implicit, segcv_explicit, vircv, gcv };

std::string_view to_string(CvStrategy strategy);

// Cross-validated residuals and PRESS for every lambda of a grid.
// press(k, j) is the sum of squared cv_residuals[j].col(k).
struct CvCurve {
  LambdaGrid grid;
  Matrix press;                      // |grid| x q
  std::optional<Matrix> gcv;         // |grid| x q
  std::vector<Matrix> cv_residuals;  // per response, n x |grid|
  CvStrategy strategy{CvStrategy::loocv};

  Index n() const { return cv_residuals.empty() ? 0 : cv_residuals.front().rows(); }
  Index q() const { return press.cols(); }
};

// How the explicit refit oracle handles data-dependent scaling. Column means
// are always re-estimated on the held-in rows (an unpenalised intercept is
// refitted); `full_data` keeps the full-data regularisation operator, which
// only matters for standardisation.
enum class FoldScaling { full_data, per_fold };

// r_(i) = r_i / (1 - h_i - 1/n). Throws ErrorKind::numeric when a
// denominator is not above 1e-12.
CvCurve loocv_press(const ModelFamily& family);

// GCV(lambda) = ||y - X b_lambda||^2 / (1 - df/n)^2. The residuals of the
// returned curve are r_i / (1 - df/n), so press equals gcv.
CvCurve gcv_curve(const ModelFamily& family);

// Exact segmented CV from the full fit: for every segment k solves
// [I - H_k - 11^T/n] r_(k) = r_k. `data` supplies the segment labels and
// must be the dataset the family was fitted on.
CvCurve segcv_press_implicit(const ModelFamily& family, const Dataset& data,
                             unsigned threads = 1);

// Holds out each segment, refits from scratch and predicts it.
CvCurve segcv_press_explicit(const Dataset& data, const RegularizationSpec& spec,
                             const LambdaGrid& grid,
                             FoldScaling scaling = FoldScaling::per_fold);

// Block-diagonal orthogonal T built from the left singular vectors of each
// uncentred segment, and m = (T^T 1) (.) (T^T 1).
struct VircvTransform {
  std::vector<std::vector<Index>> segments;
  std::vector<Matrix> block_u;
  Vector m;

  Index n() const { return m.size(); }
  // T^T a, keeping each segment's rows at their original positions.
  Matrix apply_transpose(const Matrix& a) const;
  // The dense n x n matrix T.
  Matrix dense() const;
};

VircvTransform build_vircv_transform(const Dataset& data,
                                     std::uint64_t seed = kDefaultSeed,
                                     double rank_tol = kDefaultRankTol);

// Family fitted to the centred, T^T-rotated data. The regularisation
// operator is estimated from the original data.
ModelFamily vircv_family(const Dataset& data, const RegularizationSpec& spec,
                         const LambdaGrid& grid, const VircvTransform& transform);

// LooCV on the rotated system with denominators 1 - h_i - m_i/n.
CvCurve vircv_press(const ModelFamily& rotated_family,
                    const VircvTransform& transform);
CvCurve vircv_press(const Dataset& data, const RegularizationSpec& spec,
                    const LambdaGrid& grid, std::uint64_t seed = kDefaultSeed);

// PRESS for one response at a single grid index, evaluated lazily. Used by
// the minimum search and spline estimators. `segments` is required for
// segcv_implicit; `transform` (with a basis from the rotated data) for vircv.
std::function<double(Index)> press_evaluator(
    std::shared_ptr<const SvdBasis> basis, LambdaGrid grid, CvStrategy strategy,
    Index response = 0, const Dataset* segments = nullptr,
    const VircvTransform* transform = nullptr);

}  // namespace trcv
