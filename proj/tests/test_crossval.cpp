#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "trcv/crossval.hpp"
#include "trcv/error.hpp"

using namespace trcv;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected trcv::Error");
  return ErrorKind::input;
}

double max_press_gap(const CvCurve& a, const CvCurve& b) {
  double worst{0.0};
  for (Index j = 0; j < a.q(); ++j) {
    worst = std::max(worst, test::max_rel_error(a.press.col(j), b.press.col(j)));
  }
  return worst;
}

void check_press_consistent(const CvCurve& c) {
  for (Index j = 0; j < c.q(); ++j) {
    const Vector sums{c.cv_residuals[static_cast<std::size_t>(j)]
                          .colwise()
                          .squaredNorm()
                          .transpose()};
    CHECK(test::max_rel_error(c.press.col(j), sums) < 1e-14);
  }
}

}  // namespace

TEST_CASE("LooCV with a zero-leverage sample") {
  Matrix x(10, 1);
  x << -4, -3, -2, -1, 0, 1, 2, 3, 4, 0;
  test::Rng rng{31};
  const Dataset d{Dataset::create(x, test::gaussian(10, 1, rng))};
  const ModelFamily f{fit_family(d, {}, LambdaGrid{{1.0}})};
  CHECK(f.leverages()(4, 0) == 0.0);
  const CvCurve c{loocv_press(f)};
  CHECK(c.cv_residuals[0](4, 0) == doctest::Approx(f.residuals(0)(4, 0) / 0.9));
  CHECK(c.cv_residuals[0](9, 0) == doctest::Approx(f.residuals(0)(9, 0) / 0.9));
  check_press_consistent(c);
}

TEST_CASE("LooCV leverage overflow names the sample") {
  const Dataset d{Dataset::create(Matrix{{1, 0}, {0, 1}, {0, 0}}, Matrix{{1}, {2}, {0}})};
  const ModelFamily f{fit_family(d, {}, LambdaGrid{{1e-20}})};
  try {
    loocv_press(f);
    FAIL("expected leverage overflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
    CHECK(std::string{e.what()}.find("sample") != std::string::npos);
  }
  CHECK(kind_of([] {
          loocv_press(fit_family(Dataset::create(Matrix{{1.0}, {2.0}}, Matrix{{1.0}, {0.0}}),
                                 {}, LambdaGrid{{1.0}}));
        }) == ErrorKind::contract);
}

TEST_CASE("LooCV equals leave-one-out refits") {
  test::Rng rng{32};
  for (Index p : {5, 30}) {
    const Dataset d{test::random_dataset(12, p, 2, rng)};
    const LambdaGrid grid{{1e-3, 1.0, 1e3}};
    const CvCurve c{loocv_press(fit_family(d, {}, grid))};
    for (Index k = 0; k < grid.size(); ++k) {
      const Matrix oracle{test::refit_cv_residuals(d.x(), d.y(), Matrix::Identity(p, p),
                                                   grid[k], test::singleton_labels(12))};
      for (Index j = 0; j < 2; ++j) {
        CHECK(test::rel_error(c.cv_residuals[static_cast<std::size_t>(j)].col(k),
                              oracle.col(j)) < 1e-8);
      }
    }
  }
}

TEST_CASE("LooCV under very heavy shrinkage") {
  test::Rng rng{33};
  const Dataset d{test::random_dataset(11, 6, 1, rng)};
  const double smax{compact_svd(d.x().rowwise() - d.x_means()).s(0)};
  const CvCurve c{loocv_press(fit_family(d, {}, LambdaGrid{{1e12 * smax * smax}}))};
  const Vector expected{(d.y().col(0).array() - d.y_means()(0)) / (1.0 - 1.0 / 11.0)};
  CHECK(test::rel_error(c.cv_residuals[0].col(0), expected) < 1e-6);
}

TEST_CASE("GCV") {
  SUBCASE("zero residuals") {
    test::Rng rng{34};
    const Dataset d{Dataset::create(test::gaussian(6, 2, rng), Matrix::Constant(6, 1, 2.0))};
    const CvCurve c{gcv_curve(fit_family(d, {}, LambdaGrid{{1.0}}))};
    CHECK(c.press(0, 0) == 0.0);
    CHECK((*c.gcv)(0, 0) == 0.0);
  }
  SUBCASE("n = 4, df = 2, RSS = 1") {
    Matrix x(4, 1);
    x << -1.5, -0.5, 0.5, 1.5;
    const Vector e{Vector{{1.0, -1.0, -1.0, 1.0}} / 2.0};
    const Dataset d{Dataset::create(x, x + e)};
    const ModelFamily f{fit_family(d, {}, LambdaGrid::linear(0.0, 1.0, 2, true))};
    CHECK(f.df()(0) == doctest::Approx(2.0));
    CHECK((*gcv_curve(f).gcv)(0, 0) == doctest::Approx(4.0));
  }
  SUBCASE("formula and press equality") {
    test::Rng rng{35};
    const Dataset d{test::random_dataset(15, 8, 2, rng)};
    const ModelFamily f{fit_family(d, {}, LambdaGrid::log_spaced(1e-2, 1e2, 9))};
    const CvCurve c{gcv_curve(f)};
    check_press_consistent(c);
    for (Index k = 0; k < f.size(); ++k) {
      const double denom{1.0 - f.df()(k) / 15.0};
      const double expected{f.residuals(1).col(k).squaredNorm() / (denom * denom)};
      CHECK((*c.gcv)(k, 1) == doctest::Approx(expected).epsilon(1e-12));
      CHECK(c.press(k, 1) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("invariant under orthogonal rotation of the centred system") {
    test::Rng rng{36};
    const Dataset d{test::random_dataset(14, 6, 2, rng)};
    const Matrix q{test::gaussian(14, 14, rng).householderQr().householderQ()};
    const Matrix xc{d.x().rowwise() - d.x_means()};
    const Matrix yc{d.y().rowwise() - d.y_means()};
    const LambdaGrid grid{LambdaGrid::log_spaced(1e-3, 1e3, 11)};
    const ModelFamily a{make_basis(d, RegularizationSpec{}), grid};
    const ModelFamily b{make_basis_precentered(q * xc, q * yc, d.x_means(), d.y_means(),
                                               build_operator({}, 6)),
                        grid};
    CHECK(test::rel_error(*gcv_curve(a).gcv, *gcv_curve(b).gcv) < 1e-9);
  }
}

TEST_CASE("SegCV reduces to LooCV for singleton segments") {
  test::Rng rng{37};
  for (auto kind : {RegularizationKind::identity, RegularizationKind::derivative1}) {
    const Dataset d{test::random_dataset(13, 7, 2, rng, test::singleton_labels(13))};
    const LambdaGrid grid{LambdaGrid::log_spaced(1e-3, 1e3, 15)};
    const ModelFamily f{fit_family(d, {kind}, grid)};
    const CvCurve loo{loocv_press(f)};
    CHECK(max_press_gap(segcv_press_implicit(f, d), loo) < 1e-10);
    CHECK(max_press_gap(segcv_press_explicit(d, {kind}, grid), loo) < 1e-8);
  }
}

TEST_CASE("SegCV with a zero-leverage segment") {
  Matrix x(8, 1);
  x << -3, -2, -1, 1, 2, 3, 0, 0;
  test::Rng rng{38};
  const Dataset d{Dataset::create(x, test::gaussian(8, 1, rng),
                                  std::vector<int>{1, 1, 1, 2, 2, 2, 3, 3})};
  const ModelFamily f{fit_family(d, {}, LambdaGrid{{0.5}})};
  const CvCurve c{segcv_press_implicit(f, d)};
  const Vector r{f.residuals(0).col(0).tail(2)};
  // (I - 11^T/n)^{-1} = I + 11^T/(n - n_k)
  const Vector expected{r.array() + r.sum() / 6.0};
  CHECK(test::rel_error(c.cv_residuals[0].col(0).tail(2), expected) < 1e-12);
}

TEST_CASE("implicit SegCV equals explicit refits") {
  test::Rng rng{39};
  for (auto kind : {RegularizationKind::identity, RegularizationKind::derivative1,
                    RegularizationKind::derivative2}) {
    const Dataset d{test::random_dataset(18, 6, 2, rng, test::random_labels(18, 6, rng))};
    const LambdaGrid grid{LambdaGrid::log_spaced(1e-4, 1e4, 9)};
    const ModelFamily f{fit_family(d, {kind}, grid)};
    const CvCurve implicit{segcv_press_implicit(f, d)};
    const CvCurve explicit_refit{segcv_press_explicit(d, {kind}, grid)};
    check_press_consistent(implicit);
    check_press_consistent(explicit_refit);
    const Matrix l{f.basis().op.matrix()};
    for (Index k = 0; k < grid.size(); ++k) {
      const Matrix oracle{test::refit_cv_residuals(d.x(), d.y(), l, grid[k], *d.segments())};
      for (Index j = 0; j < 2; ++j) {
        const auto jj{static_cast<std::size_t>(j)};
        CHECK(test::rel_error(implicit.cv_residuals[jj].col(k), oracle.col(j)) < 1e-8);
        CHECK(test::rel_error(explicit_refit.cv_residuals[jj].col(k), oracle.col(j)) < 1e-8);
      }
    }
  }
}

TEST_CASE("implicit SegCV and LooCV stay accurate when p exceeds n") {
  test::Rng rng{45};
  const Dataset d{test::random_dataset(12, 60, 1, rng, test::random_labels(12, 4, rng))};
  const LambdaGrid grid{{1e-6, 1e-4, 1e-2}};
  for (auto kind : {RegularizationKind::identity, RegularizationKind::derivative1}) {
    const ModelFamily f{fit_family(d, {kind}, grid)};
    REQUIRE(f.basis().spans_complement());
    const CvCurve seg{segcv_press_implicit(f, d)};
    const CvCurve loo{loocv_press(f)};
    const Matrix l{f.basis().op.matrix()};
    for (Index k = 0; k < grid.size(); ++k) {
      const Matrix seg_oracle{test::refit_cv_residuals(d.x(), d.y(), l, grid[k], *d.segments())};
      const Matrix loo_oracle{
          test::refit_cv_residuals(d.x(), d.y(), l, grid[k], test::singleton_labels(12))};
      CHECK(test::rel_error(seg.cv_residuals[0].col(k), seg_oracle) < 1e-8);
      CHECK(test::rel_error(loo.cv_residuals[0].col(k), loo_oracle) < 1e-8);
    }
  }
}

TEST_CASE("standardisation per fold differs from full-data scaling") {
  test::Rng rng{40};
  const Dataset d{test::random_dataset(16, 5, 1, rng, test::random_labels(16, 4, rng))};
  const LambdaGrid grid{{0.1, 1.0, 10.0}};
  const RegularizationSpec spec{RegularizationKind::standardize};
  const CvCurve full{segcv_press_explicit(d, spec, grid, FoldScaling::full_data)};
  const CvCurve per_fold{segcv_press_explicit(d, spec, grid, FoldScaling::per_fold)};
  CHECK(max_press_gap(segcv_press_implicit(fit_family(d, spec, grid), d), full) < 1e-8);
  CHECK(max_press_gap(per_fold, full) > 1e-8);
}

TEST_CASE("explicit SegCV with duplicated halves") {
  test::Rng rng{41};
  const Dataset half{test::random_dataset(7, 3, 1, rng)};
  Matrix x(14, 3);
  x << half.x(), half.x();
  Matrix y(14, 1);
  y << half.y(), half.y();
  std::vector<int> labels(14, 1);
  std::fill(labels.begin() + 7, labels.end(), 2);
  const Dataset d{Dataset::create(x, y, labels)};
  const LambdaGrid grid{{0.3}};
  const CvCurve c{segcv_press_explicit(d, {}, grid)};
  const ModelFamily f{fit_family(half, {}, grid)};
  CHECK(test::rel_error(c.cv_residuals[0].col(0).head(7), f.residuals(0).col(0)) < 1e-10);
}

TEST_CASE("PRESS is invariant under row and segment permutations") {
  test::Rng rng{42};
  const Dataset d{test::random_dataset(15, 5, 2, rng, test::random_labels(15, 5, rng))};
  std::vector<Index> perm(15);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> relabel{3, 5, 1, 2, 4};
  std::vector<int> labels;
  for (Index i : perm) {
    labels.push_back(relabel[static_cast<std::size_t>((*d.segments())[static_cast<std::size_t>(i)] - 1)]);
  }
  const Dataset pd{Dataset::create(d.x()(perm, Eigen::all), d.y()(perm, Eigen::all), labels)};
  const LambdaGrid grid{LambdaGrid::log_spaced(1e-2, 1e2, 7)};
  const ModelFamily f{fit_family(d, {}, grid)};
  const ModelFamily pf{fit_family(pd, {}, grid)};
  CHECK(max_press_gap(loocv_press(f), loocv_press(pf)) < 1e-10);
  CHECK(max_press_gap(gcv_curve(f), gcv_curve(pf)) < 1e-10);
  CHECK(max_press_gap(segcv_press_implicit(f, d), segcv_press_implicit(pf, pd)) < 1e-10);
  CHECK(max_press_gap(segcv_press_explicit(d, {}, grid), segcv_press_explicit(pd, {}, grid)) <
        1e-10);
  const CvCurve a{segcv_press_implicit(f, d)};
  const CvCurve b{segcv_press_implicit(pf, pd)};
  CHECK(test::rel_error(a.cv_residuals[1](perm, Eigen::all), b.cv_residuals[1]) < 1e-10);
}

TEST_CASE("CV residuals dominate fitted residuals") {
  test::Rng rng{43};
  const Dataset d{test::random_dataset(20, 8, 1, rng, test::random_labels(20, 4, rng))};
  const LambdaGrid grid{LambdaGrid::log_spaced(1e-3, 1e3, 13)};
  const ModelFamily f{fit_family(d, {}, grid)};
  const Vector rss{f.residuals(0).colwise().squaredNorm().transpose()};
  for (const CvCurve& c : {loocv_press(f), segcv_press_implicit(f, d), gcv_curve(f),
                           vircv_press(d, {}, grid)}) {
    CHECK((c.press.col(0).array() >= rss.array()).all());
  }
}

TEST_CASE("parallel SegCV is deterministic") {
  test::Rng rng{44};
  const Dataset d{test::random_dataset(30, 10, 2, rng, test::random_labels(30, 6, rng))};
  const ModelFamily f{fit_family(d, {}, LambdaGrid::log_spaced(1e-3, 1e3, 40))};
  const CvCurve one{segcv_press_implicit(f, d, 1)};
  const CvCurve four{segcv_press_implicit(f, d, 4)};
  CHECK(one.press == four.press);
  CHECK(one.cv_residuals[1] == four.cv_residuals[1]);
}

TEST_CASE("SegCV needs segment labels") {
  test::Rng rng{45};
  const Dataset d{test::random_dataset(8, 3, 1, rng)};
  const ModelFamily f{fit_family(d, {}, LambdaGrid{{1.0}})};
  CHECK(kind_of([&] { segcv_press_implicit(f, d); }) == ErrorKind::contract);
  CHECK(kind_of([&] { segcv_press_explicit(d, {}, LambdaGrid{{1.0}}); }) ==
        ErrorKind::contract);
  CHECK(kind_of([&] { build_vircv_transform(d); }) == ErrorKind::contract);
}

TEST_CASE("VirCV transform") {
  SUBCASE("identical rows give a single non-zero entry") {
    Matrix x(3, 4);
    x.rowwise() = RowVector{{1.0, 2.0, -1.0, 0.5}};
    const Dataset d{Dataset::create(x, Matrix{{1.0}, {2.0}, {3.0}}, std::vector<int>{1, 1, 1})};
    const VircvTransform t{build_vircv_transform(d)};
    const Vector rotated{t.block_u[0].transpose() * Vector::Ones(3)};
    CHECK(std::abs(rotated(0)) == doctest::Approx(std::sqrt(3.0)));
    CHECK(rotated.tail(2).norm() < 1e-12);
    CHECK(t.m(0) == doctest::Approx(3.0));
    CHECK(t.m.tail(2).norm() < 1e-12);
  }
  SUBCASE("singletons") {
    test::Rng rng{46};
    const Dataset d{test::random_dataset(6, 3, 1, rng, test::singleton_labels(6))};
    const VircvTransform t{build_vircv_transform(d)};
    CHECK(t.dense().cwiseAbs().isApprox(Matrix::Identity(6, 6)));
    CHECK(t.m.isApprox(Vector::Ones(6)));
  }
  SUBCASE("random segments") {
    test::Rng rng{47};
    const Dataset d{test::random_dataset(20, 4, 1, rng, test::random_labels(20, 3, rng))};
    const VircvTransform t{build_vircv_transform(d)};
    for (const Matrix& u : t.block_u) {
      CHECK((u.transpose() * u - Matrix::Identity(u.rows(), u.rows())).norm() < 1e-10);
    }
    CHECK(t.m.sum() == doctest::Approx(20.0).epsilon(1e-10));
    const Matrix a{test::gaussian(20, 2, rng)};
    CHECK(test::rel_error(t.apply_transpose(a), t.dense().transpose() * a) < 1e-14);
    CHECK(build_vircv_transform(d, 5).m == build_vircv_transform(d, 5).m);
  }
}

TEST_CASE("VirCV PRESS") {
  SUBCASE("singletons equal LooCV") {
    test::Rng rng{48};
    const Dataset d{test::random_dataset(12, 5, 2, rng, test::singleton_labels(12))};
    const LambdaGrid grid{LambdaGrid::log_spaced(1e-3, 1e3, 10)};
    CHECK(max_press_gap(vircv_press(d, {}, grid), loocv_press(fit_family(d, {}, grid))) <
          1e-10);
  }
  SUBCASE("identical-row segments equal SegCV") {
    test::Rng rng{49};
    for (auto kind : {RegularizationKind::identity, RegularizationKind::derivative1}) {
      const Matrix base{test::gaussian(6, 9, rng)};
      Matrix x(18, 9);
      std::vector<int> labels;
      for (Index i = 0; i < 18; ++i) {
        x.row(i) = base.row(i / 3);
        labels.push_back(static_cast<int>(i / 3) + 1);
      }
      const Matrix y{x * test::gaussian(9, 1, rng) + 0.3 * test::gaussian(18, 1, rng)};
      const Dataset d{Dataset::create(x, y, labels)};
      const LambdaGrid grid{LambdaGrid::log_spaced(1e-3, 1e3, 12)};
      const CvCurve vir{vircv_press(d, {kind}, grid)};
      CHECK(max_press_gap(vir, segcv_press_explicit(d, {kind}, grid)) < 1e-8);
      CHECK(max_press_gap(vir, segcv_press_implicit(fit_family(d, {kind}, grid), d)) < 1e-8);
    }
  }
  SUBCASE("heterogeneous segments stay finite and keep GCV") {
    test::Rng rng{50};
    const Dataset d{test::random_dataset(24, 10, 1, rng, test::random_labels(24, 4, rng))};
    const LambdaGrid grid{LambdaGrid::log_spaced(1e-2, 1e3, 10)};
    const VircvTransform t{build_vircv_transform(d)};
    const ModelFamily rotated{vircv_family(d, {}, grid, t)};
    const CvCurve vir{vircv_press(rotated, t)};
    CHECK(vir.press.allFinite());
    CHECK(test::rel_error(*vir.gcv, *gcv_curve(fit_family(d, {}, grid)).gcv) < 1e-9);
  }
}

TEST_CASE("lazy PRESS evaluators match full curves") {
  test::Rng rng{51};
  const Dataset d{test::random_dataset(16, 6, 2, rng, test::random_labels(16, 4, rng))};
  const LambdaGrid grid{LambdaGrid::log_spaced(1e-2, 1e2, 6)};
  const auto basis{make_basis(d, RegularizationSpec{})};
  const ModelFamily f{basis, grid};
  const VircvTransform t{build_vircv_transform(d)};
  const ModelFamily rotated{vircv_family(d, {}, grid, t)};

  const auto check = [&](const CvCurve& curve, const std::function<double(Index)>& eval) {
    for (Index k = 0; k < grid.size(); ++k) {
      CHECK(eval(k) == doctest::Approx(curve.press(k, 1)).epsilon(1e-12));
    }
  };
  check(loocv_press(f), press_evaluator(basis, grid, CvStrategy::loocv, 1));
  check(gcv_curve(f), press_evaluator(basis, grid, CvStrategy::gcv, 1));
  check(segcv_press_implicit(f, d),
        press_evaluator(basis, grid, CvStrategy::segcv_implicit, 1, &d));
  check(vircv_press(rotated, t),
        press_evaluator(rotated.basis_ptr(), grid, CvStrategy::vircv, 1, nullptr, &t));
  CHECK(kind_of([&] { press_evaluator(basis, grid, CvStrategy::segcv_implicit); }) ==
        ErrorKind::contract);
}
