#include "lkpolar/polar.hpp"
#include "lkpolar/smoothshape.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace lkpolar;
using oracle::pi;

namespace {

LinearSubspace coordinate_plane(const std::vector<int>& axes, int n = 3) {
  Mat b = Mat::Zero(n, static_cast<Eigen::Index>(axes.size()));
  for (std::size_t i = 0; i < axes.size(); ++i) b(axes[i], static_cast<Eigen::Index>(i)) = 1.0;
  return LinearSubspace(n, b);
}

PolarLengthResult length(const Shape& x, int q, std::int64_t planes, int threads = 1,
                         AlphaMode mode = AlphaMode::closed_form) {
  PolarLengthOptions o;
  o.n_planes = planes;
  o.threads = threads;
  o.polar.alpha_mode = mode;
  return polar_length(x, q, RandomSource(31).substream(static_cast<std::uint64_t>(q)), o);
}

void expect_within(const Estimate& e, double expected, const char* what) {
  EXPECT_LE(std::abs(e.value - expected), 3 * e.std_error + 1e-9 * std::max(1.0, std::abs(expected)))
      << what << ": " << e.value << " +- " << e.std_error << " vs " << expected;
}

double beta_oracle(int n, int k) {
  return oracle::unit_ball_volume(k) * oracle::unit_ball_volume(n - k) /
         (oracle::choose(n, k) * oracle::unit_ball_volume(n));
}

}  // namespace

TEST(PolarConstant, ClosedForms) {
  EXPECT_NEAR(polar_constant(3, 0), 1.0, 1e-14);
  EXPECT_NEAR(polar_constant(3, 1), 4.0 / pi, 1e-14);
  EXPECT_NEAR(polar_constant(3, 2), 1.0, 1e-14);
  EXPECT_NEAR(polar_constant(3, 3), 1.0, 1e-14);
  for (int n = 2; n <= 5; ++n)
    for (int q = 0; q < n; ++q)
      EXPECT_NEAR(polar_constant(n, q), beta_oracle(n - q, 1) / beta_oracle(n, q + 1), 1e-12) << n << " " << q;
}

TEST(PolarLength, SolidCube) {
  const Shape cube(plcatalog::solid_cube());
  const std::vector<double> expected = oracle::box_intrinsic_volumes({1, 1, 1});
  for (int q = 0; q <= 3; ++q) expect_within(length(cube, q, 300).estimate, expected[static_cast<std::size_t>(q)], "cube");
}

TEST(PolarLength, Sphere) {
  const Shape s(smoothcatalog::sphere(1));
  expect_within(length(s, 0, 100).estimate, 2.0, "sphere q0");
  expect_within(length(s, 1, 100).estimate, 0.0, "sphere q1");
  expect_within(length(s, 2, 1).estimate, 4 * pi, "sphere q2");
}

TEST(PolarLength, TorusVanishesBelowTopDegree) {
  const Shape t(smoothcatalog::torus(2, 1));
  expect_within(length(t, 0, 100).estimate, 0.0, "torus q0");
  expect_within(length(t, 1, 60).estimate, 0.0, "torus q1");
}

TEST(PolarLength, DiskPerimeterTerm) {
  const Shape d(smoothcatalog::disk(1));
  expect_within(length(d, 0, 100).estimate, 1.0, "disk q0");
  expect_within(length(d, 1, 150).estimate, pi, "disk q1");
  expect_within(length(d, 2, 1).estimate, pi, "disk q2");
}

TEST(PolarLength, PlaneCurves) {
  expect_within(length(Shape(plcatalog::square_boundary()), 1, 1).estimate, 4.0, "square q1");
  expect_within(length(Shape(plcatalog::square_boundary()), 0, 200).estimate, 0.0, "square q0");
  expect_within(length(Shape(plcatalog::segment()), 0, 200).estimate, 1.0, "segment q0");
}

TEST(PolarLength, SliceChiModeAgrees) {
  const Shape t(smoothcatalog::torus(2, 1));
  expect_within(length(t, 1, 40, 1, AlphaMode::slice_chi).estimate, 0.0, "torus slice-chi");
}

TEST(PolarLength, UniformPlanesRarelyRejected) {
  for (const Shape& x : {Shape(plcatalog::solid_cube()), Shape(plcatalog::octahedron_boundary()),
                         Shape(smoothcatalog::sphere(1))}) {
    const PolarLengthResult r = length(x, 0, 300);
    EXPECT_LT(static_cast<double>(r.resampled) / 300, 0.01) << x.id();
  }
}

TEST(Genericity, AxisAlignedCubeIsFlagged) {
  const PolarContext ctx{Shape(plcatalog::solid_cube())};
  for (const auto& axes : std::vector<std::vector<int>>{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}}) {
    const PolarSample s = polar_sample(ctx, coordinate_plane(axes));
    EXPECT_TRUE(s.degenerate());
    EXPECT_EQ(s.report.flags.front().kind, "pl dimension");
  }
}

TEST(Genericity, AxialTorusIsFlagged) {
  const PolarContext ctx{Shape(smoothcatalog::torus(2, 1))};
  for (const auto& axes : std::vector<std::vector<int>>{{2}, {0, 2}, {1, 2}})
    EXPECT_TRUE(polar_sample(ctx, coordinate_plane(axes)).degenerate());
}

TEST(Genericity, RotatedAxialTorusIsFlagged) {
  RandomSource rng(6);
  const Mat rot = sample_rotation(3, rng);
  const PolarContext ctx{Shape(smoothcatalog::torus(2, 1)).transformed(1.0, rot, Vec::Zero(3))};
  Mat axis = rot.col(2);
  EXPECT_TRUE(polar_sample(ctx, LinearSubspace::span_of(axis)).degenerate());
}

TEST(Genericity, QuotaExceededCarriesHistogram) {
  PolarLengthOptions o;
  o.n_planes = 20;
  o.polar.pl_rank_tol = 0.999;
  try {
    polar_length(Shape(plcatalog::solid_cube()), 1, RandomSource(1), o);
    FAIL() << "expected PolarQuotaExceeded";
  } catch (const PolarQuotaExceeded& e) {
    ASSERT_TRUE(e.histogram.count("pl dimension"));
    EXPECT_GT(e.histogram.at("pl dimension"), 0);
  }
}

TEST(PolarVariety, SphereHeightHasMinimumAndMaximum) {
  const PolarContext ctx{Shape(smoothcatalog::sphere(1))};
  RandomSource rng(2);
  const PolarSample s = polar_sample(ctx, sample_grassmannian(3, 1, rng));
  ASSERT_FALSE(s.degenerate()) << s.report.summary();
  ASSERT_EQ(s.pieces.size(), 2u);
  std::vector<int> idx{s.pieces[0].morse_index, s.pieces[1].morse_index};
  std::sort(idx.begin(), idx.end());
  EXPECT_EQ(idx, (std::vector<int>{0, 2}));
  for (const auto& p : s.pieces) EXPECT_DOUBLE_EQ(p.alpha, 1.0);
}

TEST(PolarVariety, SphereSilhouetteIsAGreatCircleWithZeroWeight) {
  const PolarContext ctx{Shape(smoothcatalog::sphere(1))};
  RandomSource rng(4);
  const PolarSample s = polar_sample(ctx, sample_grassmannian(3, 2, rng));
  ASSERT_FALSE(s.degenerate()) << s.report.summary();
  double total = 0;
  for (const auto& p : s.pieces) {
    EXPECT_EQ(p.kind, PieceKind::polyline);
    EXPECT_DOUBLE_EQ(p.alpha, 0.0);
    for (int j = 0; j < p.geometry.cols(); ++j) EXPECT_NEAR(p.geometry.col(j).norm(), 1.0, 1e-5);
    total += 1;
  }
  EXPECT_GE(total, 1);
}

TEST(Crofton, LengthAndArea) {
  std::vector<Mat> edges;
  const StratifiedComplex sq = plcatalog::square_boundary();
  for (std::size_t e : sq.cells_of_dim(1)) edges.push_back(sq.cell_points(e));
  const Estimate len = crofton_volume(edges, 2, 20000, RandomSource(3));
  expect_within(len, 4.0, "square perimeter");
  std::vector<Mat> tris;
  const StratifiedComplex cb = plcatalog::cube_boundary();
  for (std::size_t t : cb.cells_of_dim(2)) tris.push_back(cb.cell_points(t));
  expect_within(crofton_volume(tris, 3, 20000, RandomSource(4)), 6.0, "cube surface");
  EXPECT_THROW(crofton_volume(edges, 4, 10, RandomSource(1)), std::domain_error);
}

TEST(Determinism, SerialEqualsParallelBitwise) {
  const Shape cube(plcatalog::solid_cube());
  const PolarLengthResult a = length(cube, 1, 120, 1);
  const PolarLengthResult b = length(cube, 1, 120, 3);
  EXPECT_EQ(a.estimate.value, b.estimate.value);
  EXPECT_EQ(a.estimate.std_error, b.estimate.std_error);
  EXPECT_EQ(a.resampled, b.resampled);
}

TEST(Errors, DegreeOutOfRange) {
  EXPECT_THROW(length(Shape(plcatalog::solid_cube()), 4, 10), std::domain_error);
}
