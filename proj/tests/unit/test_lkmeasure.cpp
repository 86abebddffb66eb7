#include "lkpolar/lkmeasure.hpp"
#include "lkpolar/smoothshape.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace lkpolar;
using oracle::pi;

namespace {

StratifiedComplex box(const std::vector<double>& sides) {
  const StratifiedComplex unit = plcatalog::solid_cube();
  std::vector<Vec> verts = unit.vertices();
  for (Vec& v : verts)
    for (int i = 0; i < 3; ++i) v[i] *= sides[static_cast<std::size_t>(i)];
  std::vector<Cell> cells;
  for (std::size_t c = 0; c < unit.cell_count(); ++c) cells.push_back(unit.cell(c));
  return StratifiedComplex(3, std::move(verts), std::move(cells));
}

double lk(const Shape& x, int k, std::int64_t n = 2000) {
  return lk_measure(x, k, RandomSource(17).substream(static_cast<std::uint64_t>(k)), {n, 1, 50}).estimate.value;
}

void expect_vector(const Shape& x, const std::vector<double>& expected, double tol) {
  for (std::size_t k = 0; k < expected.size(); ++k)
    EXPECT_NEAR(lk(x, static_cast<int>(k)), expected[k], tol) << x.id() << " k=" << k;
}

Region half_space(int axis, double offset) {
  Vec n = Vec::Zero(3);
  n[axis] = 1.0;
  return Region{HalfSpace{n, offset}};
}

}  // namespace

TEST(Intrinsic, SolidCube) {
  const Shape cube(plcatalog::solid_cube(), "cube");
  expect_vector(cube, oracle::box_intrinsic_volumes({1, 1, 1}), 1e-12);
}

TEST(Intrinsic, AnisotropicBox) {
  const std::vector<double> sides{0.5, 1.3, 2.0};
  const Shape b(box(sides), "box");
  expect_vector(b, oracle::box_intrinsic_volumes(sides), 1e-12);
}

TEST(Intrinsic, SmoothCatalog) {
  expect_vector(Shape(smoothcatalog::sphere(1.5)), {2, 0, 4 * pi * 2.25}, 1e-8);
  expect_vector(Shape(smoothcatalog::torus(2, 1)), {0, 0, 8 * pi * pi}, 1e-8);
  expect_vector(Shape(smoothcatalog::disk(1.2)), {1, pi * 1.2, pi * 1.44}, 1e-8);
  expect_vector(Shape(smoothcatalog::hemisphere(1)), {1, pi, 2 * pi}, 1e-8);
  expect_vector(Shape(smoothcatalog::circle(0.7)), {0, 2 * pi * 0.7}, 1e-8);
  expect_vector(Shape(smoothcatalog::ellipse(2, 1)), {0, oracle::ellipse_perimeter(2, 1)}, 1e-6);
  std::vector<double> ball;
  for (int k = 0; k <= 3; ++k) ball.push_back(oracle::ball_intrinsic_volume(3, k, 1.1));
  expect_vector(Shape(smoothcatalog::ball(1.1)), ball, 1e-8);
}

TEST(Intrinsic, ClosedPolyhedralSurfaces) {
  expect_vector(Shape(plcatalog::cube_boundary()), {2, 0, 6}, 1e-12);
  expect_vector(Shape(plcatalog::octahedron_boundary()), {2, 0, 4 * std::sqrt(3.0)}, 1e-12);
  expect_vector(Shape(plcatalog::square_boundary()), {0, 4}, 1e-12);
  expect_vector(Shape(plcatalog::segment()), {1, 1}, 1e-12);
}

TEST(Intrinsic, TopDegreeIsVolume) {
  const StratifiedComplex t = plcatalog::seven_vertex_torus();
  double area = 0.0;
  for (std::size_t c : t.cells_of_dim(2)) area += t.cell_volume(c);
  EXPECT_NEAR(lk(Shape(t), 2), area, 1e-9 * area);
  EXPECT_NEAR(lk(Shape(t), 0), 0.0, 1e-12);
}

TEST(Intrinsic, SmoothRouteIsExact) {
  const LkResult r = lk_measure(Shape(smoothcatalog::torus(2, 1)), 0, RandomSource(1), {1, 1, 50});
  EXPECT_EQ(r.method, "exact Gauss–Bonnet route");
  EXPECT_EQ(r.estimate.std_error, 0.0);
  EXPECT_NEAR(r.estimate.value, 0.0, 1e-12);
}

TEST(Region, CubeHalfSpace) {
  // x < 1/2 keeps the face x = 0 and half of everything parallel to e_1
  const Shape cut = Shape(plcatalog::solid_cube()).with_region(half_space(0, 0.5));
  const LkResult l0 = lk_measure(cut, 0, RandomSource(17), {4000, 1, 50});
  EXPECT_NEAR(l0.estimate.value, 0.5, 4 * l0.estimate.std_error);
  const double expected[] = {0.5, 1.5, 1.5, 0.5};
  for (int k = 1; k <= 3; ++k) EXPECT_NEAR(lk(cut, k), expected[k], 1e-12) << k;
}

TEST(Region, AdditiveOverComplementaryHalfSpaces) {
  const Shape torus(smoothcatalog::torus(2, 1));
  Vec n(3);
  n << 0.3, -0.5, 0.81;
  n.normalize();
  for (int k = 0; k <= 2; ++k) {
    const double a = lk(torus.with_region(Region{HalfSpace{n, 0.2}}), k);
    const double b = lk(torus.with_region(Region{HalfSpace{-n, -0.2}}), k);
    EXPECT_NEAR(a + b, lk(torus, k), 1e-5 * (1 + std::abs(lk(torus, k)))) << k;
  }
}

TEST(Properties, Homogeneity) {
  for (const Shape& x : {Shape(plcatalog::octahedron_boundary()), Shape(smoothcatalog::torus(2, 1)),
                         Shape(plcatalog::solid_cube())}) {
    const double t = 1.7;
    const Shape y = x.transformed(t, Mat::Identity(3, 3), Vec::Zero(3));
    for (int k = 0; k <= x.dim(); ++k) EXPECT_NEAR(lk(y, k), std::pow(t, k) * lk(x, k), 1e-7 * std::pow(t, k) * (1 + lk(x, k)));
  }
}

TEST(Properties, RigidMotionInvariance) {
  RandomSource rng(99);
  for (const Shape& x : {Shape(plcatalog::solid_cube()), Shape(smoothcatalog::torus(2, 1)),
                         Shape(plcatalog::seven_vertex_torus())}) {
    const Shape y = x.transformed(1.0, sample_rotation(3, rng), sample_gaussian(3, rng));
    for (int k = 0; k <= x.dim(); ++k) {
      const LkResult a = lk_measure(x, k, RandomSource(3), {2000, 1, 50});
      const LkResult b = lk_measure(y, k, RandomSource(3), {2000, 1, 50});
      EXPECT_LE(std::abs(a.estimate.value - b.estimate.value),
                3 * combined_error(a.estimate, b.estimate) + 1e-8 * (1 + std::abs(a.estimate.value)))
          << x.id() << " k=" << k;
    }
  }
}

TEST(LambdaDensity, CubeCellsByCodimension) {
  const Shape cube(plcatalog::solid_cube());
  const StratifiedComplex& k = cube.complex();
  // interior cells of the triangulation carry nothing below full dimension
  EXPECT_NEAR(lambda_density(cube, {k.cells_of_dim(3).front(), Vec()}, 3, RandomSource(1)).value, 1.0, 1e-14);
  const std::size_t corner = k.vertex_cell(0);
  const Estimate v = lambda_density(cube, {corner, Vec()}, 0, RandomSource(2), 40000);
  EXPECT_NEAR(v.value, 1.0 / 8, 3 * v.std_error + 1e-12);
}

TEST(Exchange, MorseCountsAverageToEuler) {
  struct Case {
    Shape x;
    double chi;
  };
  const std::vector<Case> cases{{Shape(smoothcatalog::sphere(1)), 2},
                                {Shape(smoothcatalog::torus(2, 1)), 0},
                                {Shape(plcatalog::octahedron_boundary()), 2},
                                {Shape(smoothcatalog::hemisphere(1)), 1}};
  for (const auto& c : cases) {
    const ExchangeResult r = exchange_lambda0(c.x, RandomSource(5), {300, 1, 50});
    EXPECT_EQ(r.dropped, 0);
    EXPECT_NEAR(r.estimate.value, c.chi, 3 * r.estimate.std_error + 1e-12) << c.x.id();
  }
}

TEST(Exchange, SingleDirectionOnSphere) {
  Vec v(3);
  v << 0.2, -0.3, 0.93;
  EXPECT_EQ(morse_count(Shape(smoothcatalog::sphere(1)), v.normalized()), 2);
}

TEST(Slices, EulerCharacteristics) {
  Mat e12(3, 2);
  e12 << 1, 0, 0, 1, 0, 0;
  const LinearSubspace plane = LinearSubspace::span_of(e12);
  Vec off = Vec::Zero(3);
  off[2] = 0.3;
  EXPECT_EQ(slice_euler(Shape(smoothcatalog::sphere(1)), AffineFlat(plane, off)), 0);
  EXPECT_EQ(slice_euler(Shape(plcatalog::solid_cube()), AffineFlat(plane, off)), 1);
  off[2] = 1.7;
  EXPECT_EQ(slice_euler(Shape(plcatalog::solid_cube()), AffineFlat(plane, off)), 0);
}

TEST(Kinematic, RatioIsShapeIndependent) {
  for (int k = 1; k <= 2; ++k) {
    std::vector<double> ratios;
    for (const Shape& x : {Shape(plcatalog::solid_cube()), Shape(smoothcatalog::ball(1)),
                           Shape(smoothcatalog::ball(2.5))}) {
      const KinematicResult r = kinematic_check(x, k, RandomSource(21), {4000, 1, 50});
      EXPECT_FALSE(r.division_flagged);
      ratios.push_back(r.ratio.value);
    }
    for (double r : ratios) EXPECT_NEAR(r / ratios.front(), 1.0, 0.05) << k;
  }
}

TEST(Steiner, BoxCoefficients) {
  const std::vector<double> sides{1, 1, 1};
  const Shape cube(plcatalog::solid_cube());
  const SteinerFit fit = steiner_oracle(cube, {0.1, 0.2, 0.35, 0.5, 0.7}, 400000, RandomSource(4));
  const auto v = oracle::box_intrinsic_volumes(sides);
  for (int k = 0; k <= 3; ++k) {
    const double expected = v[static_cast<std::size_t>(k)] * oracle::unit_ball_volume(3 - k);
    const Estimate& c = fit.coefficients[static_cast<std::size_t>(k)];
    EXPECT_NEAR(c.value, expected, std::max(0.02 * expected, 4 * c.std_error)) << k;
  }
  for (std::size_t i = 0; i < fit.epsilons.size(); ++i)
    EXPECT_NEAR(fit.volumes[i].value, oracle::box_dilation_volume(sides, fit.epsilons[i]),
                4 * fit.volumes[i].std_error + 1e-3);
}

TEST(Steiner, RejectsBadLadders) {
  const Shape cube(plcatalog::solid_cube());
  EXPECT_THROW(steiner_oracle(cube, {0.1, 0.2}, 1000, RandomSource(1)), std::invalid_argument);
  EXPECT_THROW(steiner_oracle(cube, {0.1, 0.1, 0.2, 0.3}, 1000, RandomSource(1)), std::invalid_argument);
}

TEST(Distance, BallAndCube) {
  Vec p(3);
  p << 2, 0.5, 0.5;
  EXPECT_NEAR(distance_to_shape(Shape(plcatalog::solid_cube()), p), 1.0, 1e-12);
  p << 2, 0, 0;
  EXPECT_NEAR(distance_to_shape(Shape(smoothcatalog::ball(1)), p), 1.0, 1e-12);
  EXPECT_NEAR(distance_to_shape(Shape(smoothcatalog::sphere(1)), Vec::Zero(3)), 1.0, 1e-12);
}

TEST(Errors, DegreeOutOfRange) {
  EXPECT_THROW(lk_measure(Shape(plcatalog::solid_cube()), 4, RandomSource(1)), std::domain_error);
  EXPECT_THROW(lk_measure(Shape(plcatalog::solid_cube()), -1, RandomSource(1)), std::domain_error);
  EXPECT_THROW(kinematic_check(Shape(plcatalog::solid_cube()), 3, RandomSource(1)), std::domain_error);
}

TEST(Determinism, SerialEqualsParallel) {
  const Shape x(smoothcatalog::torus(2, 1));
  const ExchangeResult a = exchange_lambda0(x, RandomSource(8), {200, 1, 50});
  const ExchangeResult b = exchange_lambda0(x, RandomSource(8), {200, 3, 50});
  EXPECT_EQ(a.estimate.value, b.estimate.value);
  EXPECT_EQ(a.estimate.std_error, b.estimate.std_error);
}
