#include "lkpolar/smoothshape.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace lkpolar;
using oracle::pi;

namespace {

double stratum_volume(const SmoothStratum& s) {
  return integrate_stratum(s, [](const Vec&, const ChartJet&) { return 1.0; }).value;
}

const SmoothStratum& stratum_named(const SmoothShape& x, const std::string& name) {
  for (const auto& s : x.strata())
    if (s.name == name) return s;
  throw std::out_of_range(name);
}

const SmoothStratum& top(const SmoothShape& x) {
  for (const auto& s : x.strata())
    if (!s.is_boundary()) return s;
  throw std::out_of_range("top");
}

std::vector<SmoothShape> all_shapes() {
  return {smoothcatalog::sphere(1.5), smoothcatalog::torus(2, 1),     smoothcatalog::disk(1.2),
          smoothcatalog::hemisphere(1), smoothcatalog::circle(0.7), smoothcatalog::ellipse(2, 1),
          smoothcatalog::ball(1.1)};
}

}  // namespace

TEST(Areas, MatchClosedForms) {
  EXPECT_NEAR(stratum_volume(top(smoothcatalog::sphere(1.5))), 4 * pi * 2.25, 1e-9);
  EXPECT_NEAR(stratum_volume(top(smoothcatalog::torus(2, 1))), 4 * pi * pi * 2, 1e-9);
  EXPECT_NEAR(stratum_volume(top(smoothcatalog::disk(1.2))), pi * 1.44, 1e-9);
  EXPECT_NEAR(stratum_volume(top(smoothcatalog::hemisphere(1))), 2 * pi, 1e-9);
  EXPECT_NEAR(stratum_volume(top(smoothcatalog::circle(0.7))), 2 * pi * 0.7, 1e-9);
  EXPECT_NEAR(stratum_volume(top(smoothcatalog::ellipse(2, 1))), oracle::ellipse_perimeter(2, 1), 1e-6);
  EXPECT_NEAR(stratum_volume(top(smoothcatalog::ball(1.1))), 4.0 / 3 * pi * std::pow(1.1, 3), 1e-9);
}

TEST(Areas, BoundaryLengths) {
  for (const auto& x : {smoothcatalog::disk(1.2), smoothcatalog::hemisphere(1.2)})
    for (const auto& s : x.strata())
      if (s.is_boundary() && s.dim == 1) EXPECT_NEAR(stratum_volume(s), 2 * pi * 1.2, 1e-9) << x.tag();
}

TEST(Charts, PointsLieOnImplicitZeroSet) {
  for (const auto& x : all_shapes())
    for (const auto& s : x.strata()) {
      if (!s.implicit) continue;
      const ChartGrid g = chart_grid(s, 9);
      for (const Vec& u : g.nodes) EXPECT_LT(s.implicit(s.jet(u).point).norm(), 1e-10) << x.tag() << " " << s.name;
    }
}

TEST(Charts, JacobianMatchesFiniteDifferences) {
  const double h = 1e-6;
  for (const auto& x : all_shapes())
    for (const auto& s : x.strata()) {
      if (s.dim == 0) continue;
      const Vec u = s.center() + 0.1 * Vec::Ones(s.dim);
      const ChartJet j = s.jet(u);
      for (int i = 0; i < s.dim; ++i) {
        Vec du = Vec::Zero(s.dim);
        du[i] = h;
        const ChartJet jp = s.jet(u + du), jm = s.jet(u - du);
        EXPECT_LT((j.jacobian.col(i) - (jp.point - jm.point) / (2 * h)).norm(), 1e-6) << x.tag();
        for (int k = 0; k < s.dim; ++k)
          EXPECT_LT((j.d2(i, k) - (jp.jacobian.col(k) - jm.jacobian.col(k)) / (2 * h)).norm(), 1e-5) << x.tag();
      }
    }
}

TEST(Frames, OrthonormalAndComplementary) {
  for (const auto& x : all_shapes())
    for (const auto& s : x.strata()) {
      if (s.dim == 0) continue;
      const Frames f = frames(s, s.center() + 0.05 * Vec::Ones(s.dim));
      Mat q(x.ambient_dim(), x.ambient_dim());
      q << f.tangent, f.normal;
      EXPECT_LT((q.transpose() * q - Mat::Identity(q.cols(), q.cols())).norm(), 1e-10) << x.tag();
    }
}

TEST(SecondForm, RoundSphere) {
  const double r = 2.0;
  const SmoothStratum& s = top(smoothcatalog::sphere(r));
  const Vec u = s.center() + 0.2 * Vec::Ones(2);
  const Vec outward = s.jet(u).point.normalized();
  const SecondFormAt ii = second_form(s, u, outward);
  EXPECT_LT((ii.matrix + Mat::Identity(2, 2) / r).norm(), 1e-10);
}

TEST(SecondForm, GaussBonnetIntegrals) {
  // integral of det II over the unit normal = 2 pi chi for closed surfaces
  auto gauss = [](const SmoothStratum& s) {
    return integrate_stratum(s, [](const Vec&, const ChartJet& jet) {
             const Frames f = frames(jet);
             return elementary_symmetric(second_form_matrix(jet, f, f.normal.col(0)), 2);
           }).value;
  };
  EXPECT_NEAR(gauss(top(smoothcatalog::sphere(1.3))), 4 * pi, 1e-8);
  EXPECT_NEAR(gauss(top(smoothcatalog::torus(3, 1))), 0.0, 1e-8);
}

TEST(ElementarySymmetric, Diagonal) {
  const Mat d = Eigen::Vector3d(1, 2, 3).asDiagonal();
  EXPECT_NEAR(elementary_symmetric(d, 0), 1, 1e-14);
  EXPECT_NEAR(elementary_symmetric(d, 1), 6, 1e-14);
  EXPECT_NEAR(elementary_symmetric(d, 2), 11, 1e-12);
  EXPECT_NEAR(elementary_symmetric(d, 3), 6, 1e-12);
}

TEST(NormalRule, WeightsSumToSphereVolume) {
  Mat n1(3, 1);
  n1 << 0, 0, 1;
  const NormalRule r1 = normal_sphere_rule(n1);
  double w1 = 0;
  for (double w : r1.weights) w1 += w;
  EXPECT_NEAR(w1, 2.0, 1e-14);
  Mat n2(3, 2);
  n2 << 1, 0, 0, 1, 0, 0;
  const NormalRule r2 = normal_sphere_rule(n2);
  EXPECT_EQ(r2.directions.size(), static_cast<std::size_t>(kCircleRulePoints));
  double w2 = 0;
  for (double w : r2.weights) w2 += w;
  EXPECT_NEAR(w2, 2 * pi, 1e-12);
}

TEST(Boundary, DiskConormalPointsInward) {
  const SmoothShape d = smoothcatalog::disk(1.0);
  for (const auto& s : d.strata()) {
    if (!s.is_boundary()) continue;
    for (double t : {0.1, 1.0, 2.5, 4.0}) {
      Vec u(1);
      u << t;
      const Vec x = s.jet(u).point;
      EXPECT_GT(s.inward_conormal(u).dot(-x), 0.9);
    }
  }
}

TEST(Transform, ScalesAreas) {
  RandomSource rng(4);
  const SmoothShape t = smoothcatalog::torus(2, 1).transformed(1.5, sample_rotation(3, rng), Vec::Ones(3));
  EXPECT_NEAR(stratum_volume(top(t)), 4 * pi * pi * 2 * 2.25, 1e-8);
  EXPECT_NEAR(t.bound_radius(), 1.5 * smoothcatalog::torus(2, 1).bound_radius(), 1e-12);
}

TEST(Catalog, RejectsBadParameters) {
  EXPECT_THROW(smoothcatalog::sphere(-1), std::invalid_argument);
  EXPECT_THROW(smoothcatalog::torus(1, 2), std::invalid_argument);
  EXPECT_NO_THROW(stratum_named(smoothcatalog::ball(1), "interior"));
}
