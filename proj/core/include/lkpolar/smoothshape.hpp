#pragma once

#include "lkpolar/geomkit.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lkpolar {

class DegenerateChart : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EdgeKind { periodic, boundary, collapsed };

struct ChartAxis {
  double lo = 0.0;
  double hi = 1.0;
  EdgeKind lo_edge = EdgeKind::boundary;
  EdgeKind hi_edge = EdgeKind::boundary;

  bool periodic() const { return lo_edge == EdgeKind::periodic; }
  double span() const { return hi - lo; }
};

// point, first and second derivatives of the chart at u
struct ChartJet {
  Vec point;
  Mat jacobian;             // n x d
  std::vector<Vec> second;  // d*d entries, r_ij at i*d + j

  const Vec& d2(int i, int j) const { return second[static_cast<std::size_t>(i * jacobian.cols() + j)]; }
};

struct SmoothStratum {
  std::string name;
  int dim = 0;
  std::vector<ChartAxis> axes;
  std::function<ChartJet(const Vec&)> jet;
  // R^n -> R^{n-dim}, vanishing on the stratum; unset when dim == n
  std::function<Vec(const Vec&)> implicit;
  std::function<Mat(const Vec&)> implicit_jacobian;
  // chart point -> unit normal pointing into the adjacent top stratum; unset on top strata
  std::function<Vec(const Vec&)> inward_conormal;

  bool is_boundary() const { return static_cast<bool>(inward_conormal); }
  // chart midpoint
  Vec center() const;
};

class SmoothShape {
 public:
  SmoothShape() = default;
  SmoothShape(std::string tag, int ambient_dim, std::vector<SmoothStratum> strata, Vec bound_center,
              double bound_radius);

  const std::string& tag() const { return tag_; }
  int ambient_dim() const { return n_; }
  int dim() const;
  const std::vector<SmoothStratum>& strata() const { return strata_; }
  const Vec& bound_center() const { return center_; }
  double bound_radius() const { return radius_; }
  double diameter() const { return 2.0 * radius_; }

  // x -> s R x + t
  SmoothShape transformed(double scale, const Mat& rotation, const Vec& translation) const;

  // Euler characteristic of the shape cut by a generic affine flat, for catalog
  // entries with a closed form
  std::function<std::optional<int>(const AffineFlat&)> slice_euler;

 private:
  std::string tag_;
  int n_ = 0;
  std::vector<SmoothStratum> strata_;
  Vec center_;
  double radius_ = 0.0;
};

struct Frames {
  Mat tangent;  // n x d, orthonormal
  Mat normal;   // n x (n - d), orthonormal
  Mat r_factor; // d x d, jacobian = tangent * r_factor
};

// throws DegenerateChart when the jacobian is rank deficient
Frames frames(const ChartJet& jet);
Frames frames(const SmoothStratum& s, const Vec& u);

struct SecondFormAt {
  Vec point;
  Mat tangent;
  Vec normal;
  Mat matrix;  // d x d in the tangent frame
};

// <D^2 r(W_i, W_j), v>; unit sphere with outward v gives -I
SecondFormAt second_form(const SmoothStratum& s, const Vec& u, const Vec& v);
Mat second_form_matrix(const ChartJet& jet, const Frames& f, const Vec& v);

// elementary symmetric function of the eigenvalues of a symmetric matrix
double elementary_symmetric(const Mat& sym, int i);

// points and weights of the normal-sphere rule used for codimension 1 and 2
struct NormalRule {
  std::vector<Vec> directions;
  std::vector<double> weights;  // sum to the normal sphere volume
};
NormalRule normal_sphere_rule(const Mat& normal_frame);
inline constexpr int kCircleRulePoints = 64;

// integral over the unit normal sphere of sigma_i(II_v)
double lkw_curvature(const SmoothStratum& s, const Vec& u, int i);

struct QuadratureOptions {
  int nodes_per_axis = 0;  // 0 picks a default by chart dimension
};

using ChartDensity = std::function<double(const Vec& u, const ChartJet& jet)>;
using RegionPredicate = std::function<bool(const Vec& x)>;

// chart quadrature with the Riemannian area element; std_error is the gap
// between the rule and the rule with half the nodes
Estimate integrate_stratum(const SmoothStratum& s, const ChartDensity& density, const RegionPredicate& region = {},
                           QuadratureOptions opts = {});

// tensor-product nodes on the chart domain with their parameter weights
struct ChartGrid {
  std::vector<Vec> nodes;
  std::vector<double> weights;
};
ChartGrid chart_grid(const SmoothStratum& s, int nodes_per_axis);

namespace smoothcatalog {

SmoothShape sphere(double radius);
SmoothShape torus(double major, double minor);
SmoothShape disk(double radius);
SmoothShape hemisphere(double radius);
SmoothShape circle(double radius);
SmoothShape ellipse(double a, double b);
SmoothShape ball(double radius);

}  // namespace smoothcatalog

}  // namespace lkpolar
