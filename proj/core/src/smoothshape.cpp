#include "lkpolar/smoothshape.hpp"

#include <cmath>
#include <numbers>

namespace lkpolar {

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec3(double x, double y, double z) { return (Vec(3) << x, y, z).finished(); }

ChartJet make_jet(Vec p, Mat j, std::vector<Vec> second) { return {std::move(p), std::move(j), std::move(second)}; }

ChartAxis periodic_axis(double lo, double hi) { return {lo, hi, EdgeKind::periodic, EdgeKind::periodic}; }

ChartJet sphere_jet(double r, double th, double ph) {
  const double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
  Vec p = r * vec3(st * cp, st * sp, ct);
  Mat j(3, 2);
  j.col(0) = r * vec3(ct * cp, ct * sp, -st);
  j.col(1) = r * vec3(-st * sp, st * cp, 0.0);
  Vec tt = -p;
  Vec tp = r * vec3(-ct * sp, ct * cp, 0.0);
  Vec pp = r * vec3(-st * cp, -st * sp, 0.0);
  return make_jet(std::move(p), std::move(j), {tt, tp, tp, pp});
}

// circle of radius r in the plane z = 0 of R^3
ChartJet rim_jet(double r, double t) {
  const double c = std::cos(t), s = std::sin(t);
  Mat j(3, 1);
  j.col(0) = r * vec3(-s, c, 0.0);
  return make_jet(r * vec3(c, s, 0.0), std::move(j), {r * vec3(-c, -s, 0.0)});
}

Vec sphere_implicit(const Vec& x, double r) { return (Vec(1) << x.squaredNorm() - r * r).finished(); }
Mat sphere_implicit_jac(const Vec& x) { return 2.0 * x.transpose(); }

SmoothStratum sphere_stratum(double r, std::string name, double theta_hi, EdgeKind hi_edge) {
  SmoothStratum s;
  s.name = std::move(name);
  s.dim = 2;
  s.axes = {{0.0, theta_hi, EdgeKind::collapsed, hi_edge}, periodic_axis(0.0, 2.0 * kPi)};
  s.jet = [r](const Vec& u) { return sphere_jet(r, u[0], u[1]); };
  s.implicit = [r](const Vec& x) { return sphere_implicit(x, r); };
  s.implicit_jacobian = [](const Vec& x) { return sphere_implicit_jac(x); };
  return s;
}

SmoothStratum rim_stratum(double r, std::string name, Vec (*conormal)(double t), bool on_sphere) {
  SmoothStratum s;
  s.name = std::move(name);
  s.dim = 1;
  s.axes = {periodic_axis(0.0, 2.0 * kPi)};
  s.jet = [r](const Vec& u) { return rim_jet(r, u[0]); };
  if (on_sphere) {
    s.implicit = [r](const Vec& x) { return (Vec(2) << x.squaredNorm() - r * r, x[2]).finished(); };
    s.implicit_jacobian = [](const Vec& x) {
      Mat m(2, 3);
      m.row(0) = 2.0 * x.transpose();
      m.row(1) << 0.0, 0.0, 1.0;
      return m;
    };
  } else {
    s.implicit = [r](const Vec& x) { return (Vec(2) << x[0] * x[0] + x[1] * x[1] - r * r, x[2]).finished(); };
    s.implicit_jacobian = [](const Vec& x) {
      Mat m(2, 3);
      m << 2.0 * x[0], 2.0 * x[1], 0.0, 0.0, 0.0, 1.0;
      return m;
    };
  }
  if (conormal) s.inward_conormal = [conormal](const Vec& u) { return conormal(u[0]); };
  return s;
}

// distance from the origin to flat ∩ {z = 0}; empty when the flat is parallel to the plane
std::optional<double> plane_section_distance(const AffineFlat& e) {
  const Mat& d = e.direction.basis();
  if (d.cols() == 0) return std::nullopt;
  const Vec dz = d.row(2).transpose();
  const double g = dz.squaredNorm();
  if (g < 1e-24) return std::nullopt;
  const double oz = e.offset[2];
  return std::sqrt(e.offset.squaredNorm() + oz * oz / g);
}

int sphere_section_euler(int k) { return k % 2 == 1 ? 2 : 0; }

}  // namespace

Vec SmoothStratum::center() const {
  Vec u(static_cast<Eigen::Index>(axes.size()));
  for (std::size_t i = 0; i < axes.size(); ++i) u[static_cast<Eigen::Index>(i)] = 0.5 * (axes[i].lo + axes[i].hi);
  return u;
}

SmoothShape::SmoothShape(std::string tag, int ambient_dim, std::vector<SmoothStratum> strata, Vec bound_center,
                         double bound_radius)
    : tag_(std::move(tag)),
      n_(ambient_dim),
      strata_(std::move(strata)),
      center_(std::move(bound_center)),
      radius_(bound_radius) {
  if (strata_.empty()) throw std::invalid_argument("SmoothShape: no strata");
  for (const auto& s : strata_)
    if (s.dim < 0 || s.dim > n_ || static_cast<int>(s.axes.size()) != s.dim)
      throw std::invalid_argument("SmoothShape: stratum " + s.name + " has inconsistent dimensions");
}

int SmoothShape::dim() const {
  int d = 0;
  for (const auto& s : strata_) d = std::max(d, s.dim);
  return d;
}

SmoothShape SmoothShape::transformed(double scale, const Mat& rotation, const Vec& translation) const {
  if (scale <= 0) throw std::invalid_argument("SmoothShape::transformed: scale must be positive");
  const Mat a = scale * rotation;
  const Mat rt = rotation.transpose();
  std::vector<SmoothStratum> out;
  for (const SmoothStratum& s : strata_) {
    SmoothStratum t = s;
    t.jet = [a, translation, jet = s.jet](const Vec& u) {
      ChartJet j = jet(u);
      j.point = a * j.point + translation;
      j.jacobian = a * j.jacobian;
      for (Vec& r : j.second) r = a * r;
      return j;
    };
    if (s.implicit) {
      t.implicit = [rt, scale, translation, f = s.implicit](const Vec& x) { return f(rt * (x - translation) / scale); };
      t.implicit_jacobian = [rt, scale, translation, f = s.implicit_jacobian](const Vec& x) -> Mat {
        return f(rt * (x - translation) / scale) * rt / scale;
      };
    }
    if (s.inward_conormal)
      t.inward_conormal = [rotation, c = s.inward_conormal](const Vec& u) -> Vec { return rotation * c(u); };
    out.push_back(std::move(t));
  }
  SmoothShape r(tag_, n_, std::move(out), a * center_ + translation, scale * radius_);
  if (slice_euler)
    r.slice_euler = [rt, scale, translation, f = slice_euler](const AffineFlat& e) {
      const LinearSubspace dir = e.direction.transformed(rt);
      Vec off = rt * (e.offset - translation) / scale;
      off -= dir.project(off);
      return f(AffineFlat(dir, off));
    };
  return r;
}

Frames frames(const ChartJet& jet) {
  const Mat& j = jet.jacobian;
  const int n = static_cast<int>(j.rows());
  const int d = static_cast<int>(j.cols());
  Frames f;
  if (d == 0) {
    f.tangent = Mat(n, 0);
    f.normal = Mat::Identity(n, n);
    f.r_factor = Mat(0, 0);
    return f;
  }
  Eigen::HouseholderQR<Mat> qr(j);
  const Mat q = qr.householderQ() * Mat::Identity(n, n);
  f.tangent = q.leftCols(d);
  f.normal = q.rightCols(n - d);
  f.r_factor = f.tangent.transpose() * j;
  const Eigen::JacobiSVD<Mat> svd(j);
  const Vec sv = svd.singularValues();
  if (sv[d - 1] < 1e-12 * std::max(1.0, sv[0])) throw DegenerateChart("frames: rank-deficient chart jacobian");
  return f;
}

Frames frames(const SmoothStratum& s, const Vec& u) { return frames(s.jet(u)); }

Mat second_form_matrix(const ChartJet& jet, const Frames& f, const Vec& v) {
  const int d = static_cast<int>(jet.jacobian.cols());
  Mat h(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) h(i, k) = jet.d2(i, k).dot(v);
  const Mat rinv = f.r_factor.triangularView<Eigen::Upper>().solve(Mat::Identity(d, d));
  Mat ii = rinv.transpose() * h * rinv;
  return 0.5 * (ii + ii.transpose());
}

SecondFormAt second_form(const SmoothStratum& s, const Vec& u, const Vec& v) {
  const ChartJet jet = s.jet(u);
  const Frames f = frames(jet);
  if (f.tangent.cols() > 0 && (f.tangent.transpose() * v).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, v.norm()))
    throw std::invalid_argument("second_form: direction is not normal to the stratum");
  return {jet.point, f.tangent, v, second_form_matrix(jet, f, v)};
}

double elementary_symmetric(const Mat& sym, int i) {
  const int d = static_cast<int>(sym.rows());
  if (i < 0 || i > d) throw std::domain_error("elementary_symmetric: index out of range");
  if (i == 0) return 1.0;
  const Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  std::vector<double> e(static_cast<std::size_t>(d) + 1, 0.0);
  e[0] = 1.0;
  for (int k = 0; k < d; ++k) {
    const double lam = es.eigenvalues()[k];
    for (int m = k + 1; m >= 1; --m) e[m] += lam * e[m - 1];
  }
  return e[i];
}

NormalRule normal_sphere_rule(const Mat& normal_frame) {
  const int m = static_cast<int>(normal_frame.cols());
  NormalRule rule;
  if (m == 0) return rule;
  if (m == 1) {
    rule.directions = {normal_frame.col(0), -normal_frame.col(0)};
    rule.weights = {1.0, 1.0};
    return rule;
  }
  if (m == 2) {
    for (int j = 0; j < kCircleRulePoints; ++j) {
      const double a = 2.0 * kPi * j / kCircleRulePoints;
      rule.directions.push_back(std::cos(a) * normal_frame.col(0) + std::sin(a) * normal_frame.col(1));
      rule.weights.push_back(2.0 * kPi / kCircleRulePoints);
    }
    return rule;
  }
  throw std::domain_error("normal_sphere_rule: codimension above 2 is not supported");
}

double lkw_curvature(const SmoothStratum& s, const Vec& u, int i) {
  if (i < 0 || i > s.dim) throw std::domain_error("lkw_curvature: need 0 <= i <= dim");
  const ChartJet jet = s.jet(u);
  const Frames f = frames(jet);
  if (f.normal.cols() == 0) throw std::domain_error("lkw_curvature: stratum has no normal sphere");
  const NormalRule rule = normal_sphere_rule(f.normal);
  double total = 0.0;
  for (std::size_t k = 0; k < rule.directions.size(); ++k)
    total += rule.weights[k] * elementary_symmetric(second_form_matrix(jet, f, rule.directions[k]), i);
  return total;
}

namespace {

QuadratureRule axis_rule(const ChartAxis& ax, int nodes) {
  QuadratureRule r;
  if (ax.periodic()) {
    const double h = ax.span() / nodes;
    for (int i = 0; i < nodes; ++i) {
      r.nodes.push_back(ax.lo + i * h);
      r.weights.push_back(h);
    }
    return r;
  }
  static const QuadratureRule gl = gauss_legendre(8);
  const int panels = std::max(1, nodes / 8);
  const double h = ax.span() / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = ax.lo + p * h;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      r.nodes.push_back(a + 0.5 * h * (gl.nodes[i] + 1.0));
      r.weights.push_back(0.5 * h * gl.weights[i]);
    }
  }
  return r;
}

int default_nodes(int dim) {
  switch (dim) {
    case 1: return 512;
    case 2: return 256;
    default: return 64;
  }
}

double area_element(const Mat& j) {
  if (j.cols() == j.rows()) return std::abs(j.determinant());
  return std::sqrt(std::max(0.0, (j.transpose() * j).determinant()));
}

double integrate_once(const SmoothStratum& s, const ChartDensity& density, const RegionPredicate& region,
                      int nodes) {
  if (s.dim == 0) {
    const Vec u(0);
    const ChartJet jet = s.jet(u);
    if (region && !region(jet.point)) return 0.0;
    return density(u, jet);
  }
  const ChartGrid g = chart_grid(s, nodes);
  CompensatedSum sum;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const ChartJet jet = s.jet(g.nodes[i]);
    if (region && !region(jet.point)) continue;
    const double w = g.weights[i] * area_element(jet.jacobian);
    if (w == 0.0) continue;
    sum.add(w * density(g.nodes[i], jet));
  }
  return sum.value();
}

}  // namespace

ChartGrid chart_grid(const SmoothStratum& s, int nodes_per_axis) {
  std::vector<QuadratureRule> rules;
  for (const ChartAxis& ax : s.axes) rules.push_back(axis_rule(ax, nodes_per_axis));
  ChartGrid g;
  std::size_t total = 1;
  for (const auto& r : rules) total *= r.nodes.size();
  g.nodes.reserve(total);
  g.weights.reserve(total);
  std::vector<std::size_t> idx(rules.size(), 0);
  for (std::size_t t = 0; t < total; ++t) {
    Vec u(static_cast<Eigen::Index>(rules.size()));
    double w = 1.0;
    for (std::size_t a = 0; a < rules.size(); ++a) {
      u[static_cast<Eigen::Index>(a)] = rules[a].nodes[idx[a]];
      w *= rules[a].weights[idx[a]];
    }
    g.nodes.push_back(std::move(u));
    g.weights.push_back(w);
    for (std::size_t a = 0; a < rules.size(); ++a) {
      if (++idx[a] < rules[a].nodes.size()) break;
      idx[a] = 0;
    }
  }
  return g;
}

Estimate integrate_stratum(const SmoothStratum& s, const ChartDensity& density, const RegionPredicate& region,
                           QuadratureOptions opts) {
  const int nodes = opts.nodes_per_axis > 0 ? opts.nodes_per_axis : default_nodes(s.dim);
  const double fine = integrate_once(s, density, region, nodes);
  const double coarse = s.dim == 0 ? fine : integrate_once(s, density, region, nodes / 2);
  return {fine, std::abs(fine - coarse), 1, 0};
}

namespace smoothcatalog {

SmoothShape sphere(double radius) {
  if (radius <= 0) throw std::invalid_argument("sphere: radius must be positive");
  SmoothShape s("sphere", 3, {sphere_stratum(radius, "sphere", kPi, EdgeKind::collapsed)}, Vec::Zero(3), radius);
  s.slice_euler = [radius](const AffineFlat& e) -> std::optional<int> {
    if (e.dim() == 0) return 0;
    return e.offset.norm() < radius ? sphere_section_euler(e.dim()) : 0;
  };
  return s;
}

SmoothShape torus(double major, double minor) {
  if (!(minor > 0 && major > minor)) throw std::invalid_argument("torus: need major > minor > 0");
  SmoothStratum t;
  t.name = "torus";
  t.dim = 2;
  t.axes = {periodic_axis(0.0, 2.0 * kPi), periodic_axis(0.0, 2.0 * kPi)};
  t.jet = [major, minor](const Vec& u) {
    const double cf = std::cos(u[0]), sf = std::sin(u[0]), cp = std::cos(u[1]), sp = std::sin(u[1]);
    const double rho = major + minor * cp;
    Mat j(3, 2);
    j.col(0) = vec3(-rho * sf, rho * cf, 0.0);
    j.col(1) = vec3(-minor * sp * cf, -minor * sp * sf, minor * cp);
    Vec ff = vec3(-rho * cf, -rho * sf, 0.0);
    Vec fp = vec3(minor * sp * sf, -minor * sp * cf, 0.0);
    Vec pp = vec3(-minor * cp * cf, -minor * cp * sf, -minor * sp);
    return make_jet(vec3(rho * cf, rho * sf, minor * sp), std::move(j), {ff, fp, fp, pp});
  };
  t.implicit = [major, minor](const Vec& x) {
    const double q = std::hypot(x[0], x[1]) - major;
    return (Vec(1) << q * q + x[2] * x[2] - minor * minor).finished();
  };
  t.implicit_jacobian = [major](const Vec& x) {
    const double h = std::hypot(x[0], x[1]);
    const double q = h - major;
    Mat m(1, 3);
    m << 2.0 * q * x[0] / h, 2.0 * q * x[1] / h, 2.0 * x[2];
    return m;
  };
  return SmoothShape("torus", 3, {t}, Vec::Zero(3), major + minor);
}

SmoothShape disk(double radius) {
  if (radius <= 0) throw std::invalid_argument("disk: radius must be positive");
  SmoothStratum top;
  top.name = "disk";
  top.dim = 2;
  top.axes = {{0.0, radius, EdgeKind::collapsed, EdgeKind::boundary}, periodic_axis(0.0, 2.0 * kPi)};
  top.jet = [](const Vec& u) {
    const double c = std::cos(u[1]), s = std::sin(u[1]);
    Mat j(3, 2);
    j.col(0) = vec3(c, s, 0.0);
    j.col(1) = vec3(-u[0] * s, u[0] * c, 0.0);
    Vec rp = vec3(-s, c, 0.0);
    return make_jet(vec3(u[0] * c, u[0] * s, 0.0), std::move(j),
                    {Vec::Zero(3), rp, rp, vec3(-u[0] * c, -u[0] * s, 0.0)});
  };
  top.implicit = [](const Vec& x) { return (Vec(1) << x[2]).finished(); };
  top.implicit_jacobian = [](const Vec&) { return (Mat(1, 3) << 0.0, 0.0, 1.0).finished(); };
  SmoothStratum rim = rim_stratum(
      radius, "rim", +[](double t) { return vec3(-std::cos(t), -std::sin(t), 0.0); }, false);
  SmoothShape s("disk", 3, {top, rim}, Vec::Zero(3), radius);
  s.slice_euler = [radius](const AffineFlat& e) -> std::optional<int> {
    const auto d = plane_section_distance(e);
    if (!d) return 0;
    return *d < radius ? 1 : 0;
  };
  return s;
}

SmoothShape hemisphere(double radius) {
  if (radius <= 0) throw std::invalid_argument("hemisphere: radius must be positive");
  SmoothStratum top = sphere_stratum(radius, "hemisphere", 0.5 * kPi, EdgeKind::boundary);
  SmoothStratum rim = rim_stratum(
      radius, "rim", +[](double) { return vec3(0.0, 0.0, 1.0); }, true);
  return SmoothShape("hemisphere", 3, {top, rim}, Vec::Zero(3), radius);
}

SmoothShape circle(double radius) {
  if (radius <= 0) throw std::invalid_argument("circle: radius must be positive");
  SmoothShape s("circle", 3, {rim_stratum(radius, "circle", nullptr, false)}, Vec::Zero(3), radius);
  s.slice_euler = [radius](const AffineFlat& e) -> std::optional<int> {
    if (e.dim() < 2) return 0;
    const auto d = plane_section_distance(e);
    if (!d) return 0;
    return *d < radius ? 2 : 0;
  };
  return s;
}

SmoothShape ellipse(double a, double b) {
  if (a <= 0 || b <= 0) throw std::invalid_argument("ellipse: semi-axes must be positive");
  SmoothStratum e;
  e.name = "ellipse";
  e.dim = 1;
  e.axes = {periodic_axis(0.0, 2.0 * kPi)};
  e.jet = [a, b](const Vec& u) {
    const double c = std::cos(u[0]), s = std::sin(u[0]);
    Mat j(2, 1);
    j << -a * s, b * c;
    Vec p(2), r(2);
    p << a * c, b * s;
    r << -a * c, -b * s;
    return make_jet(std::move(p), std::move(j), {r});
  };
  e.implicit = [a, b](const Vec& x) {
    return (Vec(1) << x[0] * x[0] / (a * a) + x[1] * x[1] / (b * b) - 1.0).finished();
  };
  e.implicit_jacobian = [a, b](const Vec& x) {
    return (Mat(1, 2) << 2.0 * x[0] / (a * a), 2.0 * x[1] / (b * b)).finished();
  };
  SmoothShape s("ellipse", 2, {e}, Vec::Zero(2), std::max(a, b));
  s.slice_euler = [a, b](const AffineFlat& f) -> std::optional<int> {
    if (f.dim() != 1) return 0;
    Vec dir = f.direction.basis().col(0);
    Vec o = f.offset;
    dir[0] /= a, dir[1] /= b;
    o[0] /= a, o[1] /= b;
    const Vec foot = o - dir * (dir.dot(o) / dir.squaredNorm());
    return foot.norm() < 1.0 ? 2 : 0;
  };
  return s;
}

SmoothShape ball(double radius) {
  if (radius <= 0) throw std::invalid_argument("ball: radius must be positive");
  SmoothStratum body;
  body.name = "interior";
  body.dim = 3;
  body.axes = {{0.0, radius, EdgeKind::collapsed, EdgeKind::boundary},
               {0.0, kPi, EdgeKind::collapsed, EdgeKind::collapsed},
               periodic_axis(0.0, 2.0 * kPi)};
  body.jet = [](const Vec& u) {
    const ChartJet unit = sphere_jet(1.0, u[1], u[2]);
    const double rho = u[0];
    Mat j(3, 3);
    j.col(0) = unit.point;
    j.col(1) = rho * unit.jacobian.col(0);
    j.col(2) = rho * unit.jacobian.col(1);
    std::vector<Vec> sec(9);
    sec[0] = Vec::Zero(3);
    sec[1] = sec[3] = unit.jacobian.col(0);
    sec[2] = sec[6] = unit.jacobian.col(1);
    sec[4] = rho * unit.d2(0, 0);
    sec[5] = sec[7] = rho * unit.d2(0, 1);
    sec[8] = rho * unit.d2(1, 1);
    return make_jet(rho * unit.point, std::move(j), std::move(sec));
  };
  SmoothStratum shell = sphere_stratum(radius, "boundary", kPi, EdgeKind::collapsed);
  shell.inward_conormal = [](const Vec& u) -> Vec { return -sphere_jet(1.0, u[0], u[1]).point; };
  SmoothShape s("ball", 3, {body, shell}, Vec::Zero(3), radius);
  s.slice_euler = [radius](const AffineFlat& e) -> std::optional<int> { return e.offset.norm() < radius ? 1 : 0; };
  return s;
}

}  // namespace smoothcatalog

}  // namespace lkpolar
