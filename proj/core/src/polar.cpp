#include "lkpolar/polar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace lkpolar {

namespace {

constexpr double kPi = std::numbers::pi;

// unit vector of P orthogonal to the projection of the columns of `tangent`
Vec image_normal(const LinearSubspace& plane, const Mat& tangent) {
  const int k = plane.dim();
  Mat pt = plane.basis().transpose() * tangent;
  if (pt.cols() == 0) return plane.basis().col(0);
  const Eigen::JacobiSVD<Mat> svd(pt, Eigen::ComputeFullU);
  const Vec sv = svd.singularValues();
  if (sv[sv.size() - 1] < 1e-10 * std::max(1.0, sv[0]))
    throw DegenerateDirection("image_normal: projection drops rank");
  return plane.basis() * svd.matrixU().col(k - 1);
}

// Q = P^perp + nu; basis columns [P^perp, nu]
Mat slice_basis(const LinearSubspace& plane, const Vec& nu) {
  const Mat perp = plane.complement().basis();
  Mat q(nu.size(), perp.cols() + 1);
  q << perp, nu;
  return q;
}

// coordinates in Q of the projection of c onto Q along T
Vec slice_coordinates(const Mat& tangent, const Mat& q, const Vec& c) {
  Mat a(c.size(), tangent.cols() + q.cols());
  a << tangent, q;
  const Vec sol = a.colPivHouseholderQr().solve(c);
  return sol.tail(q.cols());
}

double projected_jacobian(const Mat& jac, const LinearSubspace& plane) {
  const Mat pj = plane.basis().transpose() * jac;
  const double num = (pj.transpose() * pj).determinant();
  const double den = (jac.transpose() * jac).determinant();
  if (den <= 0.0) return 0.0;
  return std::sqrt(std::max(0.0, num) / den);
}

double half_alpha_from_side(double side, const char* where) {
  if (std::abs(side) < 1e-8) throw DegenerateDirection(std::string(where) + ": slice direction on the conormal wall");
  return 0.5;
}

bool near_boundary_edge(const SmoothStratum& s, const Vec& u, double rel) {
  for (std::size_t a = 0; a < s.axes.size(); ++a) {
    const ChartAxis& ax = s.axes[a];
    const double x = u[static_cast<Eigen::Index>(a)];
    if (ax.lo_edge == EdgeKind::boundary && x - ax.lo < rel * ax.span()) return true;
    if (ax.hi_edge == EdgeKind::boundary && ax.hi - x < rel * ax.span()) return true;
  }
  return false;
}

// tangent of the chart along the axes that do not end on a boundary edge at u
std::optional<Vec> boundary_edge_tangent(const SmoothStratum& s, const Vec& u) {
  const ChartJet jet = s.jet(u);
  for (std::size_t a = 0; a < s.axes.size(); ++a) {
    const ChartAxis& ax = s.axes[a];
    const double x = u[static_cast<Eigen::Index>(a)];
    const bool at = (ax.lo_edge == EdgeKind::boundary && x - ax.lo < 1e-6 * ax.span()) ||
                    (ax.hi_edge == EdgeKind::boundary && ax.hi - x < 1e-6 * ax.span());
    if (!at) continue;
    for (std::size_t b = 0; b < s.axes.size(); ++b)
      if (b != a) return jet.jacobian.col(static_cast<Eigen::Index>(b)).normalized();
  }
  return std::nullopt;
}

Vec polyline_tangent(const Polyline& line, std::size_t i) {
  const std::size_t m = line.x.size();
  std::size_t a = i == 0 ? (line.closed ? m - 1 : 0) : i - 1;
  std::size_t b = i + 1 == m ? (line.closed ? 0 : i) : i + 1;
  const Vec t = line.x[b] - line.x[a];
  const double len = t.norm();
  if (len == 0.0) throw DegenerateDirection("polyline_tangent: repeated points");
  return t / len;
}

Vec cross3(const Vec& a, const Vec& b) {
  Vec c(3);
  c << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0];
  return c;
}

// |<t, N x w>| at vertex i; small near cusps of the projected fold
double fold_strength(const SmoothStratum& s, const Polyline& line, const Vec& w, std::size_t i) {
  const Vec side = cross3(surface_normal(s.jet(line.u[i])), w);
  const double len = side.norm();
  return len > 0 ? std::abs(polyline_tangent(line, i).dot(side)) / len : 0.0;
}

int count_roots(const SmoothStratum& s, const Vec& base, const Vec& dir, double eps) {
  constexpr int kSteps = 4000;
  int roots = 0;
  double prev = s.implicit(base - eps * dir)[0];
  for (int i = 1; i <= kSteps; ++i) {
    const double t = -eps + 2.0 * eps * i / kSteps;
    const double f = s.implicit(base + t * dir)[0];
    if ((f > 0) != (prev > 0)) ++roots;
    prev = f;
  }
  return roots;
}

// fold alpha from the Euler characteristic of the slice near x
double fold_alpha_slice(const SmoothStratum& s, const Vec& x, const Vec& w, const Vec& nu, double diam) {
  const double delta = 1e-3 * diam, eps = 1e-1 * diam;
  const int lo = count_roots(s, x - delta * nu, w, eps);
  const int hi = count_roots(s, x + delta * nu, w, eps);
  return 0.5 * ((1 - lo) + (1 - hi));
}

double fold_alpha_closed(const SmoothStratum& s, const Vec& u, const Vec& w, double diam) {
  if (!s.is_boundary()) return 0.0;
  const ChartJet jet = s.jet(u);
  const Frames f = frames(jet);
  const Vec c = s.inward_conormal(u);
  const Mat ii = second_form_matrix(jet, f, c);
  const Vec wt = f.tangent.transpose() * w;
  const double bend = wt.dot(ii * wt);
  if (std::abs(bend) * diam < 1e-8) throw DegenerateDirection("fold_alpha: flat slice curve");
  return bend > 0 ? 0.5 : -0.5;
}

Vec unit_perp(const LinearSubspace& plane) {
  const Mat perp = plane.complement().basis();
  if (perp.cols() != 1) throw std::logic_error("unit_perp: expected a line");
  return perp.col(0);
}

double polyline_image_length(const SmoothStratum& s, const Vec& w, const Polyline& line, const LinearSubspace& plane,
                             const Region& u, bool richardson) {
  CompensatedSum total;
  const std::size_t m = line.x.size();
  const std::size_t segs = line.closed ? m : m - 1;
  for (std::size_t k = 0; k < segs; ++k) {
    const std::size_t k2 = (k + 1) % m;
    const Vec& xa = line.x[k];
    const Vec& xb = line.x[k2];
    const Vec pa = plane.coordinates(xa), pb = plane.coordinates(xb);
    double len = (pb - pa).norm();
    if (richardson) {
      Vec ub = line.u[k2];
      for (std::size_t a = 0; a < s.axes.size(); ++a) {
        if (!s.axes[a].periodic()) continue;
        const auto ia = static_cast<Eigen::Index>(a);
        ub[ia] -= s.axes[a].span() * std::round((ub[ia] - line.u[k][ia]) / s.axes[a].span());
      }
      const Vec um = project_to_silhouette(s, w, 0.5 * (line.u[k] + ub));
      const Vec pm = plane.coordinates(s.jet(um).point);
      len = (4.0 * ((pm - pa).norm() + (pb - pm).norm()) - len) / 3.0;
    }
    double frac = 1.0;
    if (!u.everything()) {
      const double ca = u.clearance(xa), cb = u.clearance(xb);
      if (ca <= 0 && cb <= 0)
        frac = 0.0;
      else if (ca < 0 || cb < 0)
        frac = std::max(ca, cb) / (std::abs(ca) + std::abs(cb));
    }
    total.add(frac * len);
  }
  return total.value();
}

std::string first_kind(const DegeneracyReport& r) { return r.flags.empty() ? std::string() : r.flags.front().kind; }

}  // namespace

void DegeneracyReport::add(std::string kind, std::string detail, double value) {
  flags.push_back({std::move(kind), std::move(detail), value});
}

void DegeneracyReport::merge(const DegeneracyReport& other) {
  flags.insert(flags.end(), other.flags.begin(), other.flags.end());
}

std::string DegeneracyReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (i) os << "; ";
    os << flags[i].kind << ": " << flags[i].detail << " (" << flags[i].value << ")";
  }
  return os.str();
}

PolarContext::PolarContext(Shape x, PolarOptions opts) : shape_(std::move(x)), opts_(opts) {
  silhouettes_.resize(stratum_count());
  if (shape_.is_pl() || shape_.ambient_dim() != 3) return;
  const auto& strata = shape_.smooth().strata();
  for (std::size_t i = 0; i < strata.size(); ++i)
    if (strata[i].dim == 2) silhouettes_[i] = SilhouetteCache::build(strata[i], opts_.silhouette_nodes);
}

std::size_t PolarContext::stratum_count() const {
  return shape_.is_pl() ? shape_.complex().cell_count() : shape_.smooth().strata().size();
}

int PolarContext::stratum_dim(std::size_t s) const {
  return shape_.is_pl() ? shape_.complex().cell_dim(s) : shape_.smooth().strata().at(s).dim;
}

const SilhouetteCache* PolarContext::silhouette(std::size_t s) const {
  const auto& c = silhouettes_.at(s);
  if (!c) return nullptr;
  return &*c;
}

double PolarSample::total() const {
  CompensatedSum s;
  for (double v : m) s.add(v);
  return s.value();
}

double polar_constant(int n, int q) {
  if (q < 0 || q > n) throw std::domain_error("polar_constant: need 0 <= q <= n");
  if (q == n) return 1.0;
  return beta_coeff(n - q, 1) / beta_coeff(n, q + 1);
}

std::vector<PolarPiece> polar_variety(const PolarContext& ctx, std::size_t stratum, const LinearSubspace& plane,
                                      DegeneracyReport& report) {
  const Shape& x = ctx.shape();
  const int n = x.ambient_dim();
  const int q = plane.dim() - 1;
  const int d = ctx.stratum_dim(stratum);
  const double diam = x.diameter();
  std::vector<PolarPiece> out;
  if (d < q || (d == n && q < n)) return out;

  if (x.is_pl()) {
    if (d != q) return out;
    const StratifiedComplex& k = x.complex();
    PolarPiece p;
    p.stratum = stratum;
    p.kind = PieceKind::simplex;
    const Mat pts = k.cell_points(stratum);
    p.geometry = plane.basis().transpose() * pts;
    for (int j = 0; j < pts.cols(); ++j) p.sources.push_back(pts.col(j));
    out.push_back(std::move(p));
    return out;
  }

  const SmoothStratum& s = x.smooth().strata().at(stratum);
  if (d == q) {
    PolarPiece p;
    p.stratum = stratum;
    p.kind = PieceKind::sheet;
    p.chart.push_back(s.center());
    p.sources.push_back(s.jet(s.center()).point);
    p.geometry = plane.coordinates(p.sources.back());
    out.push_back(std::move(p));
    return out;
  }

  if (q == 0) {
    const Vec v = plane.basis().col(0);
    CriticalSearchOptions copts;
    copts.diameter = diam;
    const CriticalSearch cs = height_critical_points(s, v, copts);
    if (cs.degenerate) {
      report.add("critical search", s.name + ": " + cs.reason, cs.clearance);
      return {};
    }
    for (const CriticalPoint& cp : cs.points) {
      if (near_boundary_edge(s, cp.u, ctx.options().clearance))
        report.add("adjacency", s.name + ": critical point close to the frontier", 0.0);
      const double rc = x.region().clearance(cp.x);
      if (std::abs(rc) < ctx.options().clearance * diam)
        report.add("adjacency", s.name + ": critical point close to the region boundary", std::abs(rc) / diam);
      PolarPiece p;
      p.stratum = stratum;
      p.kind = PieceKind::point;
      p.chart.push_back(cp.u);
      p.sources.push_back(cp.x);
      p.geometry = plane.coordinates(cp.x);
      p.morse_index = cp.morse_index;
      out.push_back(std::move(p));
    }
    return out;
  }

  if (n == 3 && d == 2 && q == 1) {
    const SilhouetteCache* cache = ctx.silhouette(stratum);
    const Vec w = unit_perp(plane);
    SilhouetteTrace tr = trace_silhouette(*cache, w);
    if (tr.degenerate) {
      report.add("singular discriminant", s.name + ": " + tr.reason, tr.gradient_clearance);
      return {};
    }
    for (Polyline& line : tr.curves) {
      if (line.x.size() < 2) {
        report.add("fold", s.name + ": silhouette piece too short to trace", 0.0);
        return {};
      }
      if (s.is_boundary()) refine_polyline(s, w, line, ctx.options().polyline_tol * diam);
      PolarPiece p;
      p.stratum = stratum;
      p.kind = PieceKind::polyline;
      p.closed = line.closed;
      p.chart = std::move(line.u);
      p.sources = std::move(line.x);
      p.geometry.resize(2, static_cast<Eigen::Index>(p.sources.size()));
      for (std::size_t j = 0; j < p.sources.size(); ++j)
        p.geometry.col(static_cast<Eigen::Index>(j)) = plane.coordinates(p.sources[j]);
      out.push_back(std::move(p));
    }
    return out;
  }
  throw std::domain_error("polar_variety: stratum of dimension " + std::to_string(d) + " in R^" + std::to_string(n) +
                          " with q = " + std::to_string(q) + " is not supported");
}

DegeneracyReport check_genericity(const PolarContext& ctx, const LinearSubspace& plane,
                                  const std::vector<PolarPiece>& pieces) {
  DegeneracyReport r;
  const Shape& x = ctx.shape();
  const int n = x.ambient_dim();
  const int q = plane.dim() - 1;
  const double diam = x.diameter();
  const double tol = ctx.options().clearance;

  if (x.is_pl()) {
    if (q >= n) return r;
    const StratifiedComplex& k = x.complex();
    const LinearSubspace perp = plane.complement();
    for (std::size_t c = 0; c < k.cell_count(); ++c) {
      const int d = k.cell_dim(c);
      if (d == 0) continue;
      const int meet = intersection_dim(k.tangent_space(c), perp, ctx.options().pl_rank_tol);
      if (meet > std::max(0, d - q - 1)) {
        r.add("pl dimension", "cell " + std::to_string(c) + " meets the projection kernel", meet);
        return r;
      }
    }
    return r;
  }

  const auto& strata = x.smooth().strata();
  if (q == 0) {
    const Vec v = plane.basis().col(0);
    for (std::size_t i = 0; i < pieces.size(); ++i)
      for (std::size_t j = i + 1; j < pieces.size(); ++j) {
        if (pieces[i].stratum != pieces[j].stratum || pieces[i].kind != PieceKind::point) continue;
        const double gap = std::abs(v.dot(pieces[i].sources[0] - pieces[j].sources[0])) / diam;
        if (gap < tol) r.add("double point", strata[pieces[i].stratum].name + ": two critical values coincide", gap);
      }
    return r;
  }

  if (q == 1 && n == 3) {
    const Vec w = unit_perp(plane);
    for (const PolarPiece& p : pieces) {
      if (p.kind != PieceKind::polyline) continue;
      const SmoothStratum& s = strata[p.stratum];
      Polyline line{p.chart, p.sources, p.closed};
      const std::size_t m = line.x.size();
      std::vector<double> b(m);
      for (std::size_t i = 0; i < m; ++i) {
        const Vec nrm = surface_normal(s.jet(line.u[i]));
        const Vec side = cross3(nrm, w);
        const double len = side.norm();
        b[i] = len > 0 ? polyline_tangent(line, i).dot(side) / len : 0.0;
      }
      for (std::size_t i = 0; i < m; ++i) {
        if (std::abs(b[i]) >= tol) continue;
        const bool has_prev = i > 0 || line.closed, has_next = i + 1 < m || line.closed;
        const double bp = has_prev ? b[(i + m - 1) % m] : b[i];
        const double bn = has_next ? b[(i + 1) % m] : b[i];
        const bool crossing = (bp > 0) != (bn > 0) || (bp > 0) != (b[i] > 0);
        if (!crossing) r.add("fold", s.name + ": polar curve tangent to the projection kernel", std::abs(b[i]));
      }
      if (!line.closed) {
        for (std::size_t end : {std::size_t{0}, m - 1}) {
          const auto rim = boundary_edge_tangent(s, line.u[end]);
          if (!rim) continue;
          const Vec t = polyline_tangent(line, end);
          const double sine = (t - rim->dot(t) * *rim).norm();
          if (sine < tol) r.add("adjacency", s.name + ": polar curve tangent to the frontier", sine);
        }
      }
    }
  }
  return r;
}

double alpha_index(const PolarContext& ctx, const PolarPiece& piece, const LinearSubspace& plane) {
  const Shape& x = ctx.shape();
  const int n = x.ambient_dim();
  const int d = ctx.stratum_dim(piece.stratum);
  const double diam = x.diameter();
  if (d == n) return 1.0;

  if (x.is_pl()) {
    const StratifiedComplex& k = x.complex();
    const Mat tangent = k.tangent_space(piece.stratum).basis();
    const Vec nu = image_normal(plane, tangent);
    const Mat qb = slice_basis(plane, nu);
    NormalLink link = normal_link(k, piece.stratum);
    for (Vec& dir : link.directions) {
      const Vec img = qb * slice_coordinates(tangent, qb, dir);
      dir = img.normalized();
    }
    link.normal_space = LinearSubspace(n, qb);
    const int a = normal_morse_index(link, nu);
    const int b = normal_morse_index(link, -nu);
    return 0.5 * (a + b);
  }

  const SmoothStratum& s = x.smooth().strata().at(piece.stratum);
  if (piece.kind == PieceKind::sheet) {
    if (!s.is_boundary()) return 1.0;
    const Vec& u = piece.chart.at(0);
    const Frames f = frames(s, u);
    const Vec nu = image_normal(plane, f.tangent);
    const Mat qb = slice_basis(plane, nu);
    const Vec cq = slice_coordinates(f.tangent, qb, s.inward_conormal(u));
    return half_alpha_from_side(cq[cq.size() - 1] / cq.norm(), "alpha_index");
  }
  if (piece.kind == PieceKind::point) {
    const Vec v = plane.basis().col(0);
    int up = 1, down = 1;
    if (s.is_boundary()) {
      const double c = v.dot(s.inward_conormal(piece.chart.at(0)));
      if (std::abs(c) < 1e-8) throw DegenerateDirection("alpha_index: direction on the conormal wall");
      up = c > 0 ? 1 : 0;
      down = 1 - up;
    }
    const int lam = piece.morse_index;
    const int sign_up = lam % 2 == 0 ? 1 : -1;
    const int sign_down = (d - lam) % 2 == 0 ? 1 : -1;
    return 0.5 * (sign_up * up + sign_down * down);
  }
  if (piece.kind == PieceKind::polyline) {
    const Vec w = unit_perp(plane);
    Polyline line{piece.chart, piece.sources, piece.closed};
    const std::size_t m = line.x.size();
    std::size_t i0 = m / 3, i1 = (2 * m) / 3;
    if (ctx.options().alpha_mode == AlphaMode::slice_chi && m >= 4) {
      std::vector<double> b(m);
      for (std::size_t i = 0; i < m; ++i) b[i] = fold_strength(s, line, w, i);
      i0 = static_cast<std::size_t>(std::max_element(b.begin(), b.end()) - b.begin());
      double best = -1.0;
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t gap = std::min((i + m - i0) % m, (i0 + m - i) % m);
        if (gap >= m / 4 && b[i] > best) {
          best = b[i];
          i1 = i;
        }
      }
    }
    auto at = [&](std::size_t i) {
      if (ctx.options().alpha_mode == AlphaMode::slice_chi && !s.is_boundary()) {
        const Vec nu = image_normal(plane, polyline_tangent(line, i));
        return fold_alpha_slice(s, line.x[i], w, nu, diam);
      }
      return fold_alpha_closed(s, line.u[i], w, diam);
    };
    const double a0 = at(i0);
    if (i1 != i0 && at(i1) != a0) throw DegenerateDirection("alpha_index: alpha differs along one fold arc");
    return a0;
  }
  throw std::logic_error("alpha_index: unexpected piece");
}

Estimate polar_image_integral(const PolarContext& ctx, std::size_t stratum, const LinearSubspace& plane,
                              const std::vector<PolarPiece>& pieces) {
  const Shape& x = ctx.shape();
  const Region& u = x.region();
  Estimate total = Estimate::exact(0.0);
  for (const PolarPiece& p : pieces) {
    if (p.stratum != stratum || p.alpha == 0.0) continue;
    switch (p.kind) {
      case PieceKind::point:
        if (u.contains(p.sources[0])) total.value += p.alpha;
        break;
      case PieceKind::simplex: {
        const StratifiedComplex& k = x.complex();
        const double vol = k.cell_volume(stratum);
        if (vol == 0.0) break;
        const double image = simplex_volume(p.geometry);
        total.value += p.alpha * cell_volume_in(k, stratum, u) * image / vol;
        break;
      }
      case PieceKind::sheet: {
        const SmoothStratum& s = x.smooth().strata().at(stratum);
        RegionPredicate pred;
        if (!u.everything()) pred = [&u](const Vec& y) { return u.contains(y); };
        const Estimate e = integrate_stratum(
            s, [&](const Vec&, const ChartJet& jet) { return projected_jacobian(jet.jacobian, plane); }, pred);
        total = total + p.alpha * e;
        break;
      }
      case PieceKind::polyline: {
        const SmoothStratum& s = x.smooth().strata().at(stratum);
        const Polyline line{p.chart, p.sources, p.closed};
        total.value += p.alpha * polyline_image_length(s, unit_perp(plane), line, plane, u, true);
        break;
      }
    }
  }
  return total;
}

PolarSample polar_sample(const PolarContext& ctx, const LinearSubspace& plane) {
  PolarSample out;
  out.plane = plane;
  const std::size_t ns = ctx.stratum_count();
  std::vector<PolarPiece> pieces;
  for (std::size_t s = 0; s < ns; ++s) {
    auto ps = polar_variety(ctx, s, plane, out.report);
    if (!out.report.empty()) return out;
    for (PolarPiece& p : ps) pieces.push_back(std::move(p));
  }
  out.report.merge(check_genericity(ctx, plane, pieces));
  if (!out.report.empty()) return out;
  for (PolarPiece& p : pieces) {
    try {
      p.alpha = alpha_index(ctx, p, plane);
    } catch (const DegenerateDirection& e) {
      out.report.add("index wall", e.what(), 0.0);
      return out;
    }
  }
  out.m.assign(ns, 0.0);
  double var = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    bool any = false;
    for (const PolarPiece& p : pieces) any = any || (p.stratum == s);
    if (!any) continue;
    const Estimate e = polar_image_integral(ctx, s, plane, pieces);
    out.m[s] = e.value;
    var += e.std_error * e.std_error;
  }
  out.m_std_error = std::sqrt(var);
  out.pieces = std::move(pieces);
  return out;
}

PolarLengthResult polar_length(const Shape& x, int q, const RandomSource& rng, const PolarLengthOptions& opts) {
  const int n = x.ambient_dim();
  if (q < 0 || q > n) throw std::domain_error("polar_length: need 0 <= q <= n");
  const PolarContext ctx(x, opts.polar);
  const double c = polar_constant(n, q);
  PolarLengthResult out;

  if (q == n) {
    CompensatedSum vol;
    double var = 0.0;
    const Region& u = x.region();
    if (x.is_pl()) {
      for (std::size_t c : x.complex().cells_of_dim(n)) vol.add(cell_volume_in(x.complex(), c, u));
    } else {
      RegionPredicate pred;
      if (!u.everything()) pred = [&u](const Vec& y) { return u.contains(y); };
      for (const SmoothStratum& s : x.smooth().strata()) {
        if (s.dim != n) continue;
        const Estimate e = integrate_stratum(s, [](const Vec&, const ChartJet&) { return 1.0; }, pred);
        vol.add(e.value);
        var += e.std_error * e.std_error;
      }
    }
    out.estimate = {vol.value(), std::sqrt(var), 1, rng.master_seed()};
    return out;
  }
  if (q == n - 1) {
    const PolarSample ps = polar_sample(ctx, LinearSubspace::full(n));
    if (ps.degenerate()) throw PolarQuotaExceeded("polar_length: " + ps.report.summary(), {{first_kind(ps.report), 1}});
    out.estimate = {c * ps.total(), c * ps.m_std_error, 1, rng.master_seed()};
    out.planes.push_back({0, LinearSubspace::full(n).basis(), ps.m, 0, {}});
    return out;
  }

  struct Row {
    PlaneRecord rec;
    double value = 0.0;
    bool ok = false;
  };
  const auto rows = parallel_map(static_cast<std::size_t>(opts.n_planes), opts.threads, [&](std::size_t i) {
    RandomSource r = rng.substream(i);
    Row row;
    row.rec.index = i;
    for (;;) {
      const LinearSubspace plane = sample_grassmannian(n, q + 1, r);
      const PolarSample ps = polar_sample(ctx, plane);
      if (!ps.degenerate()) {
        row.rec.plane = plane.basis();
        row.rec.m = ps.m;
        row.value = c * ps.total();
        row.ok = true;
        return row;
      }
      row.rec.rejected.push_back(first_kind(ps.report));
      if (++row.rec.retries > opts.plane_retries) return row;
    }
  });
  std::vector<double> vals;
  bool failed = false;
  for (const Row& row : rows) {
    out.resampled += row.rec.retries;
    for (const std::string& k : row.rec.rejected) ++out.rejections[k];
    if (row.ok)
      vals.push_back(row.value);
    else
      failed = true;
    out.planes.push_back(row.rec);
  }
  const auto quota = std::max<std::int64_t>(10, opts.n_planes / 20);
  if (failed || out.resampled > quota)
    throw PolarQuotaExceeded("polar_length: resample quota exceeded (" + std::to_string(out.resampled) + " resampled)",
                             out.rejections);
  out.estimate = estimate_from_samples(vals, rng.master_seed());
  return out;
}

Estimate crofton_volume(const std::vector<Mat>& simplices, int m, std::int64_t n_lines, const RandomSource& rng) {
  if (m != 2 && m != 3) throw std::domain_error("crofton_volume: only planes and 3-spaces are supported");
  if (simplices.empty()) return Estimate::exact(0.0, rng.master_seed());
  Vec centre = Vec::Zero(m);
  std::size_t count = 0;
  for (const Mat& s : simplices) {
    if (s.rows() != m || s.cols() != m) throw std::invalid_argument("crofton_volume: simplices must have m vertices in R^m");
    centre += s.rowwise().sum();
    count += static_cast<std::size_t>(s.cols());
  }
  centre /= static_cast<double>(count);
  double radius = 0.0;
  for (const Mat& s : simplices)
    for (int j = 0; j < s.cols(); ++j) radius = std::max(radius, (s.col(j) - centre).norm());
  radius = radius * (1.0 + 1e-12) + 1e-300;

  std::vector<double> vals(static_cast<std::size_t>(n_lines));
  for (std::int64_t i = 0; i < n_lines; ++i) {
    RandomSource r = rng.substream(static_cast<std::uint64_t>(i));
    int hits = 0;
    if (m == 2) {
      const double th = kPi * r.uniform();
      const Vec e = (Vec(2) << std::cos(th), std::sin(th)).finished();
      const double p = r.uniform(-radius, radius);
      for (const Mat& s : simplices) {
        const double a = e.dot(s.col(0) - centre) - p, b = e.dot(s.col(1) - centre) - p;
        if ((a > 0) != (b > 0)) ++hits;
      }
      vals[static_cast<std::size_t>(i)] = kPi * radius * hits;
    } else {
      const Vec dir = sample_unit_sphere(3, r);
      const LinearSubspace perp = LinearSubspace::span_of(dir).complement();
      double ox, oy;
      do {
        ox = r.uniform(-1.0, 1.0);
        oy = r.uniform(-1.0, 1.0);
      } while (ox * ox + oy * oy >= 1.0);
      const Vec base = centre + radius * (ox * perp.basis().col(0) + oy * perp.basis().col(1));
      for (const Mat& s : simplices) {
        Mat a(3, 3);
        a << s.col(1) - s.col(0), s.col(2) - s.col(0), -dir;
        const Eigen::FullPivLU<Mat> lu(a);
        if (!lu.isInvertible()) continue;
        const Vec sol = lu.solve(base - s.col(0));
        if (sol[0] >= 0 && sol[1] >= 0 && sol[0] + sol[1] <= 1) ++hits;
      }
      vals[static_cast<std::size_t>(i)] = 2.0 * kPi * radius * radius * hits;
    }
  }
  return estimate_from_samples(vals, rng.master_seed());
}

}  // namespace lkpolar
