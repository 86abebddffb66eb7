#include "lkpolar/contour.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <unordered_map>

namespace lkpolar {

namespace {

bool inside_open_domain(const SmoothStratum& s, Vec& u) {
  for (std::size_t a = 0; a < s.axes.size(); ++a) {
    const ChartAxis& ax = s.axes[a];
    double& x = u[static_cast<Eigen::Index>(a)];
    if (ax.periodic()) {
      x = ax.lo + std::fmod(std::fmod(x - ax.lo, ax.span()) + ax.span(), ax.span());
    } else if (!(x > ax.lo && x < ax.hi)) {
      return false;
    }
  }
  return true;
}

std::vector<Vec> start_grid(const SmoothStratum& s, int per_axis) {
  std::vector<Vec> out;
  const int d = s.dim;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(per_axis);
  for (std::size_t t = 0; t < total; ++t) {
    Vec u(d);
    std::size_t r = t;
    for (int a = 0; a < d; ++a) {
      const auto i = static_cast<double>(r % static_cast<std::size_t>(per_axis));
      r /= static_cast<std::size_t>(per_axis);
      u[a] = s.axes[a].lo + (i + 0.5) * s.axes[a].span() / per_axis;
    }
    out.push_back(std::move(u));
  }
  return out;
}

// grid nodes that are discrete extrema or saddles of the height; Newton starts
std::vector<Vec> seed_points(const SmoothStratum& s, const Vec& v, int per_axis) {
  std::vector<Vec> grid = start_grid(s, per_axis);
  if (s.dim > 2) return grid;
  std::vector<double> h(grid.size());
  for (std::size_t t = 0; t < grid.size(); ++t) h[t] = s.jet(grid[t]).point.dot(v);
  const int m = per_axis;
  bool open_edge = false;
  auto off_edge = [&](const ChartAxis& ax, int k) {
    if (k < 0) open_edge = open_edge || ax.lo_edge == EdgeKind::boundary;
    if (k >= m) open_edge = open_edge || ax.hi_edge == EdgeKind::boundary;
    return k < 0 || k >= m;
  };
  auto at = [&](int i, int j, double& out) {
    if (s.axes[0].periodic())
      i = (i + m) % m;
    else if (off_edge(s.axes[0], i))
      return false;
    if (s.dim == 2) {
      if (s.axes[1].periodic())
        j = (j + m) % m;
      else if (off_edge(s.axes[1], j))
        return false;
    }
    out = h[static_cast<std::size_t>(i + m * j)];
    return true;
  };
  std::vector<Vec> out;
  if (s.dim == 1) {
    for (int i = 0; i < m; ++i) {
      double a, b;
      const double c = h[static_cast<std::size_t>(i)];
      open_edge = false;
      const bool ha = at(i - 1, 0, a), hb = at(i + 1, 0, b);
      if (open_edge || (ha && hb && (a > c) == (b > c)) || (ha != hb)) out.push_back(grid[static_cast<std::size_t>(i)]);
    }
    return out;
  }
  static const int ring[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const double c = h[static_cast<std::size_t>(i + m * j)];
      int changes = 0, present = 0, above = 0;
      int first = -1, prev = -1;
      open_edge = false;
      for (const auto& d : ring) {
        double x;
        if (!at(i + d[0], j + d[1], x)) continue;
        const int sgn = x > c ? 1 : 0;
        ++present;
        above += sgn;
        if (prev >= 0 && sgn != prev) ++changes;
        if (first < 0) first = sgn;
        prev = sgn;
      }
      if (present > 0 && prev != first) ++changes;
      const bool extremum = above == 0 || above == present;
      if (extremum || changes >= 4 || (open_edge && changes >= 2)) out.push_back(grid[static_cast<std::size_t>(i + m * j)]);
    }
  return out;
}

// tangent projection of v at the image of each collapsed chart edge
double collapsed_tangent_clearance(const SmoothStratum& s, const Vec& v) {
  double best = 1.0;
  if (!s.implicit_jacobian) return best;
  for (std::size_t a = 0; a < s.axes.size(); ++a) {
    const ChartAxis& ax = s.axes[a];
    for (int side = 0; side < 2; ++side) {
      const EdgeKind k = side ? ax.hi_edge : ax.lo_edge;
      if (k != EdgeKind::collapsed) continue;
      Vec u = s.center();
      u[static_cast<Eigen::Index>(a)] = side ? ax.hi : ax.lo;
      const Vec x = s.jet(u).point;
      const LinearSubspace nrm = LinearSubspace::span_of(s.implicit_jacobian(x).transpose());
      const Vec vt = v - nrm.project(v);
      best = std::min(best, vt.norm() / v.norm());
    }
  }
  return best;
}

double g_at(const SmoothStratum& s, const Vec& w, const Vec& u) { return surface_normal(s.jet(u)).dot(w); }

Vec g_grad(const SmoothStratum& s, const Vec& w, const Vec& u) {
  Vec g(2);
  for (int a = 0; a < 2; ++a) {
    const double h = 1e-6 * s.axes[static_cast<std::size_t>(a)].span();
    Vec up = u, um = u;
    up[a] += h;
    um[a] -= h;
    g[a] = (g_at(s, w, up) - g_at(s, w, um)) / (2.0 * h);
  }
  return g;
}

Mat g_hessian(const SmoothStratum& s, const Vec& w, const Vec& u) {
  Mat h(2, 2);
  for (int a = 0; a < 2; ++a) {
    const double e = 1e-4 * s.axes[static_cast<std::size_t>(a)].span();
    Vec up = u, um = u;
    up[a] += e;
    um[a] -= e;
    h.col(a) = (g_grad(s, w, up) - g_grad(s, w, um)) / (2.0 * e);
  }
  return 0.5 * (h + h.transpose());
}

}  // namespace

Vec surface_normal(const ChartJet& jet) {
  const Vec a = jet.jacobian.col(0), b = jet.jacobian.col(1);
  Vec c(3);
  c << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0];
  const double r = c.norm();
  if (r == 0.0) throw DegenerateChart("surface_normal: singular chart point");
  return c / r;
}

CriticalSearch height_critical_points(const SmoothStratum& s, const Vec& v, const CriticalSearchOptions& opts) {
  CriticalSearch out;
  const int n = static_cast<int>(v.size());
  if (s.dim == n) return out;
  const double diam = opts.diameter;
  if (s.dim == 0) {
    const ChartJet jet = s.jet(Vec(0));
    out.points.push_back({Vec(0), jet.point, 0, 0.0});
    return out;
  }
  if (collapsed_tangent_clearance(s, v) < opts.collapsed_clearance) {
    out.degenerate = true;
    out.reason = "critical point near a collapsed chart point";
    return out;
  }
  const int per_axis = opts.starts_per_axis > 0 ? opts.starts_per_axis : (s.dim == 1 ? 128 : 32);
  std::vector<Vec> found;
  for (Vec u : seed_points(s, v, per_axis)) {
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      const ChartJet jet = s.jet(u);
      const Vec g = jet.jacobian.transpose() * v;
      const double scale = jet.jacobian.norm();
      if (g.norm() <= 1e-13 * scale) {
        ok = true;
        break;
      }
      Mat h(s.dim, s.dim);
      for (int i = 0; i < s.dim; ++i)
        for (int k = 0; k < s.dim; ++k) h(i, k) = jet.d2(i, k).dot(v);
      Vec step = h.completeOrthogonalDecomposition().solve(-g);
      double shrink = 1.0;
      for (int a = 0; a < s.dim; ++a)
        shrink = std::max(shrink, std::abs(step[a]) / (0.1 * s.axes[static_cast<std::size_t>(a)].span()));
      step /= shrink;
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 12; ++ls, t *= 0.5) {
        Vec trial = u + t * step;
        if (!inside_open_domain(s, trial)) continue;
        const Vec gt = s.jet(trial).jacobian.transpose() * v;
        if (gt.norm() < g.norm() * (1.0 - 1e-4 * t) || step.norm() * t < 1e-15) {
          u = trial;
          moved = true;
          break;
        }
      }
      if (!moved) break;
      if (t * step.norm() < 1e-15) {
        const Vec gt = s.jet(u).jacobian.transpose() * v;
        ok = gt.norm() <= 1e-9 * scale;
        break;
      }
    }
    if (!ok) continue;
    const Vec x = s.jet(u).point;
    bool dup = false;
    for (const Vec& f : found)
      if ((s.jet(f).point - x).norm() < 1e-6 * diam) dup = true;
    if (!dup) found.push_back(u);
  }
  for (const Vec& u : found) {
    const ChartJet jet = s.jet(u);
    const Eigen::JacobiSVD<Mat> svd(jet.jacobian);
    const Vec sv = svd.singularValues();
    if (sv[sv.size() - 1] < 1e-3 * sv[0]) continue;
    const Frames f = frames(jet);
    const Mat hess = second_form_matrix(jet, f, v);
    const Eigen::SelfAdjointEigenSolver<Mat> es(hess, Eigen::EigenvaluesOnly);
    CriticalPoint cp{u, jet.point, 0, std::numeric_limits<double>::infinity()};
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      const double e = es.eigenvalues()[i];
      if (e < 0) ++cp.morse_index;
      cp.min_abs_eigenvalue = std::min(cp.min_abs_eigenvalue, std::abs(e));
    }
    if (cp.min_abs_eigenvalue * diam < opts.hessian_tol) {
      out.degenerate = true;
      out.reason = "degenerate hessian at a critical point";
      return out;
    }
    out.points.push_back(std::move(cp));
  }
  out.clearance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.points.size(); ++i)
    for (std::size_t j = i + 1; j < out.points.size(); ++j) {
      if ((out.points[i].x - out.points[j].x).norm() < opts.cluster_tol * diam) {
        out.degenerate = true;
        out.reason = "clustered critical points";
        return out;
      }
      out.clearance =
          std::min(out.clearance, std::abs(v.dot(out.points[i].x - out.points[j].x)) / (v.norm() * diam));
    }
  return out;
}

SilhouetteCache SilhouetteCache::build(const SmoothStratum& s, int nodes) {
  if (s.dim != 2 || s.jet(s.center()).point.size() != 3)
    throw std::invalid_argument("SilhouetteCache: needs a surface stratum in R^3");
  SilhouetteCache c;
  c.stratum = &s;
  c.axis_nodes.resize(2);
  for (int a = 0; a < 2; ++a) {
    const ChartAxis& ax = s.axes[static_cast<std::size_t>(a)];
    auto& nodes_a = c.axis_nodes[static_cast<std::size_t>(a)];
    if (ax.periodic()) {
      c.wrap[a] = true;
      for (int i = 0; i < nodes; ++i) nodes_a.push_back(ax.lo + ax.span() * i / nodes);
    } else {
      const double off = 1e-7 * ax.span();
      for (int i = 0; i <= nodes; ++i) nodes_a.push_back(ax.lo + ax.span() * i / nodes);
      if (ax.lo_edge == EdgeKind::collapsed) nodes_a.front() += off;
      if (ax.hi_edge == EdgeKind::collapsed) nodes_a.back() -= off;
    }
  }
  const std::size_t n0 = c.axis_nodes[0].size(), n1 = c.axis_nodes[1].size();
  c.normals.resize(n0 * n1);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) {
      Vec u(2);
      u << c.axis_nodes[0][i], c.axis_nodes[1][j];
      c.normals[i * n1 + j] = surface_normal(s.jet(u));
    }
  return c;
}

namespace {

struct Crossing {
  Vec u;
  std::vector<std::size_t> links;
};

Vec illinois(const SmoothStratum& s, const Vec& w, const Vec& a, const Vec& b, double fa, double fb) {
  double ta = 0.0, tb = 1.0;
  int side = 0;
  for (int it = 0; it < 80 && tb - ta > 1e-14; ++it) {
    const double t = (ta * fb - tb * fa) / (fb - fa);
    const double ft = g_at(s, w, a + t * (b - a));
    if (ft == 0.0) return a + t * (b - a);
    if ((ft > 0) == (fb > 0)) {
      tb = t;
      fb = ft;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      ta = t;
      fa = ft;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  return a + 0.5 * (ta + tb) * (b - a);
}

void unwrap_against(const SmoothStratum& s, const Vec& prev, Vec& u) {
  for (std::size_t a = 0; a < s.axes.size(); ++a) {
    if (!s.axes[a].periodic()) continue;
    const double span = s.axes[a].span();
    const auto ia = static_cast<Eigen::Index>(a);
    u[ia] -= span * std::round((u[ia] - prev[ia]) / span);
  }
}

}  // namespace

SilhouetteTrace trace_silhouette(const SilhouetteCache& cache, const Vec& w) {
  const SmoothStratum& s = *cache.stratum;
  SilhouetteTrace out;
  const auto& nd0 = cache.axis_nodes[0];
  const auto& nd1 = cache.axis_nodes[1];
  const std::size_t n0 = nd0.size(), n1 = nd1.size();
  const std::size_t c0 = cache.wrap[0] ? n0 : n0 - 1;
  const std::size_t c1 = cache.wrap[1] ? n1 : n1 - 1;
  std::vector<double> g(n0 * n1);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = cache.normals[k].dot(w);
  auto gv = [&](std::size_t i, std::size_t j) { return g[(i % n0) * n1 + (j % n1)]; };
  auto node_u = [&](std::size_t i, std::size_t j) {
    Vec u(2);
    u << (i < n0 ? nd0[i] : nd0[i - n0] + s.axes[0].span()), (j < n1 ? nd1[j] : nd1[j - n1] + s.axes[1].span());
    return u;
  };

  std::vector<Crossing> pts;
  std::unordered_map<std::size_t, std::size_t> edge_point;
  // axis-0 edge (i,j)-(i+1,j) and axis-1 edge (i,j)-(i,j+1)
  auto edge_key = [&](int axis, std::size_t i, std::size_t j) {
    return (static_cast<std::size_t>(axis) * n0 + (i % n0)) * n1 + (j % n1);
  };
  auto crossing_on = [&](int axis, std::size_t i, std::size_t j) -> std::size_t {
    const std::size_t key = edge_key(axis, i, j);
    auto it = edge_point.find(key);
    if (it != edge_point.end()) return it->second;
    const std::size_t i2 = axis == 0 ? i + 1 : i, j2 = axis == 1 ? j + 1 : j;
    const Vec a = node_u(i, j), b = node_u(i2, j2);
    const Vec u = illinois(s, w, a, b, gv(i, j), gv(i2, j2));
    pts.push_back({u, {}});
    edge_point.emplace(key, pts.size() - 1);
    return pts.size() - 1;
  };
  auto link = [&](std::size_t p, std::size_t q) {
    pts[p].links.push_back(q);
    pts[q].links.push_back(p);
  };

  std::vector<double> grad_mag;
  std::vector<std::pair<Vec, bool>> candidates;  // cell centre, saddle cell
  for (std::size_t i = 0; i < c0; ++i)
    for (std::size_t j = 0; j < c1; ++j) {
      const double v00 = gv(i, j), v10 = gv(i + 1, j), v11 = gv(i + 1, j + 1), v01 = gv(i, j + 1);
      const bool s00 = v00 >= 0, s10 = v10 >= 0, s11 = v11 >= 0, s01 = v01 >= 0;
      std::vector<std::size_t> e;  // bottom, right, top, left in cyclic order
      int mask = 0;
      if (s00 != s10) mask |= 1;
      if (s10 != s11) mask |= 2;
      if (s01 != s11) mask |= 4;
      if (s00 != s01) mask |= 8;
      if (!mask) continue;
      const Vec lo = node_u(i, j), hi = node_u(i + 1, j + 1);
      const double h0 = hi[0] - lo[0], h1 = hi[1] - lo[1];
      const double gx = 0.5 * ((v10 - v00) + (v11 - v01)) / h0 * s.axes[0].span();
      const double gy = 0.5 * ((v01 - v00) + (v11 - v10)) / h1 * s.axes[1].span();
      const double mag = std::hypot(gx, gy);
      grad_mag.push_back(mag);
      const std::size_t eb = (mask & 1) ? crossing_on(0, i, j) : 0;
      const std::size_t er = (mask & 2) ? crossing_on(1, i + 1, j) : 0;
      const std::size_t et = (mask & 4) ? crossing_on(0, i, j + 1) : 0;
      const std::size_t el = (mask & 8) ? crossing_on(1, i, j) : 0;
      const Vec centre = 0.5 * (lo + hi);
      if (mask == 15) {
        candidates.emplace_back(centre, true);
        const bool sc = g_at(s, w, centre) >= 0;
        if (sc == s00) {
          link(eb, er);
          link(et, el);
        } else {
          link(eb, el);
          link(er, et);
        }
        continue;
      }
      candidates.emplace_back(centre, false);
      std::vector<std::size_t> ends;
      if (mask & 1) ends.push_back(eb);
      if (mask & 2) ends.push_back(er);
      if (mask & 4) ends.push_back(et);
      if (mask & 8) ends.push_back(el);
      if (ends.size() == 2) link(ends[0], ends[1]);
    }

  // singular points of the zero set: saddles of g with g close to 0
  if (!grad_mag.empty()) {
    std::vector<double> sorted = grad_mag;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double median = sorted[sorted.size() / 2];
    std::size_t gi = 0;
    for (const auto& [centre, saddle] : candidates) {
      const double mag = grad_mag[gi++];
      if (!saddle && mag >= 0.1 * median) continue;
      Vec u = centre;
      bool conv = false;
      for (int it = 0; it < 30; ++it) {
        const Vec gr = g_grad(s, w, u);
        const Mat hs = g_hessian(s, w, u);
        const Vec step = hs.completeOrthogonalDecomposition().solve(-gr);
        u += step;
        if ((u - centre).cwiseAbs().maxCoeff() > 4.0 * std::max(s.axes[0].span(), s.axes[1].span()) / 256.0) break;
        if (step.norm() < 1e-12) {
          conv = true;
          break;
        }
      }
      if (!conv) continue;
      const Eigen::SelfAdjointEigenSolver<Mat> es(g_hessian(s, w, u), Eigen::EigenvaluesOnly);
      const double big = es.eigenvalues().cwiseAbs().maxCoeff();
      if (big == 0.0) continue;
      const double gap = std::sqrt(std::abs(g_at(s, w, u)) / big);
      out.gradient_clearance = std::min(out.gradient_clearance, gap);
    }
    if (out.gradient_clearance < 1e-3) {
      out.degenerate = true;
      out.reason = "singular polar curve";
    }
  }

  std::vector<char> used(pts.size(), 0);
  auto walk = [&](std::size_t start) {
    Polyline line;
    std::size_t prev = static_cast<std::size_t>(-1), cur = start;
    for (;;) {
      used[cur] = 1;
      Vec u = pts[cur].u;
      if (!line.u.empty()) unwrap_against(s, line.u.back(), u);
      line.u.push_back(u);
      std::size_t next = static_cast<std::size_t>(-1);
      for (std::size_t q : pts[cur].links)
        if (q != prev && !used[q]) {
          next = q;
          break;
        }
      if (next == static_cast<std::size_t>(-1)) {
        for (std::size_t q : pts[cur].links)
          if (q == start && q != prev && line.u.size() > 2) line.closed = true;
        break;
      }
      prev = cur;
      cur = next;
    }
    return line;
  };
  for (std::size_t p = 0; p < pts.size(); ++p)
    if (!used[p] && pts[p].links.size() == 1) out.curves.push_back(walk(p));
  for (std::size_t p = 0; p < pts.size(); ++p)
    if (!used[p] && !pts[p].links.empty()) out.curves.push_back(walk(p));
  for (Polyline& line : out.curves)
    for (const Vec& u : line.u) line.x.push_back(s.jet(u).point);
  return out;
}

Vec project_to_silhouette(const SmoothStratum& s, const Vec& w, const Vec& u0) {
  Vec u = u0;
  for (int it = 0; it < 30; ++it) {
    const double g = g_at(s, w, u);
    const Vec gr = g_grad(s, w, u);
    const double n2 = gr.squaredNorm();
    if (n2 == 0.0) break;
    const Vec step = -g * gr / n2;
    u += step;
    if (step.norm() < 1e-14 * (1.0 + u.norm())) break;
  }
  return u;
}

void refine_polyline(const SmoothStratum& s, const Vec& w, Polyline& line, double tol) {
  if (line.u.size() < 2) return;
  std::vector<Vec> u_out{line.u.front()}, x_out{line.x.front()};
  const std::size_t segs = line.closed ? line.u.size() : line.u.size() - 1;
  std::function<void(const Vec&, const Vec&, const Vec&, const Vec&, int)> split =
      [&](const Vec& ua, const Vec& xa, const Vec& ub, const Vec& xb, int depth) {
        const Vec um = project_to_silhouette(s, w, 0.5 * (ua + ub));
        const Vec xm = s.jet(um).point;
        const Vec chord = xb - xa;
        const double len2 = chord.squaredNorm();
        const double t = len2 > 0 ? std::clamp((xm - xa).dot(chord) / len2, 0.0, 1.0) : 0.0;
        const double sag = (xm - (xa + t * chord)).norm();
        if (sag > tol && depth < 20) {
          split(ua, xa, um, xm, depth + 1);
          split(um, xm, ub, xb, depth + 1);
        } else {
          u_out.push_back(ub);
          x_out.push_back(xb);
        }
      };
  for (std::size_t k = 0; k < segs; ++k) {
    const std::size_t k2 = (k + 1) % line.u.size();
    Vec ub = line.u[k2];
    unwrap_against(s, u_out.back(), ub);
    split(u_out.back(), x_out.back(), ub, line.x[k2], 0);
  }
  if (line.closed) {
    u_out.pop_back();
    x_out.pop_back();
  }
  line.u = std::move(u_out);
  line.x = std::move(x_out);
}

}  // namespace lkpolar
