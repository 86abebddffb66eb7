#include "lkpolar/lkmeasure.hpp"

#include "lkpolar/contour.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

namespace lkpolar {

namespace {

constexpr double kPi = std::numbers::pi;

// vol(S ∩ {h < t}) / vol(S) for a k-simplex with vertex heights h: the
// divided difference of (-1)^k (t - x)_+^k over the heights, with tied heights
// handled through derivatives
double clipped_fraction(std::vector<double> h, double t) {
  const int k = static_cast<int>(h.size()) - 1;
  std::sort(h.begin(), h.end());
  const double lo = h.front(), hi = h.back();
  if (hi <= t) return 1.0;
  if (lo >= t) return 0.0;
  if (k == 0) return h[0] < t ? 1.0 : 0.0;
  const double spread = hi - lo;
  for (double& x : h) x = (x - lo) / spread;
  t = (t - lo) / spread;
  for (int i = 1; i <= k; ++i)
    if (h[i] - h[i - 1] < 1e-12) h[i] = h[i - 1];
  // d-th derivative of phi over d!
  auto taylor = [&](double x, int d) {
    if (x >= t) return 0.0;
    double c = 1.0;
    for (int m = 0; m < d; ++m) c *= static_cast<double>(k - m) / (m + 1);
    const double sign = ((k + d) % 2 == 0) ? 1.0 : -1.0;
    return sign * c * std::pow(t - x, k - d);
  };
  std::vector<double> col(h.size());
  for (int i = 0; i <= k; ++i) col[i] = taylor(h[i], 0);
  for (int j = 1; j <= k; ++j)
    for (int i = k; i >= j; --i)
      col[i] = h[i] == h[i - j] ? taylor(h[i], j) : (col[i] - col[i - 1]) / (h[i] - h[i - j]);
  return std::clamp(col[k], 0.0, 1.0);
}

bool origin_in_hull(const std::vector<Vec>& q) {
  const int m = static_cast<int>(q.front().size());
  const int p = static_cast<int>(q.size());
  for (const Vec& v : q)
    if (v.norm() == 0.0) return true;
  for (unsigned mask = 1; mask < (1u << p); ++mask) {
    const int s = std::popcount(mask);
    if (s > m + 1 || s < 2) continue;
    Mat a(m + 1, s);
    int c = 0;
    for (int i = 0; i < p; ++i)
      if (mask & (1u << i)) {
        a.block(0, c, m, 1) = q[static_cast<std::size_t>(i)];
        a(m, c) = 1.0;
        ++c;
      }
    Vec rhs = Vec::Zero(m + 1);
    rhs[m] = 1.0;
    const Eigen::ColPivHouseholderQR<Mat> qr(a);
    if (qr.rank() < s) continue;
    const Vec lam = qr.solve(rhs);
    if ((a * lam - rhs).norm() > 1e-10) continue;
    if (lam.minCoeff() >= 0.0) return true;
  }
  return false;
}

// integral over the inward half of the normal circle of sigma_i(II_v), Gauss-Legendre in the angle
double half_circle_integral(const ChartJet& jet, const Frames& f, const Vec& conormal, int i) {
  static const QuadratureRule gl = gauss_legendre(24);
  const Vec c = f.normal * (f.normal.transpose() * conormal).normalized();
  Vec w = f.normal.col(0) - c * c.dot(f.normal.col(0));
  if (w.norm() < 0.5) w = f.normal.col(1) - c * c.dot(f.normal.col(1));
  w.normalize();
  double total = 0.0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double a = 0.5 * kPi * gl.nodes[q];
    const Vec v = std::cos(a) * c + std::sin(a) * w;
    total += 0.5 * kPi * gl.weights[q] * elementary_symmetric(second_form_matrix(jet, f, v), i);
  }
  return total;
}

}  // namespace

double Region::clearance(const Vec& x) const {
  if (!half_space) return std::numeric_limits<double>::infinity();
  return (half_space->offset - half_space->normal.dot(x)) / half_space->normal.norm();
}

Region Region::transformed(double scale, const Mat& rotation, const Vec& translation) const {
  if (!half_space) return *this;
  const Vec a = rotation * half_space->normal;
  return {HalfSpace{a, scale * half_space->offset + a.dot(translation)}};
}

Shape::Shape(StratifiedComplex k, std::string id, Region u)
    : body_(std::move(k)), id_(std::move(id)), region_(std::move(u)) {}
Shape::Shape(SmoothShape s, std::string id, Region u)
    : body_(std::move(s)), id_(std::move(id)), region_(std::move(u)) {}

Shape Shape::with_region(Region u) const {
  Shape s = *this;
  s.region_ = std::move(u);
  return s;
}

Shape Shape::transformed(double scale, const Mat& rotation, const Vec& translation) const {
  Region u = region_.transformed(scale, rotation, translation);
  if (is_pl()) return Shape(complex().transformed(scale, rotation, translation), id_, u);
  return Shape(smooth().transformed(scale, rotation, translation), id_, u);
}

int Shape::ambient_dim() const { return is_pl() ? complex().ambient_dim() : smooth().ambient_dim(); }
int Shape::dim() const { return is_pl() ? complex().dim() : smooth().dim(); }

Vec Shape::bound_center() const {
  if (!is_pl()) return smooth().bound_center();
  Vec c = Vec::Zero(complex().ambient_dim());
  for (const Vec& v : complex().vertices()) c += v;
  return c / static_cast<double>(complex().vertices().size());
}

double Shape::bound_radius() const {
  if (!is_pl()) return smooth().bound_radius();
  const Vec c = bound_center();
  double r = 0.0;
  for (const Vec& v : complex().vertices()) r = std::max(r, (v - c).norm());
  return r;
}

double smooth_lambda(const SmoothStratum& s, const Vec& u, int n, int k) {
  if (k < 0 || k > n) throw std::domain_error("smooth_lambda: need 0 <= k <= n");
  if (k > s.dim) return 0.0;
  if (s.dim == n) return k == n ? 1.0 : 0.0;
  const int i = s.dim - k;
  const double norm = sphere_volume(n - k - 1);
  if (!s.is_boundary()) return lkw_curvature(s, u, i) / norm;
  const ChartJet jet = s.jet(u);
  const Frames f = frames(jet);
  const Vec c = s.inward_conormal(u);
  if (f.normal.cols() == 1) {
    const Vec nu = f.normal.col(0) * (f.normal.col(0).dot(c) > 0 ? 1.0 : -1.0);
    return elementary_symmetric(second_form_matrix(jet, f, nu), i) / norm;
  }
  if (f.normal.cols() == 2) return half_circle_integral(jet, f, c, i) / norm;
  throw std::domain_error("smooth_lambda: boundary strata of codimension above 2 are not supported");
}

double pl_lambda_exact(const StratifiedComplex& k, std::size_t cell) {
  const int codim = k.ambient_dim() - k.cell_dim(cell);
  if (codim == 0) return 1.0;
  const NormalLink link = normal_link(k, cell);
  if (codim == 1) {
    const Vec nu = link.normal_space.basis().col(0);
    return 0.5 * (normal_morse_index(link, nu, 0.0) + normal_morse_index(link, -nu, 0.0));
  }
  if (codim != 2) throw std::domain_error("pl_lambda_exact: codimension above 2 needs sampling");
  if (link.directions.empty()) return 1.0;
  const Mat& b = link.normal_space.basis();
  std::vector<double> cuts;
  for (const Vec& d : link.directions) {
    const double psi = std::atan2(b.col(1).dot(d), b.col(0).dot(d));
    for (double c : {psi + 0.5 * kPi, psi - 0.5 * kPi}) cuts.push_back(std::remainder(c, 2.0 * kPi) + kPi);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const double a = cuts[i];
    const double z = i + 1 < cuts.size() ? cuts[i + 1] : cuts[0] + 2.0 * kPi;
    if (z - a <= 0.0) continue;
    const double mid = 0.5 * (a + z) - kPi;
    const Vec v = std::cos(mid) * b.col(0) + std::sin(mid) * b.col(1);
    total += (z - a) * normal_morse_index(link, v, 0.0);
  }
  return total / (2.0 * kPi);
}

double cell_volume_in(const StratifiedComplex& k, std::size_t cell, const Region& u) {
  const double vol = k.cell_volume(cell);
  if (u.everything()) return vol;
  std::vector<double> h;
  for (int v : k.cell(cell)) h.push_back(u.half_space->normal.dot(k.vertices()[v]));
  return vol * clipped_fraction(std::move(h), u.half_space->offset);
}

Estimate lambda_density(const Shape& x, const StratumRef& s, int k, const RandomSource& rng, std::int64_t n_dirs) {
  const int n = x.ambient_dim();
  if (k < 0 || k > n) throw std::domain_error("lambda_density: need 0 <= k <= n");
  if (!x.is_pl()) {
    const SmoothStratum& st = x.smooth().strata().at(s.index);
    return Estimate::exact(smooth_lambda(st, s.chart_point, n, k), rng.master_seed());
  }
  const StratifiedComplex& kx = x.complex();
  const int d = kx.cell_dim(s.index);
  if (k != d) return Estimate::exact(0.0, rng.master_seed());
  if (n - d <= 2) return Estimate::exact(pl_lambda_exact(kx, s.index), rng.master_seed());
  const NormalLink link = normal_link(kx, s.index);
  std::vector<double> vals(static_cast<std::size_t>(n_dirs));
  for (std::int64_t i = 0; i < n_dirs; ++i) {
    RandomSource r = rng.substream(static_cast<std::uint64_t>(i));
    for (int attempt = 0;; ++attempt) {
      const Vec v = sample_unit_sphere(n, r);
      try {
        vals[static_cast<std::size_t>(i)] = normal_morse_index(link, v);
        break;
      } catch (const DegenerateDirection&) {
        if (attempt > 50) throw;
      }
    }
  }
  return estimate_from_samples(vals, rng.master_seed());
}

LkResult lk_measure(const Shape& x, int k, const RandomSource& rng, const EstimatorOptions& opts) {
  const int n = x.ambient_dim();
  if (k < 0 || k > n) throw std::domain_error("lk_measure: need 0 <= k <= n");
  LkResult out;
  if (!x.is_pl()) {
    out.method = "exact Gauss–Bonnet route";
    Estimate total = Estimate::exact(0.0, rng.master_seed());
    const Region& u = x.region();
    RegionPredicate pred;
    if (!u.everything()) pred = [&u](const Vec& p) { return u.contains(p); };
    for (const SmoothStratum& s : x.smooth().strata()) {
      if (k > s.dim) continue;
      if (s.dim == n && k != n) continue;
      const Estimate e =
          integrate_stratum(s, [&](const Vec& uu, const ChartJet&) { return smooth_lambda(s, uu, n, k); }, pred);
      total = total + e;
    }
    // refinement differences at rounding level are not an error
    if (total.std_error <= 1e-12 * std::max(1.0, std::abs(total.value))) total.std_error = 0.0;
    total.n_samples = 1;
    total.seed = rng.master_seed();
    out.estimate = total;
    return out;
  }
  const StratifiedComplex& kx = x.complex();
  const Region& u = x.region();
  CompensatedSum exact;
  std::vector<std::size_t> sampled;
  std::vector<double> sampled_vol;
  for (std::size_t c : kx.cells_of_dim(k)) {
    const double vol = cell_volume_in(kx, c, u);
    if (vol == 0.0) continue;
    if (n - k <= 2)
      exact.add(vol * pl_lambda_exact(kx, c));
    else {
      sampled.push_back(c);
      sampled_vol.push_back(vol);
    }
  }
  if (sampled.empty()) {
    out.method = "exact normal-link enumeration";
    out.estimate = Estimate::exact(exact.value(), rng.master_seed());
    return out;
  }
  out.method = "normal-link enumeration, shared sphere directions";
  std::vector<NormalLink> links;
  for (std::size_t c : sampled) links.push_back(normal_link(kx, c));
  const auto rows = parallel_map(static_cast<std::size_t>(opts.n_samples), opts.threads, [&](std::size_t i) {
    RandomSource r = rng.substream(i);
    for (int attempt = 0;; ++attempt) {
      const Vec v = sample_unit_sphere(n, r);
      try {
        CompensatedSum s;
        for (std::size_t j = 0; j < links.size(); ++j) s.add(sampled_vol[j] * normal_morse_index(links[j], v));
        return std::pair<double, int>{s.value(), attempt};
      } catch (const DegenerateDirection&) {
        if (attempt >= opts.max_retries) throw;
      }
    }
  });
  std::vector<double> vals;
  for (const auto& [v, a] : rows) {
    vals.push_back(v);
    out.resampled += a;
  }
  Estimate mc = estimate_from_samples(vals, rng.master_seed());
  mc.value += exact.value();
  out.estimate = mc;
  return out;
}

std::vector<LkResult> lk_vector(const Shape& x, const RandomSource& rng, const EstimatorOptions& opts) {
  std::vector<LkResult> out;
  for (int k = 0; k <= x.ambient_dim(); ++k) out.push_back(lk_measure(x, k, rng, opts));
  return out;
}

int morse_count(const Shape& x, const Vec& v) {
  const Region& u = x.region();
  const double diam = x.diameter();
  int total = 0;
  if (x.is_pl()) {
    const StratifiedComplex& k = x.complex();
    for (const auto& [vert, ind] : pl_morse_indices(k, v)) {
      const Vec& p = k.vertices()[static_cast<std::size_t>(vert)];
      if (std::abs(u.clearance(p)) < 1e-9 * diam) throw DegenerateDirection("morse_count: vertex on region boundary");
      if (u.contains(p)) total += ind;
    }
    return total;
  }
  CriticalSearchOptions opts;
  opts.diameter = diam;
  for (const SmoothStratum& s : x.smooth().strata()) {
    const CriticalSearch cs = height_critical_points(s, v, opts);
    if (cs.degenerate) throw DegenerateDirection("morse_count: " + cs.reason);
    for (const CriticalPoint& cp : cs.points) {
      if (std::abs(u.clearance(cp.x)) < 1e-9 * diam)
        throw DegenerateDirection("morse_count: critical point on region boundary");
      if (!u.contains(cp.x)) continue;
      int nor = 1;
      if (s.is_boundary()) {
        const double c = v.dot(s.inward_conormal(cp.u));
        if (std::abs(c) < 1e-8) throw DegenerateDirection("morse_count: direction tangent to the conormal wall");
        nor = c > 0 ? 1 : 0;
      }
      total += (cp.morse_index % 2 == 0 ? 1 : -1) * nor;
    }
  }
  return total;
}

ExchangeResult exchange_lambda0(const Shape& x, const RandomSource& rng, const EstimatorOptions& opts) {
  const int n = x.ambient_dim();
  struct Row {
    double value = 0.0;
    int retries = 0;
    bool ok = true;
  };
  const auto rows = parallel_map(static_cast<std::size_t>(opts.n_samples), opts.threads, [&](std::size_t i) {
    RandomSource r = rng.substream(i);
    Row row;
    for (;;) {
      const Vec v = sample_unit_sphere(n, r);
      try {
        row.value = morse_count(x, v);
        return row;
      } catch (const DegenerateDirection&) {
        if (++row.retries > opts.max_retries) {
          row.ok = false;
          return row;
        }
      }
    }
  });
  ExchangeResult out;
  std::vector<double> vals;
  for (const Row& r : rows) {
    out.resampled += r.retries;
    if (r.ok)
      vals.push_back(r.value);
    else
      ++out.dropped;
  }
  out.estimate = estimate_from_samples(vals, rng.master_seed());
  return out;
}

int slice_euler(const Shape& x, const AffineFlat& e) {
  if (!x.region().everything()) throw std::invalid_argument("slice_euler: region must be the whole space");
  if (!x.is_pl()) {
    if (!x.smooth().slice_euler) throw std::invalid_argument("slice_euler: no closed form for " + x.smooth().tag());
    const auto chi = x.smooth().slice_euler(e);
    if (!chi) throw std::invalid_argument("slice_euler: no closed form for this flat");
    return *chi;
  }
  const StratifiedComplex& k = x.complex();
  const LinearSubspace perp = e.direction.complement();
  std::vector<Vec> proj(k.vertices().size());
  for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = perp.coordinates(k.vertices()[i] - e.offset);
  const auto& mob = k.mobius_weights();
  int chi = 0;
  for (std::size_t c = 0; c < k.cell_count(); ++c) {
    if (mob[c] == 0) continue;
    std::vector<Vec> q;
    for (int v : k.cell(c)) q.push_back(proj[static_cast<std::size_t>(v)]);
    if (perp.dim() == 0 || origin_in_hull(q)) chi += mob[c];
  }
  return chi;
}

KinematicResult kinematic_check(const Shape& x, int k, const RandomSource& rng, const EstimatorOptions& opts) {
  const int n = x.ambient_dim();
  if (k < 1 || k > n - 1) throw std::domain_error("kinematic_check: need 1 <= k <= n-1");
  const double radius = x.bound_radius() * (1.0 + 1e-9) + 1e-12;
  const Vec centre = x.bound_center();
  const auto vals = parallel_map(static_cast<std::size_t>(opts.n_samples), opts.threads, [&](std::size_t i) {
    RandomSource r = rng.substream(i);
    const WeightedFlat wf = sample_affine_flat_hitting_ball(n, k, radius, r, centre);
    return wf.weight * slice_euler(x, wf.flat);
  });
  KinematicResult out;
  out.numerator = estimate_from_samples(vals, rng.master_seed());
  out.denominator = lk_measure(x, n - k, rng.substream(0x6b696e), opts).estimate;
  out.reference = ball_volume(k) * ball_volume(n - k) / (binomial(n, k) * ball_volume(n));
  const double den = out.denominator.value;
  if (std::abs(den) < 1e-9 * std::max(1.0, std::abs(out.numerator.value))) {
    out.division_flagged = true;
    out.ratio = out.numerator;
    return out;
  }
  const double r = out.numerator.value / den;
  const double rel = std::hypot(out.numerator.std_error / std::max(1e-300, std::abs(out.numerator.value)),
                                out.denominator.std_error / std::abs(den));
  out.ratio = {r, std::abs(r) * rel, out.numerator.n_samples, rng.master_seed()};
  return out;
}

double point_simplex_distance(const Mat& simplex, const Vec& p) {
  const int m = static_cast<int>(simplex.cols());
  if (m == 1) return (simplex.col(0) - p).norm();
  const Vec a = simplex.col(0);
  Mat e(simplex.rows(), m - 1);
  for (int j = 1; j < m; ++j) e.col(j - 1) = simplex.col(j) - a;
  const Mat g = e.transpose() * e;
  const Vec mu = g.ldlt().solve(e.transpose() * (p - a));
  Vec lam(m);
  lam[0] = 1.0 - mu.sum();
  lam.tail(m - 1) = mu;
  if (lam.minCoeff() >= 0.0) return (a + e * mu - p).norm();
  double best = std::numeric_limits<double>::infinity();
  for (int drop = 0; drop < m; ++drop) {
    if (lam[drop] >= 0.0) continue;
    Mat face(simplex.rows(), m - 1);
    for (int j = 0, c = 0; j < m; ++j)
      if (j != drop) face.col(c++) = simplex.col(j);
    best = std::min(best, point_simplex_distance(face, p));
  }
  return best;
}

double distance_to_shape(const Shape& x, const Vec& p) {
  if (!x.is_pl()) {
    const SmoothShape& s = x.smooth();
    const double r = (p - s.bound_center()).norm();
    if (s.tag() == "ball") return std::max(0.0, r - s.bound_radius());
    if (s.tag() == "sphere") return std::abs(r - s.bound_radius());
    throw std::invalid_argument("distance_to_shape: no distance function for " + s.tag());
  }
  const StratifiedComplex& k = x.complex();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k.cell_count() && best > 0.0; ++c) {
    if (!k.is_maximal(c)) continue;
    const Mat pts = k.cell_points(c);
    const Vec centre = pts.rowwise().mean();
    double rad = 0.0;
    for (int j = 0; j < pts.cols(); ++j) rad = std::max(rad, (pts.col(j) - centre).norm());
    if ((p - centre).norm() - rad >= best) continue;
    best = std::min(best, point_simplex_distance(pts, p));
  }
  return best;
}

SteinerFit steiner_oracle(const Shape& x, const std::vector<double>& epsilons, std::int64_t n_mc,
                          const RandomSource& rng, int threads) {
  const int n = x.ambient_dim();
  const std::size_t m = epsilons.size();
  if (m < static_cast<std::size_t>(n + 1)) throw std::invalid_argument("steiner_oracle: need at least n+1 epsilons");
  for (std::size_t i = 0; i < m; ++i) {
    if (!(epsilons[i] > 0)) throw std::invalid_argument("steiner_oracle: epsilons must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (epsilons[i] == epsilons[j]) throw std::invalid_argument("steiner_oracle: epsilons must be distinct");
  }
  Mat a(static_cast<Eigen::Index>(m), n + 1);
  for (std::size_t i = 0; i < m; ++i)
    for (int k = 0; k <= n; ++k) a(static_cast<Eigen::Index>(i), k) = std::pow(epsilons[i], n - k);
  const Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec sv = svd.singularValues();
  SteinerFit fit;
  fit.epsilons = epsilons;
  fit.condition = sv[0] / sv[sv.size() - 1];
  if (fit.condition > 1e8)
    throw std::runtime_error("steiner_oracle: ill-conditioned fit, choose a wider epsilon ladder");
  const Mat pinv = svd.solve(Mat::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)));

  constexpr int kReplicates = 8;
  const int grid = std::max(2, static_cast<int>(std::floor(std::pow(static_cast<double>(n_mc) / kReplicates, 1.0 / n))));
  std::size_t cells = 1;
  for (int i = 0; i < n; ++i) cells *= static_cast<std::size_t>(grid);
  const Vec centre = x.bound_center();
  const double radius = x.bound_radius();

  const auto reps = parallel_map(kReplicates, threads, [&](std::size_t r) {
    RandomSource rs = rng.substream(r);
    Vec vols(static_cast<Eigen::Index>(m));
    std::vector<std::size_t> hits(m, 0);
    Vec unit(n);
    for (std::size_t c = 0; c < cells; ++c) {
      std::size_t rem = c;
      for (int d = 0; d < n; ++d) {
        const auto idx = static_cast<double>(rem % static_cast<std::size_t>(grid));
        rem /= static_cast<std::size_t>(grid);
        unit[d] = -1.0 + 2.0 * (idx + rs.uniform()) / grid;
      }
      for (std::size_t j = 0; j < m; ++j) {
        const double half = radius + epsilons[j];
        const Vec p = centre + half * unit;
        if (distance_to_shape(x, p) <= epsilons[j]) ++hits[j];
      }
    }
    for (std::size_t j = 0; j < m; ++j)
      vols[static_cast<Eigen::Index>(j)] =
          std::pow(2.0 * (radius + epsilons[j]), n) * static_cast<double>(hits[j]) / static_cast<double>(cells);
    return vols;
  });
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> v;
    for (const Vec& r : reps) v.push_back(r[static_cast<Eigen::Index>(j)]);
    fit.volumes.push_back(estimate_from_samples(v, rng.master_seed()));
  }
  for (int k = 0; k <= n; ++k) {
    std::vector<double> c;
    for (const Vec& r : reps) c.push_back((pinv * r)[k]);
    Estimate e = estimate_from_samples(c, rng.master_seed());
    e.n_samples = static_cast<std::int64_t>(cells) * kReplicates;
    fit.coefficients.push_back(e);
  }
  return fit;
}

}  // namespace lkpolar
