#include "lkpolar/germ.hpp"

#include "lkpolar/polar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lkpolar {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSampleRetries = 20;

// min |x| over x in cone(Y) with B^T x = c; +inf when empty
double cone_flat_distance(const Mat& y, const Mat& b, const Vec& c) {
  const int p = static_cast<int>(y.cols());
  const int k = static_cast<int>(b.cols());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << p); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < p; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    const int s = static_cast<int>(idx.size());
    Mat ys(y.rows(), s);
    for (int i = 0; i < s; ++i) ys.col(i) = y.col(idx[static_cast<std::size_t>(i)]);
    const Mat g = ys.transpose() * ys;
    const Mat m = b.transpose() * ys;
    Mat kkt = Mat::Zero(s + k, s + k);
    kkt.topLeftCorner(s, s) = 2.0 * g;
    kkt.topRightCorner(s, k) = m.transpose();
    kkt.bottomLeftCorner(k, s) = m;
    Vec rhs = Vec::Zero(s + k);
    rhs.tail(k) = c;
    const Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if ((kkt * sol - rhs).norm() > 1e-9 * (rhs.norm() + kkt.norm() * sol.norm())) continue;
    const Vec mu = sol.head(s);
    if (mu.minCoeff() < -1e-14) continue;
    best = std::min(best, (ys * mu).norm());
  }
  return best;
}

// hits farther than this are treated as a near-parallel flat and resampled
constexpr double kFarHit = 1e6;

// range of <y, v> over the circle of the round cone
std::pair<double, double> circle_height_range(double theta, const Vec& v) {
  const double a = std::sin(theta) * std::hypot(v[0], v[1]);
  const double c = std::cos(theta) * v[2];
  return {c - a, c + a};
}

// chi of the round cone cut by {B^T x = c} as the ball radius over the offset
// goes to infinity; nullopt near a wall
std::optional<int> round_slice_euler(double theta, const Mat& b, const Vec& c) {
  const int k = static_cast<int>(b.cols());
  if (k == 1) {
    const auto [lo, hi] = circle_height_range(theta, c[0] * b.col(0));
    if (std::abs(lo) < 1.0 / kFarHit || std::abs(hi) < 1.0 / kFarHit) return std::nullopt;
    return (lo > 0 || hi < 0) ? 0 : 1;
  }
  if (k == 2) {
    const Vec v = b * c;
    Vec h(3);
    h << b(1, 0) * b(2, 1) - b(2, 0) * b(1, 1), b(2, 0) * b(0, 1) - b(0, 0) * b(2, 1),
        b(0, 0) * b(1, 1) - b(1, 0) * b(0, 1);
    h.normalize();
    const double ct = std::cos(theta);
    const double qa = h[2] * h[2] - ct * ct, qb = 2.0 * v[2] * h[2], qc = v[2] * v[2] - ct * ct * v.squaredNorm();
    if (std::abs(qa) < 1.0 / kFarHit) return std::nullopt;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc <= 0) return 0;
    const double sq = std::sqrt(disc);
    int count = 0;
    for (double t : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
      const Vec p = v + t * h;
      if (p.norm() > kFarHit) return std::nullopt;
      if (p[2] > 0) ++count;
    }
    return count;
  }
  return 0;
}

// stratified Morse index of <v, .> at the apex of the round cone
int round_apex_index(double theta, const Vec& v) {
  const auto [lo, hi] = circle_height_range(theta, v);
  if (std::abs(lo) < 1e-12 || std::abs(hi) < 1e-12) throw DegenerateDirection("round cone: direction on the wall");
  return (lo > 0 || hi < 0) ? 1 : 0;
}

Estimate difference(const Estimate& a, const Estimate& b) { return a - b; }

}  // namespace

ConeGerm ConeGerm::from_link(StratifiedComplex link, std::string id) {
  if (link.vertices().empty()) throw std::invalid_argument("ConeGerm: empty link");
  for (const Vec& v : link.vertices())
    if (std::abs(v.norm() - 1.0) > 1e-10) throw std::invalid_argument("ConeGerm: link vertices must be unit vectors");
  ConeGerm g;
  g.id_ = std::move(id);
  g.n_ = link.ambient_dim();
  double dmin = std::numeric_limits<double>::infinity();
  std::vector<Cell> simplices;
  for (std::size_t c = 0; c < link.cell_count(); ++c) {
    if (!link.is_maximal(c)) continue;
    dmin = std::min(dmin, point_simplex_distance(link.cell_points(c), Vec::Zero(g.n_)));
    Cell s{0};
    for (int v : link.cell(c)) s.push_back(v + 1);
    simplices.push_back(std::move(s));
  }
  if (dmin < 1e-6) throw std::invalid_argument("ConeGerm: a link cell passes through the origin");
  const double reach = 2.0 / dmin;
  std::vector<Vec> verts{Vec::Zero(g.n_)};
  for (const Vec& v : link.vertices()) verts.push_back(reach * v);
  g.cone_ = StratifiedComplex::from_simplices(g.n_, std::move(verts), simplices);
  g.link_ = std::move(link);
  return g;
}

ConeGerm ConeGerm::round_cone(double theta) {
  if (!(theta > 0 && theta < 0.5 * kPi)) throw std::invalid_argument("round_cone: need 0 < theta < pi/2");
  ConeGerm g;
  g.id_ = "cone-circle:" + std::to_string(theta);
  g.n_ = 3;
  g.theta_ = theta;
  return g;
}

int ConeGerm::dim() const { return is_round() ? 2 : cone_.dim(); }

std::vector<std::size_t> ConeGerm::cone_cells(int k) const {
  std::vector<std::size_t> out;
  if (is_round()) return out;
  for (std::size_t c : cone_.cells_of_dim(k))
    if (cone_.cell(c).front() == 0) out.push_back(c);
  return out;
}

Mat ConeGerm::directions(std::size_t cone_cell) const {
  const Cell& c = cone_.cell(cone_cell);
  Mat out(n_, static_cast<Eigen::Index>(c.size()) - 1);
  for (std::size_t i = 1; i < c.size(); ++i)
    out.col(static_cast<Eigen::Index>(i) - 1) = cone_.vertices()[static_cast<std::size_t>(c[i])].normalized();
  return out;
}

double cone_solid_angle(const Mat& y) {
  const int k = static_cast<int>(y.cols());
  if (k <= 1) return 1.0;
  if (k == 2) return std::acos(std::clamp(y.col(0).dot(y.col(1)), -1.0, 1.0));
  if (k == 3) {
    Mat c = y;
    if (y.rows() != 3) c = LinearSubspace::span_of(y).basis().transpose() * y;
    const double det = std::abs(c.determinant());
    const double den = 1.0 + c.col(0).dot(c.col(1)) + c.col(1).dot(c.col(2)) + c.col(0).dot(c.col(2));
    return 2.0 * std::atan2(det, den);
  }
  throw std::domain_error("cone_solid_angle: cones of dimension above 3 are not supported");
}

double density(const ConeGerm& x, int k) {
  if (k < 0 || k > x.ambient_dim()) throw std::domain_error("density: need 0 <= k <= n");
  if (x.is_round()) return k == 2 ? std::sin(x.theta()) : 0.0;
  const StratifiedComplex& c = x.truncated();
  if (k == 0) return c.is_maximal(x.apex_cell()) ? 1.0 : 0.0;
  double total = 0.0;
  for (std::size_t cell : x.cone_cells(k))
    if (c.is_maximal(cell)) total += cone_solid_angle(x.directions(cell)) / (k * ball_volume(k));
  return total;
}

GermEstimate sigma_invariant(const ConeGerm& x, int k, std::int64_t n_samples, const RandomSource& rng, int threads) {
  const int n = x.ambient_dim();
  if (k < 0 || k > n) throw std::domain_error("sigma_invariant: need 0 <= k <= n");
  GermEstimate out;
  if (k == 0) {
    out.estimate = Estimate::exact(1.0, rng.master_seed());
    return out;
  }
  struct Cone {
    Mat y;
    int mobius;
  };
  std::vector<Cone> cones;
  if (!x.is_round()) {
    const auto& mob = x.truncated().mobius_weights();
    for (int d = 1; d <= x.dim(); ++d)
      for (std::size_t c : x.cone_cells(d))
        if (mob[c] != 0) cones.push_back({x.directions(c), mob[c]});
  }
  struct Row {
    double value = 0.0;
    int retries = 0;
    bool ok = false;
  };
  const auto rows = parallel_map(static_cast<std::size_t>(n_samples), threads, [&](std::size_t i) {
    RandomSource r = rng.substream(i);
    Row row;
    for (;;) {
      const Mat b = sample_grassmannian(n, k, r).basis();
      const Vec c = sample_unit_sphere(k, r);
      std::optional<int> chi;
      if (x.is_round()) {
        chi = round_slice_euler(x.theta(), b, c);
      } else {
        int total = 0;
        for (const Cone& cone : cones) {
          const double d = cone_flat_distance(cone.y, b, c);
          if (std::isinf(d)) continue;
          if (d > kFarHit) {
            total = std::numeric_limits<int>::min();
            break;
          }
          total += cone.mobius;
        }
        if (total != std::numeric_limits<int>::min()) chi = total;
      }
      if (chi) {
        row.value = *chi;
        row.ok = true;
        return row;
      }
      if (++row.retries > kSampleRetries) return row;
    }
  });
  std::vector<double> vals;
  for (const Row& row : rows) {
    out.resampled += row.retries;
    if (row.ok) vals.push_back(row.value);
  }
  out.flagged = out.resampled > std::max<std::int64_t>(10, n_samples / 20) ||
                static_cast<std::int64_t>(vals.size()) < n_samples;
  out.estimate = estimate_from_samples(vals, rng.master_seed());
  return out;
}

LocalLambdaResult local_lambda(const ConeGerm& x, int k, const RandomSource& rng, std::vector<double> eps_ladder,
                               std::int64_t n_dirs) {
  const int n = x.ambient_dim();
  if (k < 0 || k > n) throw std::domain_error("local_lambda: need 0 <= k <= n");
  if (eps_ladder.size() < 2) throw std::invalid_argument("local_lambda: need at least two radii");
  for (double e : eps_ladder)
    if (!(e > 0 && e <= 1)) throw std::invalid_argument("local_lambda: radii must lie in (0, 1]");
  std::sort(eps_ladder.begin(), eps_ladder.end(), std::greater<>());

  // Lambda_k(X, X ∩ B_eps) = coefficient * eps^k
  Estimate coefficient = Estimate::exact(0.0, rng.master_seed());
  if (x.is_round()) {
    if (k == 2) coefficient.value = kPi * std::sin(x.theta());
    if (k == 0) {
      std::vector<double> vals(static_cast<std::size_t>(n_dirs));
      for (std::int64_t i = 0; i < n_dirs; ++i) {
        RandomSource r = rng.substream(static_cast<std::uint64_t>(i));
        for (int attempt = 0;; ++attempt) {
          try {
            vals[static_cast<std::size_t>(i)] = round_apex_index(x.theta(), sample_unit_sphere(3, r));
            break;
          } catch (const DegenerateDirection&) {
            if (attempt > kSampleRetries) throw;
          }
        }
      }
      coefficient = estimate_from_samples(vals, rng.master_seed());
    }
  } else {
    const Shape cone(x.truncated());
    for (std::size_t c : x.cone_cells(k)) {
      const double vol = k == 0 ? 1.0 : cone_solid_angle(x.directions(c)) / k;
      const Estimate lam = lambda_density(cone, {c, Vec()}, k, rng.substream(c), n_dirs);
      coefficient = coefficient + vol * lam;
    }
  }

  LocalLambdaResult out;
  out.epsilons = eps_ladder;
  for (double e : eps_ladder) {
    const double scale = std::pow(e, k);
    // volumes and densities are evaluated at radius e, then normalized
    Estimate v = (scale * coefficient);
    v = (1.0 / (ball_volume(k) * scale)) * v;
    v.n_samples = coefficient.n_samples;
    v.seed = rng.master_seed();
    out.ladder.push_back(v);
  }
  const std::size_t m = out.ladder.size();
  const Estimate& f1 = out.ladder[m - 2];
  const Estimate& f2 = out.ladder[m - 1];
  const double e1 = eps_ladder[m - 2], e2 = eps_ladder[m - 1];
  out.estimate = f2;
  out.estimate.value = f2.value + (f2.value - f1.value) * e2 / (e1 - e2);
  double lo = f2.value, hi = f2.value;
  for (const Estimate& f : out.ladder) lo = std::min(lo, f.value), hi = std::max(hi, f.value);
  out.flagged = hi - lo > 5.0 * f2.std_error + 1e-12 * std::max(1.0, std::abs(f2.value));
  return out;
}

GermEstimate local_polar_length(const ConeGerm& x, int k, std::int64_t n_planes, const RandomSource& rng,
                                int threads) {
  const int n = x.ambient_dim();
  if (k < 0 || k > n) throw std::domain_error("local_polar_length: need 0 <= k <= n");
  GermEstimate out;
  if (x.is_round()) {
    if (k == 2) out.estimate = Estimate::exact(std::sin(x.theta()), rng.master_seed());
    else if (k != 0) out.estimate = Estimate::exact(0.0, rng.master_seed());
    else {
      std::vector<double> vals(static_cast<std::size_t>(n_planes));
      for (std::int64_t i = 0; i < n_planes; ++i) {
        RandomSource r = rng.substream(static_cast<std::uint64_t>(i));
        for (int attempt = 0;; ++attempt) {
          const Vec u = sample_unit_sphere(3, r);
          try {
            vals[static_cast<std::size_t>(i)] =
                0.5 * (round_apex_index(x.theta(), u) + round_apex_index(x.theta(), -u));
            break;
          } catch (const DegenerateDirection&) {
            ++out.resampled;
            if (attempt > kSampleRetries) throw;
          }
        }
      }
      out.estimate = estimate_from_samples(vals, rng.master_seed());
    }
    return out;
  }

  const auto cells = x.cone_cells(k);
  if (cells.empty()) {
    out.estimate = Estimate::exact(0.0, rng.master_seed());
    return out;
  }
  if (k == n) {
    out.estimate = Estimate::exact(density(x, n), rng.master_seed());
    return out;
  }
  const PolarContext ctx{Shape(x.truncated())};
  const double bk = ball_volume(k);
  auto plane_value = [&](const LinearSubspace& plane) -> std::optional<double> {
    if (!check_genericity(ctx, plane, {}).empty()) return std::nullopt;
    CompensatedSum total;
    for (std::size_t c : cells) {
      PolarPiece piece;
      piece.stratum = c;
      piece.kind = PieceKind::simplex;
      double alpha;
      try {
        alpha = alpha_index(ctx, piece, plane);
      } catch (const DegenerateDirection&) {
        return std::nullopt;
      }
      if (alpha == 0.0) continue;
      double theta = 1.0;
      if (k > 0) {
        Mat img = plane.basis().transpose() * x.directions(c);
        for (int j = 0; j < img.cols(); ++j) img.col(j).normalize();
        theta = cone_solid_angle(img) / (k * bk);
      }
      total.add(alpha * theta);
    }
    return total.value();
  };
  if (k == n - 1) {
    const auto v = plane_value(LinearSubspace::full(n));
    if (!v) throw DegenerateDirection("local_polar_length: germ is degenerate for the identity projection");
    out.estimate = Estimate::exact(*v, rng.master_seed());
    return out;
  }
  struct Row {
    double value = 0.0;
    int retries = 0;
    bool ok = false;
  };
  const auto rows = parallel_map(static_cast<std::size_t>(n_planes), threads, [&](std::size_t i) {
    RandomSource r = rng.substream(i);
    Row row;
    for (;;) {
      const auto v = plane_value(sample_grassmannian(n, k + 1, r));
      if (v) {
        row.value = *v;
        row.ok = true;
        return row;
      }
      if (++row.retries > kSampleRetries) return row;
    }
  });
  std::vector<double> vals;
  for (const Row& row : rows) {
    out.resampled += row.retries;
    if (row.ok) vals.push_back(row.value);
  }
  out.flagged = out.resampled > std::max<std::int64_t>(10, n_planes / 20) ||
                static_cast<std::int64_t>(vals.size()) < n_planes;
  out.estimate = estimate_from_samples(vals, rng.master_seed());
  return out;
}

bool agrees(const Estimate& a, const Estimate& b, double multiplier) {
  const double floor = 1e-9 * std::max({1.0, std::abs(a.value), std::abs(b.value)});
  return std::abs(a.value - b.value) <= multiplier * combined_error(a, b) + floor;
}

bool agrees(const Estimate& a, double b, double multiplier) { return agrees(a, Estimate::exact(b), multiplier); }

bool LocalReport::all_pass() const {
  for (bool p : row_pass)
    if (!p) return false;
  for (const LocalRow& r : extra)
    if (!r.pass) return false;
  return true;
}

LocalReport verify_local_identities(const ConeGerm& x, const RandomSource& rng, const LocalBudget& budget,
                                    std::vector<int> ks) {
  const int n = x.ambient_dim();
  if (ks.empty())
    for (int k = 0; k <= n; ++k) ks.push_back(k);
  std::vector<std::optional<Estimate>> sigma(static_cast<std::size_t>(n) + 2);
  auto sigma_at = [&](int j) -> Estimate {
    auto& slot = sigma[static_cast<std::size_t>(j)];
    if (!slot) {
      if (j > n)
        slot = Estimate::exact(0.0, rng.master_seed());
      else {
        const GermEstimate g = sigma_invariant(x, j, budget.n_samples, rng.substream(100 + j), budget.threads);
        if (g.flagged) throw std::runtime_error("verify_local_identities: sigma_" + std::to_string(j) + " unstable");
        slot = g.estimate;
      }
    }
    return *slot;
  };
  std::vector<std::optional<Estimate>> lloc(static_cast<std::size_t>(n) + 1);
  auto lloc_at = [&](int j) -> Estimate {
    auto& slot = lloc[static_cast<std::size_t>(j)];
    if (!slot) {
      const GermEstimate g = local_polar_length(x, j, budget.n_planes, rng.substream(200 + j), budget.threads);
      if (g.flagged) throw std::runtime_error("verify_local_identities: L_loc_" + std::to_string(j) + " unstable");
      slot = g.estimate;
    }
    return *slot;
  };

  LocalReport rep;
  for (int k : ks) {
    if (k < 0 || k > n) throw std::domain_error("verify_local_identities: k out of range");
    const Estimate sd = difference(sigma_at(k), sigma_at(k + 1));
    const Estimate ll = lloc_at(k);
    const LocalLambdaResult lam = local_lambda(x, k, rng.substream(300 + k), {1.0, 0.5, 0.25}, budget.n_dirs);
    const double m = budget.tolerance;
    rep.ks.push_back(k);
    rep.sigma_diff.push_back(sd);
    rep.l_loc.push_back(ll);
    rep.lambda_loc.push_back(lam.estimate);
    rep.row_pass.push_back(!lam.flagged && agrees(sd, ll, m) && agrees(ll, lam.estimate, m) &&
                           agrees(sd, lam.estimate, m));
  }
  LocalRow top{"sigma_top", n, sigma_at(n), lloc_at(n)};
  top.pass = agrees(top.a, top.b, budget.tolerance);
  rep.extra.push_back(top);
  LocalRow refined{"refined", 0, lloc_at(0), difference(Estimate::exact(1.0), sigma_at(1))};
  refined.pass = agrees(refined.a, refined.b, budget.tolerance);
  rep.extra.push_back(refined);
  return rep;
}

namespace germcatalog {

ConeGerm rays(int m) {
  if (m < 1) throw std::invalid_argument("rays: need at least one ray");
  std::vector<Vec> verts;
  std::vector<Cell> cells;
  for (int j = 0; j < m; ++j) {
    const double a = 2.0 * kPi * j / m;
    verts.push_back((Vec(2) << std::cos(a), std::sin(a)).finished());
    cells.push_back({j});
  }
  return ConeGerm::from_link(StratifiedComplex(2, std::move(verts), std::move(cells)), "rays:" + std::to_string(m));
}

ConeGerm halfplane(int n) {
  if (n < 2) throw std::invalid_argument("halfplane: need n >= 2");
  Vec e1 = Vec::Zero(n), e2 = Vec::Zero(n);
  e1[0] = 1.0;
  e2[1] = 1.0;
  return ConeGerm::from_link(StratifiedComplex::from_simplices(n, {e2, e1, Vec(-e2)}, {{0, 1}, {1, 2}}),
                             "halfplane:" + std::to_string(n));
}

ConeGerm cone_circle(double theta) { return ConeGerm::round_cone(theta); }

ConeGerm cone_link(const std::string& path) {
  const StratifiedComplex raw = read_plstrat_file(path);
  std::vector<Vec> verts;
  for (const Vec& v : raw.vertices()) {
    if (v.norm() == 0.0) throw std::invalid_argument("cone_link: link vertex at the origin");
    verts.push_back(v.normalized());
  }
  std::vector<Cell> cells;
  for (std::size_t c = 0; c < raw.cell_count(); ++c) cells.push_back(raw.cell(c));
  return ConeGerm::from_link(StratifiedComplex(raw.ambient_dim(), std::move(verts), std::move(cells)),
                             "cone-link:" + path);
}

ConeGerm flat(int k, int n) {
  if (k < 1 || k > n) throw std::invalid_argument("flat: need 1 <= k <= n");
  std::vector<Vec> verts;
  for (int i = 0; i < k; ++i)
    for (double s : {1.0, -1.0}) {
      Vec v = Vec::Zero(n);
      v[i] = s;
      verts.push_back(v);
    }
  std::vector<Cell> simplices;
  for (unsigned pattern = 0; pattern < (1u << k); ++pattern) {
    Cell c;
    for (int i = 0; i < k; ++i) c.push_back(2 * i + ((pattern >> i) & 1u ? 1 : 0));
    simplices.push_back(std::move(c));
  }
  return ConeGerm::from_link(StratifiedComplex::from_simplices(n, std::move(verts), simplices),
                             "flat:" + std::to_string(k) + ":" + std::to_string(n));
}

}  // namespace germcatalog

}  // namespace lkpolar
