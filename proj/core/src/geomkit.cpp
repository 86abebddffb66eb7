#include "lkpolar/geomkit.hpp"

#include <cmath>
#include <numbers>

namespace lkpolar {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double sphere_volume(int k) {
  if (k < 0) throw std::domain_error("sphere_volume: negative dimension");
  const double a = 0.5 * (k + 1);
  return 2.0 * std::exp(a * std::log(std::numbers::pi) - std::lgamma(a));
}

double ball_volume(int k) {
  if (k < 0) throw std::domain_error("ball_volume: negative dimension");
  const double a = 0.5 * k;
  return std::exp(a * std::log(std::numbers::pi) - std::lgamma(a + 1.0));
}

double beta_coeff(int n, int k) {
  if (k < 0 || n < 0 || k > n) throw std::domain_error("beta_coeff: need 0 <= k <= n");
  const double lg = std::lgamma(0.5 * (k + 1)) + std::lgamma(0.5 * (n - k + 1)) - std::lgamma(0.5) -
                    std::lgamma(0.5 * (n + 1));
  return std::exp(lg);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

LinearSubspace::LinearSubspace(int ambient_dim, Mat basis) : n_(ambient_dim), basis_(std::move(basis)) {
  if (basis_.rows() != n_ && !(basis_.cols() == 0))
    throw std::invalid_argument("LinearSubspace: basis rows must equal ambient dimension");
  if (basis_.cols() == 0) basis_.resize(n_, 0);
  if (basis_.cols() > n_) throw std::invalid_argument("LinearSubspace: dim exceeds ambient dimension");
  const Mat gram = basis_.transpose() * basis_;
  const Mat id = Mat::Identity(basis_.cols(), basis_.cols());
  if (basis_.cols() > 0 && (gram - id).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("LinearSubspace: basis not orthonormal");
}

LinearSubspace LinearSubspace::span_of(const Mat& vectors, double rank_tol) {
  const int n = static_cast<int>(vectors.rows());
  if (vectors.cols() == 0) return zero(n);
  Eigen::ColPivHouseholderQR<Mat> qr(vectors);
  const double scale = std::max(1e-300, vectors.cwiseAbs().maxCoeff());
  qr.setThreshold(rank_tol * std::max<double>(1.0, static_cast<double>(vectors.cols())));
  int rank = 0;
  const Mat r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (int i = 0; i < std::min<int>(r.rows(), r.cols()); ++i)
    if (std::abs(r(i, i)) > rank_tol * scale) ++rank;
  const Mat q = qr.householderQ() * Mat::Identity(n, rank);
  return LinearSubspace(n, q);
}

LinearSubspace LinearSubspace::full(int n) { return LinearSubspace(n, Mat::Identity(n, n)); }

LinearSubspace LinearSubspace::zero(int n) { return LinearSubspace(n, Mat(n, 0)); }

LinearSubspace LinearSubspace::complement() const {
  const int k = dim();
  if (k == 0) return full(n_);
  if (k == n_) return zero(n_);
  Eigen::HouseholderQR<Mat> qr(basis_);
  const Mat q = qr.householderQ() * Mat::Identity(n_, n_);
  return LinearSubspace(n_, q.rightCols(n_ - k));
}

LinearSubspace LinearSubspace::transformed(const Mat& rotation) const {
  return LinearSubspace(n_, rotation * basis_);
}

std::vector<double> principal_cosines(const LinearSubspace& a, const LinearSubspace& b) {
  if (a.dim() == 0 || b.dim() == 0) return {};
  const Mat m = a.basis().transpose() * b.basis();
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec s = svd.singularValues();
  return std::vector<double>(s.data(), s.data() + s.size());
}

int intersection_dim(const LinearSubspace& a, const LinearSubspace& b, double tol) {
  int count = 0;
  for (double c : principal_cosines(a, b))
    if (c > 1.0 - tol) ++count;
  return count;
}

AffineFlat::AffineFlat(LinearSubspace dir, Vec off) : direction(std::move(dir)), offset(std::move(off)) {
  if (offset.size() != direction.ambient_dim()) throw std::invalid_argument("AffineFlat: offset size");
  if (direction.dim() > 0 && (direction.basis().transpose() * offset).cwiseAbs().maxCoeff() >
                                 1e-10 * std::max(1.0, offset.norm()))
    throw std::invalid_argument("AffineFlat: offset not orthogonal to direction");
}

double AffineFlat::distance_to(const Vec& x) const {
  const Vec d = x - offset;
  return (d - direction.project(d)).norm();
}

RandomSource::RandomSource(std::uint64_t master_seed, std::uint64_t stream_id)
    : seed_(master_seed), stream_(stream_id), engine_(mix64(master_seed ^ mix64(stream_id))) {}

RandomSource RandomSource::substream(std::uint64_t index) const {
  return RandomSource(seed_, mix64(stream_ + 0x632be59bd9b4e019ULL * (index + 1)));
}

double RandomSource::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method; only sqrt/log, both platform-stable
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

double compensated_total(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

Estimate estimate_from_samples(std::span<const double> xs, std::uint64_t seed) {
  Estimate e;
  e.seed = seed;
  e.n_samples = static_cast<std::int64_t>(xs.size());
  if (xs.empty()) return e;
  const double n = static_cast<double>(xs.size());
  e.value = compensated_total(xs) / n;
  if (xs.size() < 2) return e;
  CompensatedSum ss;
  for (double x : xs) ss.add((x - e.value) * (x - e.value));
  e.std_error = std::sqrt(ss.value() / (n - 1.0)) / std::sqrt(n);
  return e;
}

Estimate operator+(const Estimate& a, const Estimate& b) {
  return {a.value + b.value, std::hypot(a.std_error, b.std_error), std::max(a.n_samples, b.n_samples),
          a.seed};
}

Estimate operator-(const Estimate& a, const Estimate& b) {
  return {a.value - b.value, std::hypot(a.std_error, b.std_error), std::max(a.n_samples, b.n_samples),
          a.seed};
}

Estimate operator*(double c, const Estimate& a) {
  return {c * a.value, std::abs(c) * a.std_error, a.n_samples, a.seed};
}

double combined_error(const Estimate& a, const Estimate& b) { return std::hypot(a.std_error, b.std_error); }

Vec sample_gaussian(int dim, RandomSource& rng) {
  Vec g(dim);
  for (int i = 0; i < dim; ++i) g[i] = rng.normal();
  return g;
}

Vec sample_unit_sphere(int dim, RandomSource& rng) {
  if (dim < 1) throw std::domain_error("sample_unit_sphere: dim must be >= 1");
  for (;;) {
    Vec g = sample_gaussian(dim, rng);
    const double r = g.norm();
    if (r > 1e-150) return g / r;
  }
}

LinearSubspace sample_grassmannian(int n, int k, RandomSource& rng) {
  if (k < 0 || k > n) throw std::domain_error("sample_grassmannian: need 0 <= k <= n");
  if (k == 0) return LinearSubspace::zero(n);
  if (k == n) return LinearSubspace::full(n);
  for (;;) {
    Mat g(n, k);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
    // two-pass modified Gram-Schmidt
    bool ok = true;
    for (int j = 0; j < k && ok; ++j) {
      for (int i = 0; i < j; ++i) g.col(j) -= g.col(i).dot(g.col(j)) * g.col(i);
      for (int i = 0; i < j; ++i) g.col(j) -= g.col(i).dot(g.col(j)) * g.col(i);
      const double r = g.col(j).norm();
      if (r < 1e-8) ok = false;
      else g.col(j) /= r;
    }
    if (ok) return LinearSubspace(n, g);
  }
}

Mat sample_rotation(int n, RandomSource& rng) {
  Mat q = sample_grassmannian(n, n - 1, rng).basis();
  Mat full(n, n);
  full.leftCols(n - 1) = q;
  full.col(n - 1) = LinearSubspace(n, q).complement().basis().col(0);
  if (full.determinant() < 0) full.col(n - 1) *= -1.0;
  return full;
}

WeightedFlat sample_affine_flat_hitting_ball(int n, int k, double radius, RandomSource& rng, const Vec& center) {
  if (radius <= 0) throw std::domain_error("sample_affine_flat_hitting_ball: radius must be positive");
  if (k < 0 || k >= n) throw std::domain_error("sample_affine_flat_hitting_ball: need 0 <= k < n");
  const LinearSubspace dir = sample_grassmannian(n, k, rng);
  const LinearSubspace perp = dir.complement();
  const int m = n - k;
  const Vec u = sample_unit_sphere(m, rng);
  const double r = radius * std::pow(rng.uniform(), 1.0 / m);
  Vec offset = perp.basis() * (r * u);
  if (center.size() == n) offset += center - dir.project(center);
  return {AffineFlat(dir, offset), ball_volume(m) * std::pow(radius, m)};
}

double simplex_volume(const Mat& points) {
  const int k = static_cast<int>(points.cols()) - 1;
  if (k <= 0) return 1.0;
  Mat e(points.rows(), k);
  for (int i = 0; i < k; ++i) e.col(i) = points.col(i + 1) - points.col(0);
  const double g = (e.transpose() * e).determinant();
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return std::sqrt(std::max(0.0, g)) / fact;
}

QuadratureRule gauss_legendre(int m) {
  QuadratureRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= m; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[m - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[m - 1 - i] = w;
  }
  return rule;
}

}  // namespace lkpolar
