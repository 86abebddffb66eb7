#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <type_traits>
#include <vector>

namespace lkpolar {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// s_k: volume of the unit k-sphere in R^{k+1}
double sphere_volume(int k);
// b_k: volume of the unit k-ball
double ball_volume(int k);
// Gamma((k+1)/2) Gamma((n-k+1)/2) / (Gamma(1/2) Gamma((n+1)/2))
double beta_coeff(int n, int k);

double binomial(int n, int k);

// Orthonormal frame of a k-dimensional linear subspace of R^n.
class LinearSubspace {
 public:
  LinearSubspace() = default;
  // basis columns must be orthonormal within 1e-10
  LinearSubspace(int ambient_dim, Mat basis);

  // span of the columns, orthonormalized; columns with relative norm below
  // rank_tol after pivoting are dropped
  static LinearSubspace span_of(const Mat& vectors, double rank_tol = 1e-12);
  static LinearSubspace full(int n);
  static LinearSubspace zero(int n);

  int ambient_dim() const { return n_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }

  Mat projector() const { return basis_ * basis_.transpose(); }
  LinearSubspace complement() const;
  Vec project(const Vec& x) const { return basis_ * (basis_.transpose() * x); }
  Vec coordinates(const Vec& x) const { return basis_.transpose() * x; }
  LinearSubspace transformed(const Mat& rotation) const;

 private:
  int n_ = 0;
  Mat basis_;
};

// cosines of the principal angles between two subspaces, descending
std::vector<double> principal_cosines(const LinearSubspace& a, const LinearSubspace& b);
// number of principal cosines above 1 - tol
int intersection_dim(const LinearSubspace& a, const LinearSubspace& b, double tol = 1e-8);

struct AffineFlat {
  LinearSubspace direction;
  Vec offset;  // orthogonal to direction

  AffineFlat() = default;
  AffineFlat(LinearSubspace dir, Vec off);
  int dim() const { return direction.dim(); }
  int ambient_dim() const { return direction.ambient_dim(); }
  double distance_to(const Vec& x) const;
};

// Seeded stream. Sample sequences depend only on (master_seed, stream_id).
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t master_seed, std::uint64_t stream_id = 0);

  RandomSource substream(std::uint64_t index) const;
  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;

  static Estimate exact(double v, std::uint64_t seed = 0) { return {v, 0.0, 1, seed}; }
};

// mean and sample-sd/sqrt(n), compensated accumulation in index order
Estimate estimate_from_samples(std::span<const double> xs, std::uint64_t seed);
// sum of independent estimates, errors in quadrature
Estimate operator+(const Estimate& a, const Estimate& b);
Estimate operator-(const Estimate& a, const Estimate& b);
Estimate operator*(double c, const Estimate& a);
double combined_error(const Estimate& a, const Estimate& b);

class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_total(std::span<const double> xs);

// uniform unit vector in R^dim
Vec sample_unit_sphere(int dim, RandomSource& rng);
Vec sample_gaussian(int dim, RandomSource& rng);
LinearSubspace sample_grassmannian(int n, int k, RandomSource& rng);
Mat sample_rotation(int n, RandomSource& rng);

struct WeightedFlat {
  AffineFlat flat;
  double weight = 0.0;
};
// direction uniform on G_n^k, offset uniform in the (n-k)-ball of the given
// radius around center; weight = b_{n-k} radius^{n-k}
WeightedFlat sample_affine_flat_hitting_ball(int n, int k, double radius, RandomSource& rng,
                                             const Vec& center = Vec());

// (k+1) points as columns; k-dimensional volume by Gram determinant
double simplex_volume(const Mat& points);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
// Gauss-Legendre on [-1, 1]
QuadratureRule gauss_legendre(int m);

// Runs f(i) for i in [0, n) on up to `threads` workers with static blocks.
// Results are stored by index so the outcome does not depend on scheduling.
template <class F>
auto parallel_map(std::size_t n, int threads, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<R> out(n);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = n * w / workers;
      const std::size_t hi = n * (w + 1) / workers;
      try {
        for (std::size_t i = lo; i < hi; ++i) out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace lkpolar
