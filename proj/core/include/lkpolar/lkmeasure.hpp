#pragma once

#include "lkpolar/geomkit.hpp"
#include "lkpolar/plstrata.hpp"
#include "lkpolar/smoothshape.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lkpolar {

// {x : <normal, x> < offset}
struct HalfSpace {
  Vec normal;
  double offset = 0.0;
};

struct Region {
  std::optional<HalfSpace> half_space;

  bool everything() const { return !half_space.has_value(); }
  bool contains(const Vec& x) const { return !half_space || half_space->normal.dot(x) < half_space->offset; }
  // signed distance to the boundary hyperplane, +inf for the whole space
  double clearance(const Vec& x) const;
  Region transformed(double scale, const Mat& rotation, const Vec& translation) const;
};

class Shape {
 public:
  Shape(StratifiedComplex k, std::string id = "", Region u = {});
  Shape(SmoothShape s, std::string id = "", Region u = {});

  bool is_pl() const { return std::holds_alternative<StratifiedComplex>(body_); }
  const StratifiedComplex& complex() const { return std::get<StratifiedComplex>(body_); }
  const SmoothShape& smooth() const { return std::get<SmoothShape>(body_); }
  const Region& region() const { return region_; }
  const std::string& id() const { return id_; }

  Shape with_region(Region u) const;
  Shape transformed(double scale, const Mat& rotation, const Vec& translation) const;

  int ambient_dim() const;
  int dim() const;
  Vec bound_center() const;
  double bound_radius() const;
  double diameter() const { return 2.0 * bound_radius(); }

 private:
  std::variant<StratifiedComplex, SmoothShape> body_;
  std::string id_;
  Region region_;
};

struct EstimatorOptions {
  std::int64_t n_samples = 2000;
  int threads = 1;
  int max_retries = 50;
};

// PL: index is a cell; smooth: index is a stratum and chart_point a chart coordinate
struct StratumRef {
  std::size_t index = 0;
  Vec chart_point;
};

// lambda_k of a smooth stratum at a chart point, normal-sphere rule
double smooth_lambda(const SmoothStratum& s, const Vec& u, int n, int k);
// lambda_{dim} of a PL cell of codimension <= 2, by exact enumeration of the normal circle
double pl_lambda_exact(const StratifiedComplex& k, std::size_t cell);

Estimate lambda_density(const Shape& x, const StratumRef& s, int k, const RandomSource& rng,
                        std::int64_t n_dirs = 10000);

// k-volume of a cell clipped to the region
double cell_volume_in(const StratifiedComplex& k, std::size_t cell, const Region& u);

struct LkResult {
  Estimate estimate;
  std::string method;
  std::int64_t resampled = 0;
};

LkResult lk_measure(const Shape& x, int k, const RandomSource& rng, const EstimatorOptions& opts = {});
std::vector<LkResult> lk_vector(const Shape& x, const RandomSource& rng, const EstimatorOptions& opts = {});

// sum over x in U of ind(v*, X, x); throws DegenerateDirection for a non-generic v
int morse_count(const Shape& x, const Vec& v);

struct ExchangeResult {
  Estimate estimate;
  std::int64_t resampled = 0;
  std::int64_t dropped = 0;
};
ExchangeResult exchange_lambda0(const Shape& x, const RandomSource& rng, const EstimatorOptions& opts = {});

// Euler characteristic of X cut by a generic affine flat
int slice_euler(const Shape& x, const AffineFlat& e);

struct KinematicResult {
  Estimate numerator;    // integral of chi(X ∩ E) over flats of dimension k
  Estimate denominator;  // Lambda_{n-k}(X)
  Estimate ratio;
  double reference = 0.0;  // b_k b_{n-k} / (C(n,k) b_n)
  bool division_flagged = false;
};
KinematicResult kinematic_check(const Shape& x, int k, const RandomSource& rng, const EstimatorOptions& opts = {});

double point_simplex_distance(const Mat& simplex, const Vec& p);
double distance_to_shape(const Shape& x, const Vec& p);

struct SteinerFit {
  std::vector<double> epsilons;
  std::vector<Estimate> volumes;
  std::vector<Estimate> coefficients;  // c_k multiplies eps^{n-k}
  double condition = 0.0;
};
// jittered-grid volumes of the eps-dilations, least-squares Steiner polynomial
SteinerFit steiner_oracle(const Shape& x, const std::vector<double>& epsilons, std::int64_t n_mc,
                          const RandomSource& rng, int threads = 1);

}  // namespace lkpolar
