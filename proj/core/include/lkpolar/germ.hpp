#pragma once

#include "lkpolar/lkmeasure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lkpolar {

// Germ at 0 of a cone: a PL link on the unit sphere or the round cone over a
// circle of spherical radius theta around e_3 in R^3.
class ConeGerm {
 public:
  static ConeGerm from_link(StratifiedComplex link, std::string id = "");
  static ConeGerm round_cone(double theta);

  const std::string& id() const { return id_; }
  int ambient_dim() const { return n_; }
  int dim() const;
  bool is_round() const { return theta_.has_value(); }
  double theta() const { return *theta_; }

  const StratifiedComplex& link() const { return link_; }
  // cone over the link with far vertices at `reach`; vertex 0 is the apex and
  // every far cell lies outside the unit ball
  const StratifiedComplex& truncated() const { return cone_; }
  std::size_t apex_cell() const { return cone_.vertex_cell(0); }
  // cells of the truncated cone that contain the apex, by dimension
  std::vector<std::size_t> cone_cells(int k) const;
  // unit directions of the link vertices of a cone cell
  Mat directions(std::size_t cone_cell) const;

 private:
  ConeGerm() = default;

  std::string id_;
  int n_ = 0;
  std::optional<double> theta_;
  StratifiedComplex link_;
  StratifiedComplex cone_;
};

// spherical (k-1)-volume of the cone spanned by k unit columns, k <= 3
double cone_solid_angle(const Mat& directions);

// Theta_k: k-volume of the pure k-dimensional part in the unit ball over b_k
double density(const ConeGerm& x, int k);

struct GermEstimate {
  Estimate estimate;
  std::int64_t resampled = 0;
  bool flagged = false;
};

// Grassmannian average of chi of the germ cut by a flat H + delta v
GermEstimate sigma_invariant(const ConeGerm& x, int k, std::int64_t n_samples, const RandomSource& rng,
                             int threads = 1);

struct LocalLambdaResult {
  Estimate estimate;  // extrapolated
  std::vector<double> epsilons;
  std::vector<Estimate> ladder;
  bool flagged = false;
};
LocalLambdaResult local_lambda(const ConeGerm& x, int k, const RandomSource& rng,
                               std::vector<double> eps_ladder = {1.0, 0.5, 0.25}, std::int64_t n_dirs = 20000);

GermEstimate local_polar_length(const ConeGerm& x, int k, std::int64_t n_planes, const RandomSource& rng,
                                int threads = 1);

struct LocalRow {
  std::string name;  // sigma_diff, L_loc, lambda_loc, sigma_top, refined
  int k = 0;
  Estimate a;  // left side
  Estimate b;  // right side
  double reference = 0.0;
  bool has_reference = false;
  bool pass = false;
};

struct LocalBudget {
  std::int64_t n_samples = 5000;
  std::int64_t n_planes = 2000;
  std::int64_t n_dirs = 20000;
  int threads = 1;
  double tolerance = 3.0;
};

struct LocalReport {
  std::vector<int> ks;
  std::vector<Estimate> sigma_diff, l_loc, lambda_loc;
  std::vector<bool> row_pass;
  std::vector<LocalRow> extra;  // sigma_n = L_n and the refined statement at the apex
  bool all_pass() const;
};

LocalReport verify_local_identities(const ConeGerm& x, const RandomSource& rng, const LocalBudget& budget = {},
                                    std::vector<int> ks = {});

// |a - b| <= m sqrt(se_a^2 + se_b^2), with a floor for exact values
bool agrees(const Estimate& a, const Estimate& b, double multiplier);
bool agrees(const Estimate& a, double b, double multiplier);

namespace germcatalog {

ConeGerm rays(int m);                 // m equally spaced half-lines in R^2
ConeGerm halfplane(int n);            // closed half-plane with 0 on its edge, in R^n
ConeGerm cone_circle(double theta);   // round cone in R^3
ConeGerm cone_link(const std::string& path);
ConeGerm flat(int k, int n);          // R^k in R^n

}  // namespace germcatalog

}  // namespace lkpolar
