#pragma once

#include "lkpolar/contour.hpp"
#include "lkpolar/lkmeasure.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lkpolar {

enum class AlphaMode { closed_form, slice_chi };

enum class PieceKind { point, polyline, simplex, sheet };

// One connected part of the polar set of a stratum for a fixed P.
struct PolarPiece {
  std::size_t stratum = 0;  // cell index for PL shapes
  PieceKind kind = PieceKind::point;
  Mat geometry;              // P-coordinates, one column per point or vertex
  std::vector<Vec> sources;  // points on the stratum
  std::vector<Vec> chart;    // chart points for smooth strata
  bool closed = false;
  int morse_index = 0;  // q = 0 smooth pieces
  double alpha = 0.0;
};

struct DegeneracyFlag {
  std::string kind;  // fold, double point, adjacency, singular discriminant, pl dimension, index wall, critical search
  std::string detail;
  double value = 0.0;  // offending distance or angle
};

struct DegeneracyReport {
  std::vector<DegeneracyFlag> flags;

  bool empty() const { return flags.empty(); }
  void add(std::string kind, std::string detail, double value = 0.0);
  void merge(const DegeneracyReport& other);
  std::string summary() const;
};

struct PolarOptions {
  AlphaMode alpha_mode = AlphaMode::closed_form;
  int silhouette_nodes = 256;
  double polyline_tol = 1e-6;  // relative to the diameter
  double clearance = 1e-4;
  double pl_rank_tol = 1e-8;
};

// Shape plus per-stratum data that does not depend on P.
class PolarContext {
 public:
  explicit PolarContext(Shape x, PolarOptions opts = {});
  PolarContext(const PolarContext&) = delete;
  PolarContext& operator=(const PolarContext&) = delete;

  const Shape& shape() const { return shape_; }
  const PolarOptions& options() const { return opts_; }
  std::size_t stratum_count() const;
  int stratum_dim(std::size_t s) const;
  const SilhouetteCache* silhouette(std::size_t s) const;

 private:
  Shape shape_;
  PolarOptions opts_;
  std::vector<std::optional<SilhouetteCache>> silhouettes_;
};

struct PolarSample {
  LinearSubspace plane;
  std::vector<PolarPiece> pieces;  // empty when degenerate
  DegeneracyReport report;
  std::vector<double> m;  // per stratum
  double m_std_error = 0.0;

  bool degenerate() const { return !report.empty(); }
  double total() const;
};

// Critical locus of the projection of one stratum onto P; problems met while
// tracing go to `report`.
std::vector<PolarPiece> polar_variety(const PolarContext& ctx, std::size_t stratum, const LinearSubspace& plane,
                                      DegeneracyReport& report);

DegeneracyReport check_genericity(const PolarContext& ctx, const LinearSubspace& plane,
                                  const std::vector<PolarPiece>& pieces);

// half-integer weight of a polar piece; throws DegenerateDirection when the
// slice direction lies on a wall
double alpha_index(const PolarContext& ctx, const PolarPiece& piece, const LinearSubspace& plane);

// m_{S,q}(P, U) for one stratum from its pieces (alpha already set)
Estimate polar_image_integral(const PolarContext& ctx, std::size_t stratum, const LinearSubspace& plane,
                              const std::vector<PolarPiece>& pieces);

PolarSample polar_sample(const PolarContext& ctx, const LinearSubspace& plane);

// beta(1, n - q) / beta(q + 1, n) in the Grassmannian normalization; 1 at q = n
double polar_constant(int n, int q);

struct PlaneRecord {
  std::size_t index = 0;
  Mat plane;              // n x (q+1) basis
  std::vector<double> m;  // per stratum
  int retries = 0;
  std::vector<std::string> rejected;  // reasons for rejected planes, in order
};

struct PolarLengthOptions {
  std::int64_t n_planes = 1000;
  int threads = 1;
  int plane_retries = 20;
  PolarOptions polar;
};

struct PolarLengthResult {
  Estimate estimate;
  std::int64_t resampled = 0;
  std::map<std::string, std::int64_t> rejections;
  std::vector<PlaneRecord> planes;
};

class PolarQuotaExceeded : public std::runtime_error {
 public:
  PolarQuotaExceeded(const std::string& what, std::map<std::string, std::int64_t> histogram)
      : std::runtime_error(what), histogram(std::move(histogram)) {}
  std::map<std::string, std::int64_t> histogram;
};

PolarLengthResult polar_length(const Shape& x, int q, const RandomSource& rng, const PolarLengthOptions& opts = {});

// length or area of a subset of R^m (m = 2 or 3) given as (m-1)-simplices,
// columns are vertices; estimated by counting hits of random lines
Estimate crofton_volume(const std::vector<Mat>& simplices, int m, std::int64_t n_lines, const RandomSource& rng);

}  // namespace lkpolar
