#pragma once

#include "lkpolar/smoothshape.hpp"

#include <string>
#include <vector>

namespace lkpolar {

struct CriticalPoint {
  Vec u;
  Vec x;
  int morse_index = 0;  // negative eigenvalues of the hessian of the height
  double min_abs_eigenvalue = 0.0;
};

struct CriticalSearch {
  std::vector<CriticalPoint> points;
  bool degenerate = false;
  std::string reason;
  double clearance = 0.0;  // smallest distance between distinct critical values, relative to diam
};

struct CriticalSearchOptions {
  int starts_per_axis = 0;  // seed grid per axis; 0: 128 for curves, 32 for surfaces
  double diameter = 1.0;
  double collapsed_clearance = 1e-2;
  double cluster_tol = 1e-4;
  double hessian_tol = 1e-6;
};

// critical points of x -> <v, x> on the open stratum by multistart Newton in the chart
CriticalSearch height_critical_points(const SmoothStratum& s, const Vec& v, const CriticalSearchOptions& opts);

// unit normal of a 2-dimensional stratum in R^3
Vec surface_normal(const ChartJet& jet);

// normals of a surface stratum sampled on a fixed chart grid; reused across planes
struct SilhouetteCache {
  const SmoothStratum* stratum = nullptr;
  std::vector<std::vector<double>> axis_nodes;  // two axes
  std::vector<Vec> normals;                     // row-major over (i, j)
  bool wrap[2] = {false, false};

  static SilhouetteCache build(const SmoothStratum& s, int nodes = 256);
  const Vec& normal(std::size_t i, std::size_t j) const { return normals[i * axis_nodes[1].size() + j]; }
};

struct Polyline {
  std::vector<Vec> u;  // chart points
  std::vector<Vec> x;  // points on the stratum
  bool closed = false;
};

struct SilhouetteTrace {
  std::vector<Polyline> curves;
  bool degenerate = false;
  std::string reason;
  double fold_clearance = 1.0;  // min |<t, N x w>| over traced points away from isolated cusps
  double gradient_clearance = 1.0;  // min |grad g| relative to its typical size
};

// zero set of g(u) = <N(u), w>, the polar curve of the projection along w
SilhouetteTrace trace_silhouette(const SilhouetteCache& cache, const Vec& w);

// inserts projected midpoints until the chord sagitta is below tol
void refine_polyline(const SmoothStratum& s, const Vec& w, Polyline& line, double tol);

// Newton projection of a chart point onto g = 0 along grad g
Vec project_to_silhouette(const SmoothStratum& s, const Vec& w, const Vec& u0);

}  // namespace lkpolar
