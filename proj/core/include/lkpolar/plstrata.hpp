#pragma once

#include "lkpolar/geomkit.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lkpolar {

using Cell = std::vector<int>;  // sorted vertex indices

class DegenerateDirection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Embedded simplicial complex; every open cell is one stratum.
class StratifiedComplex {
 public:
  StratifiedComplex() = default;
  // cells must be closed under faces
  StratifiedComplex(int ambient_dim, std::vector<Vec> vertices, std::vector<Cell> cells);
  // adds all faces of the given simplices
  static StratifiedComplex from_simplices(int ambient_dim, std::vector<Vec> vertices,
                                          const std::vector<Cell>& simplices);

  int ambient_dim() const { return n_; }
  int dim() const { return dim_; }
  const std::vector<Vec>& vertices() const { return vertices_; }
  std::size_t cell_count() const { return cells_.size(); }
  const Cell& cell(std::size_t i) const { return cells_[i]; }
  int cell_dim(std::size_t i) const { return static_cast<int>(cells_[i].size()) - 1; }

  std::optional<std::size_t> find(const Cell& c) const;
  std::size_t index_of(const Cell& c) const;  // throws std::out_of_range
  std::size_t vertex_cell(int v) const { return vertex_cells_[v]; }

  const std::vector<std::size_t>& cofaces(std::size_t i) const { return cofaces_[i]; }
  std::vector<std::size_t> cells_of_dim(int d) const;
  bool is_maximal(std::size_t i) const { return cofaces_[i].empty(); }

  Mat cell_points(std::size_t i) const;
  Vec barycenter(std::size_t i) const;
  double cell_volume(std::size_t i) const;
  LinearSubspace tangent_space(std::size_t i) const;

  // sum over cofaces tau of rho of (-1)^(dim tau - dim rho); chi of a slice is
  // the sum of these over closed cells the slice meets
  const std::vector<int>& mobius_weights() const { return mobius_; }

  double diameter() const;
  StratifiedComplex transformed(double scale, const Mat& rotation, const Vec& translation) const;

 private:
  void build();

  int n_ = 0;
  int dim_ = -1;
  std::vector<Vec> vertices_;
  std::vector<Cell> cells_;
  std::map<Cell, std::size_t> index_;
  std::vector<std::size_t> vertex_cells_;
  std::vector<std::vector<std::size_t>> cofaces_;
  std::vector<int> mobius_;
};

int euler_characteristic(const StratifiedComplex& k);

struct NormalLink {
  std::size_t base_cell = 0;
  LinearSubspace normal_space;
  std::vector<Vec> directions;  // unit, inside normal_space
  std::vector<Cell> link_cells;  // indices into directions, closed under faces

  int euler_characteristic() const;
};

NormalLink normal_link(const StratifiedComplex& k, std::size_t cell);

// 1 - chi of the part of the link strictly below v; throws DegenerateDirection
// when some direction is within angle_tol of the wall <v, .> = 0
int normal_morse_index(const NormalLink& link, const Vec& v, double angle_tol = 1e-8);
int normal_morse_index(const StratifiedComplex& k, std::size_t cell, const Vec& v, double angle_tol = 1e-8);

// vertex -> index; vertices with index 0 omitted
std::map<int, int> pl_morse_indices(const StratifiedComplex& k, const Vec& v, double tol = 1e-10);

StratifiedComplex read_plstrat(std::istream& in);
StratifiedComplex read_plstrat_file(const std::string& path);
void write_plstrat(std::ostream& out, const StratifiedComplex& k);

namespace plcatalog {

StratifiedComplex segment();          // unit segment in R^2
StratifiedComplex square_boundary();  // unit square boundary in R^2
StratifiedComplex cube_boundary();    // triangulated boundary of [0,1]^3
StratifiedComplex solid_cube();       // six-simplex triangulation of [0,1]^3
StratifiedComplex octahedron_boundary();
StratifiedComplex seven_vertex_torus();  // embedded, Csaszar-type coordinates

}  // namespace plcatalog

}  // namespace lkpolar
