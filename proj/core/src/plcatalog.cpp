#include "lkpolar/plstrata.hpp"

#include <algorithm>
#include <array>

namespace lkpolar::plcatalog {

namespace {

Vec v2(double x, double y) { return (Vec(2) << x, y).finished(); }
Vec v3(double x, double y, double z) { return (Vec(3) << x, y, z).finished(); }

std::vector<Vec> cube_corners() {
  std::vector<Vec> v;
  for (int i = 0; i < 8; ++i) v.push_back(v3(i & 1, (i >> 1) & 1, (i >> 2) & 1));
  return v;
}

}  // namespace

StratifiedComplex segment() { return StratifiedComplex::from_simplices(2, {v2(0, 0), v2(1, 0)}, {{0, 1}}); }

StratifiedComplex square_boundary() {
  return StratifiedComplex::from_simplices(2, {v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)},
                                           {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
}

StratifiedComplex cube_boundary() {
  std::vector<Cell> tris;
  for (int axis = 0; axis < 3; ++axis) {
    const int a = 1 << ((axis + 1) % 3);
    const int b = 1 << ((axis + 2) % 3);
    for (int side = 0; side < 2; ++side) {
      const int o = side ? (1 << axis) : 0;
      tris.push_back({o, o + a, o + a + b});
      tris.push_back({o, o + b, o + a + b});
    }
  }
  return StratifiedComplex::from_simplices(3, cube_corners(), tris);
}

StratifiedComplex solid_cube() {
  std::array<int, 3> perm{0, 1, 2};
  std::vector<Cell> tets;
  do {
    int at = 0;
    Cell t{0};
    for (int axis : perm) {
      at |= 1 << axis;
      t.push_back(at);
    }
    tets.push_back(t);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return StratifiedComplex::from_simplices(3, cube_corners(), tets);
}

StratifiedComplex octahedron_boundary() {
  std::vector<Vec> v;
  for (int axis = 0; axis < 3; ++axis)
    for (double s : {1.0, -1.0}) {
      Vec p = Vec::Zero(3);
      p[axis] = s;
      v.push_back(p);
    }
  std::vector<Cell> tris;
  for (int x : {0, 1})
    for (int y : {2, 3})
      for (int z : {4, 5}) tris.push_back({x, y, z});
  return StratifiedComplex::from_simplices(3, std::move(v), tris);
}

StratifiedComplex seven_vertex_torus() {
  std::vector<Vec> v{v3(18, -3, 8),  v3(-14, -7, 8), v3(5, 3, 2),     v3(-10, 7, 5),
                     v3(5, 12, -13), v3(-11, 25, 13), v3(-13, -13, -14)};
  std::vector<Cell> tris;
  for (int i = 0; i < 7; ++i) {
    tris.push_back({i, (i + 1) % 7, (i + 3) % 7});
    tris.push_back({i, (i + 2) % 7, (i + 3) % 7});
  }
  return StratifiedComplex::from_simplices(3, std::move(v), tris);
}

}  // namespace lkpolar::plcatalog
