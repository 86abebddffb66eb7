#include "lkpolar/plstrata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace lkpolar {

StratifiedComplex::StratifiedComplex(int ambient_dim, std::vector<Vec> vertices, std::vector<Cell> cells)
    : n_(ambient_dim), vertices_(std::move(vertices)), cells_(std::move(cells)) {
  build();
}

StratifiedComplex StratifiedComplex::from_simplices(int ambient_dim, std::vector<Vec> vertices,
                                                    const std::vector<Cell>& simplices) {
  std::map<Cell, int> seen;
  for (Cell s : simplices) {
    std::sort(s.begin(), s.end());
    const int m = static_cast<int>(s.size());
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
      Cell f;
      for (int j = 0; j < m; ++j)
        if (mask & (1u << j)) f.push_back(s[j]);
      seen.emplace(std::move(f), 0);
    }
  }
  std::vector<Cell> cells;
  cells.reserve(seen.size());
  for (auto& [c, _] : seen) cells.push_back(c);
  return StratifiedComplex(ambient_dim, std::move(vertices), std::move(cells));
}

void StratifiedComplex::build() {
  for (const Vec& v : vertices_)
    if (v.size() != n_) throw std::invalid_argument("StratifiedComplex: vertex dimension mismatch");
  for (Cell& c : cells_) {
    if (c.empty()) throw std::invalid_argument("StratifiedComplex: empty cell");
    std::sort(c.begin(), c.end());
    if (std::adjacent_find(c.begin(), c.end()) != c.end())
      throw std::invalid_argument("StratifiedComplex: repeated vertex in cell");
    for (int v : c)
      if (v < 0 || v >= static_cast<int>(vertices_.size()))
        throw std::invalid_argument("StratifiedComplex: vertex index out of range");
  }
  std::sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
  index_.clear();
  for (std::size_t i = 0; i < cells_.size(); ++i) index_.emplace(cells_[i], i);

  vertex_cells_.assign(vertices_.size(), std::numeric_limits<std::size_t>::max());
  dim_ = -1;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    dim_ = std::max(dim_, static_cast<int>(c.size()) - 1);
    if (c.size() == 1) vertex_cells_[c[0]] = i;
    if (c.size() > static_cast<std::size_t>(n_) + 1)
      throw std::invalid_argument("StratifiedComplex: simplex dimension exceeds ambient dimension");
    for (std::size_t drop = 0; c.size() > 1 && drop < c.size(); ++drop) {
      Cell f = c;
      f.erase(f.begin() + static_cast<std::ptrdiff_t>(drop));
      if (!index_.count(f)) throw std::invalid_argument("StratifiedComplex: not closed under faces");
    }
  }
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    if (vertex_cells_[v] == std::numeric_limits<std::size_t>::max())
      throw std::invalid_argument("StratifiedComplex: vertex without a 0-cell");

  const double scale = std::max(1e-300, diameter());
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const int d = cell_dim(i);
    if (d < 1) continue;
    Mat e(n_, d);
    for (int j = 0; j < d; ++j) e.col(j) = vertices_[cells_[i][j + 1]] - vertices_[cells_[i][0]];
    Eigen::JacobiSVD<Mat> svd(e);
    if (svd.singularValues()(d - 1) < 1e-10 * scale)
      throw std::invalid_argument("StratifiedComplex: affinely degenerate simplex");
  }

  cofaces_.assign(cells_.size(), {});
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    const int m = static_cast<int>(c.size());
    for (unsigned mask = 1; mask + 1 < (1u << m); ++mask) {
      Cell f;
      for (int j = 0; j < m; ++j)
        if (mask & (1u << j)) f.push_back(c[j]);
      cofaces_[index_.at(f)].push_back(i);
    }
  }
  mobius_.assign(cells_.size(), 1);
  for (std::size_t i = 0; i < cells_.size(); ++i)
    for (std::size_t t : cofaces_[i]) mobius_[i] += ((cell_dim(t) - cell_dim(i)) % 2 == 0) ? 1 : -1;
}

std::optional<std::size_t> StratifiedComplex::find(const Cell& c) const {
  Cell s = c;
  std::sort(s.begin(), s.end());
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t StratifiedComplex::index_of(const Cell& c) const {
  auto i = find(c);
  if (!i) throw std::out_of_range("StratifiedComplex: cell not in complex");
  return *i;
}

std::vector<std::size_t> StratifiedComplex::cells_of_dim(int d) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (cell_dim(i) == d) out.push_back(i);
  return out;
}

Mat StratifiedComplex::cell_points(std::size_t i) const {
  const Cell& c = cells_[i];
  Mat p(n_, static_cast<Eigen::Index>(c.size()));
  for (std::size_t j = 0; j < c.size(); ++j) p.col(static_cast<Eigen::Index>(j)) = vertices_[c[j]];
  return p;
}

Vec StratifiedComplex::barycenter(std::size_t i) const { return cell_points(i).rowwise().mean(); }

double StratifiedComplex::cell_volume(std::size_t i) const { return simplex_volume(cell_points(i)); }

LinearSubspace StratifiedComplex::tangent_space(std::size_t i) const {
  const int d = cell_dim(i);
  if (d == 0) return LinearSubspace::zero(n_);
  Mat e(n_, d);
  for (int j = 0; j < d; ++j) e.col(j) = vertices_[cells_[i][j + 1]] - vertices_[cells_[i][0]];
  return LinearSubspace::span_of(e, 1e-14);
}

double StratifiedComplex::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    for (std::size_t j = i + 1; j < vertices_.size(); ++j) d = std::max(d, (vertices_[i] - vertices_[j]).norm());
  return d;
}

StratifiedComplex StratifiedComplex::transformed(double scale, const Mat& rotation, const Vec& translation) const {
  std::vector<Vec> v;
  v.reserve(vertices_.size());
  for (const Vec& p : vertices_) v.push_back(scale * (rotation * p) + translation);
  return StratifiedComplex(n_, std::move(v), cells_);
}

int euler_characteristic(const StratifiedComplex& k) {
  int chi = 0;
  for (std::size_t i = 0; i < k.cell_count(); ++i) chi += (k.cell_dim(i) % 2 == 0) ? 1 : -1;
  return chi;
}

int NormalLink::euler_characteristic() const {
  int chi = 0;
  for (const Cell& c : link_cells) chi += (c.size() % 2 == 1) ? 1 : -1;
  return chi;
}

NormalLink normal_link(const StratifiedComplex& k, std::size_t cell) {
  if (cell >= k.cell_count()) throw std::out_of_range("normal_link: cell not in complex");
  NormalLink link;
  link.base_cell = cell;
  link.normal_space = k.tangent_space(cell).complement();
  const Cell& base = k.cell(cell);
  const Vec& anchor = k.vertices()[base[0]];
  std::map<int, int> slot;
  for (std::size_t t : k.cofaces(cell)) {
    Cell lc;
    for (int w : k.cell(t)) {
      if (std::binary_search(base.begin(), base.end(), w)) continue;
      auto [it, fresh] = slot.emplace(w, static_cast<int>(link.directions.size()));
      if (fresh) {
        Vec d = link.normal_space.project(k.vertices()[w] - anchor);
        link.directions.push_back(d / d.norm());
      }
      lc.push_back(it->second);
    }
    std::sort(lc.begin(), lc.end());
    link.link_cells.push_back(std::move(lc));
  }
  return link;
}

int normal_morse_index(const NormalLink& link, const Vec& v, double angle_tol) {
  if (link.directions.empty()) return 1;
  const Vec vn = link.normal_space.project(v);
  const double len = vn.norm();
  if (len < 1e-12) throw DegenerateDirection("normal_morse_index: direction has no normal component");
  std::vector<char> lower(link.directions.size());
  for (std::size_t i = 0; i < link.directions.size(); ++i) {
    const double c = link.directions[i].dot(vn) / len;
    if (std::abs(c) < angle_tol) throw DegenerateDirection("normal_morse_index: link direction on the wall");
    lower[i] = c < 0.0;
  }
  // the closed sublevel retracts onto the full subcomplex of lower directions
  int chi = 0;
  for (const Cell& c : link.link_cells) {
    bool all = true;
    for (int i : c) all = all && lower[i];
    if (all) chi += (c.size() % 2 == 1) ? 1 : -1;
  }
  return 1 - chi;
}

int normal_morse_index(const StratifiedComplex& k, std::size_t cell, const Vec& v, double angle_tol) {
  return normal_morse_index(normal_link(k, cell), v, angle_tol);
}

std::map<int, int> pl_morse_indices(const StratifiedComplex& k, const Vec& v, double tol) {
  const auto& verts = k.vertices();
  const double scale = std::max(1e-300, k.diameter());
  std::vector<double> h(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) h[i] = verts[i].dot(v);
  std::vector<double> sorted = h;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] - sorted[i - 1] < tol * scale)
      throw DegenerateDirection("pl_morse_indices: two vertices share a height");
  std::map<int, int> out;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const int ind = normal_morse_index(k, k.vertex_cell(static_cast<int>(i)), v, 0.0);
    if (ind != 0) out.emplace(static_cast<int>(i), ind);
  }
  return out;
}

namespace {

std::string strip_comment(const std::string& line) {
  const auto p = line.find('#');
  return p == std::string::npos ? line : line.substr(0, p);
}

}  // namespace

StratifiedComplex read_plstrat(std::istream& in) {
  std::stringstream body;
  std::string line;
  while (std::getline(in, line)) body << strip_comment(line) << '\n';
  std::string tag;
  int n = 0;
  if (!(body >> tag >> n) || tag != "PLSTRAT" || n < 1) throw std::runtime_error("PLSTRAT: bad header");
  long count = 0;
  if (!(body >> count) || count < 0) throw std::runtime_error("PLSTRAT: bad vertex count");
  std::vector<Vec> verts(static_cast<std::size_t>(count), Vec(n));
  for (auto& v : verts)
    for (int i = 0; i < n; ++i)
      if (!(body >> v[i])) throw std::runtime_error("PLSTRAT: truncated vertex list");
  std::vector<Cell> cells;
  int d = 0;
  while (body >> d) {
    if (d < 0 || d > n) throw std::runtime_error("PLSTRAT: bad cell dimension");
    Cell c(static_cast<std::size_t>(d) + 1);
    for (int& x : c)
      if (!(body >> x)) throw std::runtime_error("PLSTRAT: truncated cell");
    cells.push_back(std::move(c));
  }
  if (!body.eof()) throw std::runtime_error("PLSTRAT: unexpected token in cell list");
  try {
    return StratifiedComplex(n, std::move(verts), std::move(cells));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("PLSTRAT: ") + e.what());
  }
}

StratifiedComplex read_plstrat_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("PLSTRAT: cannot open " + path);
  return read_plstrat(f);
}

void write_plstrat(std::ostream& out, const StratifiedComplex& k) {
  out << "PLSTRAT " << k.ambient_dim() << '\n' << k.vertices().size() << '\n';
  out << std::setprecision(17);
  for (const Vec& v : k.vertices()) {
    for (int i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
    out << '\n';
  }
  for (std::size_t i = 0; i < k.cell_count(); ++i) {
    out << k.cell_dim(i);
    for (int v : k.cell(i)) out << ' ' << v;
    out << '\n';
  }
}

}  // namespace lkpolar
