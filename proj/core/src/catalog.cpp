#include "lkpolar/catalog.hpp"

#include "lkpolar/smoothshape.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lkpolar {

namespace {

constexpr double kPi = std::numbers::pi;

struct ParsedId {
  std::string head;
  std::vector<std::string> args;
};

ParsedId split_id(const std::string& id) {
  ParsedId out;
  const auto colon = id.find(':');
  out.head = id.substr(0, colon);
  if (colon == std::string::npos) return out;
  // file paths keep their colons
  if (out.head == "plstrat" || out.head == "cone-link") {
    out.args.push_back(id.substr(colon + 1));
    return out;
  }
  std::size_t start = colon + 1;
  for (;;) {
    const auto next = id.find(':', start);
    out.args.push_back(id.substr(start, next - start));
    if (next == std::string::npos) break;
    start = next + 1;
  }
  return out;
}

double number(const std::string& text, const std::string& id) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw std::invalid_argument("bad number '" + text + "' in id '" + id + "'");
  return v;
}

int integer(const std::string& text, const std::string& id) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("bad integer '" + text + "' in id '" + id + "'");
  return v;
}

std::vector<double> numbers(const ParsedId& p, std::size_t count, const std::string& id) {
  if (p.args.size() != count)
    throw std::invalid_argument("id '" + id + "' needs " + std::to_string(count) + " parameter(s)");
  std::vector<double> out;
  for (const auto& a : p.args) {
    const double v = number(a, id);
    if (!(v > 0)) throw std::invalid_argument("id '" + id + "': parameters must be positive");
    out.push_back(v);
  }
  return out;
}

void no_args(const ParsedId& p, const std::string& id) {
  if (!p.args.empty()) throw std::invalid_argument("id '" + id + "' takes no parameters");
}

double ellipse_perimeter(double a, double b) {
  if (a < b) std::swap(a, b);
  const double e = std::sqrt(1.0 - (b * b) / (a * a));
  return 4.0 * a * std::comp_ellint_2(e);
}

std::optional<double> pick(const std::vector<double>& values, int k) {
  if (k < 0) return std::nullopt;
  if (static_cast<std::size_t>(k) >= values.size()) return 0.0;
  return values[static_cast<std::size_t>(k)];
}

}  // namespace

Shape shape_from_id(const std::string& id) {
  const ParsedId p = split_id(id);
  if (p.head == "cube") return no_args(p, id), Shape(plcatalog::solid_cube(), id);
  if (p.head == "cube-boundary") return no_args(p, id), Shape(plcatalog::cube_boundary(), id);
  if (p.head == "octahedron") return no_args(p, id), Shape(plcatalog::octahedron_boundary(), id);
  if (p.head == "torus7") return no_args(p, id), Shape(plcatalog::seven_vertex_torus(), id);
  if (p.head == "square") return no_args(p, id), Shape(plcatalog::square_boundary(), id);
  if (p.head == "segment") return no_args(p, id), Shape(plcatalog::segment(), id);
  if (p.head == "plstrat") {
    if (p.args.size() != 1 || p.args[0].empty()) throw std::invalid_argument("plstrat:<file> needs a path");
    return Shape(read_plstrat_file(p.args[0]), id);
  }
  if (p.head == "sphere") return Shape(smoothcatalog::sphere(numbers(p, 1, id)[0]), id);
  if (p.head == "torus") {
    const auto v = numbers(p, 2, id);
    return Shape(smoothcatalog::torus(v[0], v[1]), id);
  }
  if (p.head == "disk") return Shape(smoothcatalog::disk(numbers(p, 1, id)[0]), id);
  if (p.head == "hemisphere") return Shape(smoothcatalog::hemisphere(numbers(p, 1, id)[0]), id);
  if (p.head == "circle") return Shape(smoothcatalog::circle(numbers(p, 1, id)[0]), id);
  if (p.head == "ellipse") {
    const auto v = numbers(p, 2, id);
    return Shape(smoothcatalog::ellipse(v[0], v[1]), id);
  }
  if (p.head == "ball") return Shape(smoothcatalog::ball(numbers(p, 1, id)[0]), id);
  throw std::invalid_argument("unknown shape '" + id + "'");
}

ConeGerm germ_from_id(const std::string& id) {
  const ParsedId p = split_id(id);
  if (p.head == "rays") {
    if (p.args.size() != 1) throw std::invalid_argument("rays:m needs one parameter");
    return germcatalog::rays(integer(p.args[0], id));
  }
  if (p.head == "halfplane") {
    if (p.args.size() != 1) throw std::invalid_argument("halfplane:n needs one parameter");
    return germcatalog::halfplane(integer(p.args[0], id));
  }
  if (p.head == "cone-circle") {
    if (p.args.size() != 1) throw std::invalid_argument("cone-circle:theta needs one parameter");
    return germcatalog::cone_circle(number(p.args[0], id));
  }
  if (p.head == "cone-link") {
    if (p.args.size() != 1 || p.args[0].empty()) throw std::invalid_argument("cone-link:<file> needs a path");
    return germcatalog::cone_link(p.args[0]);
  }
  if (p.head == "flat") {
    if (p.args.size() != 2) throw std::invalid_argument("flat:k:n needs two parameters");
    return germcatalog::flat(integer(p.args[0], id), integer(p.args[1], id));
  }
  throw std::invalid_argument("unknown germ '" + id + "'");
}

std::optional<double> reference_lambda(const std::string& shape_id, int k) {
  const ParsedId p = split_id(shape_id);
  if (p.head == "cube") return pick({1, 3, 3, 1}, k);
  if (p.head == "cube-boundary") return pick({2, 0, 6}, k);
  if (p.head == "octahedron") return pick({2, 0, 4.0 * std::sqrt(3.0)}, k);
  if (p.head == "torus7") return k <= 1 ? pick({0, 0}, k) : std::nullopt;
  if (p.head == "square") return pick({0, 4}, k);
  if (p.head == "segment") return pick({1, 1}, k);
  if (p.head == "sphere") {
    const double r = number(p.args.at(0), shape_id);
    return pick({2, 0, 4 * kPi * r * r}, k);
  }
  if (p.head == "torus") {
    const double a = number(p.args.at(0), shape_id), b = number(p.args.at(1), shape_id);
    return pick({0, 0, 4 * kPi * kPi * a * b}, k);
  }
  if (p.head == "disk") {
    const double r = number(p.args.at(0), shape_id);
    return pick({1, kPi * r, kPi * r * r}, k);
  }
  if (p.head == "hemisphere") {
    const double r = number(p.args.at(0), shape_id);
    return pick({1, kPi * r, 2 * kPi * r * r}, k);
  }
  if (p.head == "circle") return pick({0, 2 * kPi * number(p.args.at(0), shape_id)}, k);
  if (p.head == "ellipse")
    return pick({0, ellipse_perimeter(number(p.args.at(0), shape_id), number(p.args.at(1), shape_id))}, k);
  if (p.head == "ball") {
    const double r = number(p.args.at(0), shape_id);
    return pick({1, 4 * r, 2 * kPi * r * r, 4 * kPi * r * r * r / 3}, k);
  }
  return std::nullopt;
}

std::optional<double> reference_local(const std::string& germ_id, int k) {
  const ParsedId p = split_id(germ_id);
  if (p.head == "rays") {
    const double m = integer(p.args.at(0), germ_id);
    return pick({1 - m / 2, m / 2}, k);
  }
  if (p.head == "halfplane") return pick({0, 0.5, 0.5}, k);
  if (p.head == "cone-circle") {
    const double s = std::sin(number(p.args.at(0), germ_id));
    return pick({1 - s, 0, s}, k);
  }
  if (p.head == "flat") {
    const int d = integer(p.args.at(0), germ_id);
    return k == d ? 1.0 : 0.0;
  }
  return std::nullopt;
}

std::vector<std::string> shape_id_forms() {
  return {"cube",         "cube-boundary", "octahedron", "torus7", "square",   "segment",     "plstrat:<file>",
          "sphere:R",     "torus:R:r",     "disk:R",     "hemisphere:R", "circle:R", "ellipse:a:b", "ball:R"};
}

std::vector<std::string> germ_id_forms() {
  return {"rays:m", "halfplane:n", "cone-circle:theta", "cone-link:<file>", "flat:k:n"};
}

}  // namespace lkpolar
