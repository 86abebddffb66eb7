#pragma once

#include "lkpolar/germ.hpp"
#include "lkpolar/lkmeasure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lkpolar {

// cube, cube-boundary, octahedron, torus7, square, segment, plstrat:<file>,
// sphere:R, torus:R:r, disk:R, hemisphere:R, circle:R, ellipse:a:b, ball:R
Shape shape_from_id(const std::string& id);

// rays:m, halfplane:n, cone-circle:theta, cone-link:<file>, flat:k:n
ConeGerm germ_from_id(const std::string& id);

// closed-form Lambda_k of a catalog shape, when one is known
std::optional<double> reference_lambda(const std::string& shape_id, int k);

// closed-form value of the local row k of a catalog germ
std::optional<double> reference_local(const std::string& germ_id, int k);

std::vector<std::string> shape_id_forms();
std::vector<std::string> germ_id_forms();

}  // namespace lkpolar
