// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>

#include "multires/errors.hpp"

namespace multires {

// Uniform triangulation of the unit square at dyadic level s: grid spacing
// h = 2^-s, every grid square split along its lower-left to upper-right
// diagonal. Homogeneous Dirichlet boundary, so degrees of freedom live on
// interior nodes only, numbered lexicographically with x running fastest.
struct StructuredMesh {
  int level = 0;
  int side = 0;        // nodes per side, 2^s + 1
  double width = 0.0;  // h = 2^-s

  int cells_per_side() const { return side - 1; }
  int interior_side() const { return side - 2; }
  int interior_count() const { return interior_side() * interior_side(); }
  int vertex_count() const { return side * side; }
  std::int64_t triangle_count() const {
    return 2LL * cells_per_side() * cells_per_side();
  }

  bool is_interior(int gx, int gy) const {
    return gx > 0 && gy > 0 && gx < side - 1 && gy < side - 1;
  }

  // Interior dof index of grid node (gx, gy), -1 on the boundary.
  int interior_index(int gx, int gy) const {
    if (!is_interior(gx, gy)) return -1;
    return (gy - 1) * interior_side() + (gx - 1);
  }

  std::array<double, 2> node_coords(int gx, int gy) const {
    return {gx * width, gy * width};
  }
};

/// Builds the level-s mesh. Throws DegenerateMesh for s < 1.
StructuredMesh build_mesh(int level);

}  // namespace multires
