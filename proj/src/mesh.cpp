// SPDX-License-Identifier: Apache-2.0
#include "multires/mesh.hpp"

namespace multires {

StructuredMesh build_mesh(int level) {
  if (level < 1) {
    throw DegenerateMesh("mesh level must be >= 1, got " +
                         std::to_string(level));
  }
  if (level > 14) {
    throw DegenerateMesh("mesh level " + std::to_string(level) +
                         " exceeds the supported range");
  }
  StructuredMesh mesh;
  mesh.level = level;
  mesh.side = (1 << level) + 1;
  mesh.width = 1.0 / static_cast<double>(1 << level);
  return mesh;
}

}  // namespace multires
