// SPDX-License-Identifier: Apache-2.0
#include "multires/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "multires/rng.hpp"

namespace multires {

namespace {

struct Pt {
  double x;
  double y;
};

// Sutherland-Hodgman clip of a convex polygon against one half-plane
// keep(p) == true. Orientation is preserved.
template <typename Keep, typename Cross>
std::vector<Pt> clip_half_plane(const std::vector<Pt>& poly, Keep keep,
                                Cross cross) {
  std::vector<Pt> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Pt& a = poly[i];
    const Pt& b = poly[(i + 1) % n];
    const bool ka = keep(a);
    const bool kb = keep(b);
    if (ka) out.push_back(a);
    if (ka != kb) out.push_back(cross(a, b));
  }
  return out;
}

std::vector<Pt> clip_to_box(std::vector<Pt> poly, double x0, double y0,
                            double x1, double y1) {
  auto at_x = [](const Pt& a, const Pt& b, double x) {
    const double t = (x - a.x) / (b.x - a.x);
    return Pt{x, a.y + t * (b.y - a.y)};
  };
  auto at_y = [](const Pt& a, const Pt& b, double y) {
    const double t = (y - a.y) / (b.y - a.y);
    return Pt{a.x + t * (b.x - a.x), y};
  };
  poly = clip_half_plane(poly, [&](const Pt& p) { return p.x >= x0; },
                         [&](const Pt& a, const Pt& b) { return at_x(a, b, x0); });
  if (poly.empty()) return poly;
  poly = clip_half_plane(poly, [&](const Pt& p) { return p.x <= x1; },
                         [&](const Pt& a, const Pt& b) { return at_x(a, b, x1); });
  if (poly.empty()) return poly;
  poly = clip_half_plane(poly, [&](const Pt& p) { return p.y >= y0; },
                         [&](const Pt& a, const Pt& b) { return at_y(a, b, y0); });
  if (poly.empty()) return poly;
  poly = clip_half_plane(poly, [&](const Pt& p) { return p.y <= y1; },
                         [&](const Pt& a, const Pt& b) { return at_y(a, b, y1); });
  return poly;
}

// Signed area and area centroid via the shoelace formula.
void polygon_area_centroid(const std::vector<Pt>& poly, double& area, Pt& c) {
  double a = 0.0, cx = 0.0, cy = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Pt& p = poly[i];
    const Pt& q = poly[(i + 1) % n];
    const double w = p.x * q.y - q.x * p.y;
    a += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  area = 0.5 * a;
  if (std::abs(area) > 0.0) {
    c = Pt{cx / (6.0 * area), cy / (6.0 * area)};
  } else {
    c = Pt{0.0, 0.0};
  }
}

// Barycentric coordinates of p in the triangle (p0, p1, p2).
std::array<double, 3> barycentric(const Pt& p, const Pt& p0, const Pt& p1,
                                  const Pt& p2) {
  const double det =
      (p1.y - p2.y) * (p0.x - p2.x) + (p2.x - p1.x) * (p0.y - p2.y);
  const double l0 =
      ((p1.y - p2.y) * (p.x - p2.x) + (p2.x - p1.x) * (p.y - p2.y)) / det;
  const double l1 =
      ((p2.y - p0.y) * (p.x - p2.x) + (p0.x - p2.x) * (p.y - p2.y)) / det;
  return {l0, l1, 1.0 - l0 - l1};
}

}  // namespace

DualVector assemble_box_average(const StructuredMesh& mesh,
                                const MeasurementBox& box) {
  if (!(box.width > 0.0) || box.x0 < 0.0 || box.y0 < 0.0 ||
      box.x0 + box.width > 1.0 + 1e-12 || box.y0 + box.width > 1.0 + 1e-12) {
    throw InvalidInput("measurement box does not fit inside the unit square");
  }
  DualVector dual;
  dual.level = mesh.level;
  dual.coeffs = Eigen::VectorXd::Zero(mesh.interior_count());

  const double h = mesh.width;
  const double inv_box_area = 1.0 / (box.width * box.width);
  const double x1 = box.x0 + box.width;
  const double y1 = box.y0 + box.width;

  // Only cells whose bounding square meets the box contribute.
  const int cx_lo = std::max(0, static_cast<int>(std::floor(box.x0 / h)));
  const int cx_hi = std::min(mesh.cells_per_side() - 1,
                             static_cast<int>(std::floor(x1 / h)));
  const int cy_lo = std::max(0, static_cast<int>(std::floor(box.y0 / h)));
  const int cy_hi = std::min(mesh.cells_per_side() - 1,
                             static_cast<int>(std::floor(y1 / h)));

  for (int cy = cy_lo; cy <= cy_hi; ++cy) {
    for (int cx = cx_lo; cx <= cx_hi; ++cx) {
      const int tris[2][3][2] = {
          {{cx, cy}, {cx + 1, cy}, {cx + 1, cy + 1}},
          {{cx, cy}, {cx + 1, cy + 1}, {cx, cy + 1}},
      };
      for (const auto& tri : tris) {
        std::vector<Pt> poly;
        poly.reserve(7);
        for (int a = 0; a < 3; ++a) {
          poly.push_back(Pt{tri[a][0] * h, tri[a][1] * h});
        }
        const Pt p0 = poly[0], p1 = poly[1], p2 = poly[2];
        poly = clip_to_box(std::move(poly), box.x0, box.y0, x1, y1);
        if (poly.size() < 3) continue;
        double area;
        Pt centroid;
        polygon_area_centroid(poly, area, centroid);
        if (!(area > 1e-300)) continue;
        // The basis functions are linear, so their integral over the clipped
        // polygon is area times the value at the centroid.
        const auto lambda = barycentric(centroid, p0, p1, p2);
        for (int a = 0; a < 3; ++a) {
          const int idx = mesh.interior_index(tri[a][0], tri[a][1]);
          if (idx >= 0) dual.coeffs[idx] += area * lambda[a] * inv_box_area;
        }
      }
    }
  }
  return dual;
}

MeasurementSpace make_measurements_with_boxes(
    const H1Gram& gram, const std::vector<MeasurementBox>& boxes) {
  if (boxes.empty()) throw InvalidInput("measurement space needs m >= 1 boxes");
  MeasurementSpace ms;
  ms.level_ = gram.level();
  ms.boxes_ = boxes;
  for (const auto& box : boxes) {
    DualVector dual = assemble_box_average(gram.mesh(), box);
    FemVector omega = gram.lift(dual);
    if (!ms.ortho_.try_append(gram, omega, 1e-12)) {
      throw DependentRepresenters(
          "measurement representers are numerically dependent");
    }
    ms.duals_.push_back(std::move(dual));
    ms.representers_.push_back(std::move(omega));
  }
  return ms;
}

MeasurementSpace make_measurements(const H1Gram& gram, int m, double width,
                                   std::uint64_t seed) {
  if (m < 1) throw InvalidInput("measurement space needs m >= 1");
  if (!(width > 0.0 && width < 1.0)) {
    throw InvalidInput("measurement width must lie in (0, 1)");
  }
  UniformSampler sampler(seed);
  std::vector<MeasurementBox> boxes;
  boxes.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    MeasurementBox box;
    box.width = width;
    box.x0 = sampler.in(0.0, 1.0 - width);
    box.y0 = sampler.in(0.0, 1.0 - width);
    boxes.push_back(box);
  }
  return make_measurements_with_boxes(gram, boxes);
}

double MeasurementSpace::apply_functional(int i, const FemVector& u) const {
  check_level(u.level, level_, "MeasurementSpace::apply_functional");
  return duals_[static_cast<std::size_t>(i)].coeffs.dot(u.coeffs);
}

Eigen::VectorXd MeasurementSpace::measure(const FemVector& u) const {
  check_level(u.level, level_, "MeasurementSpace::measure");
  return ortho_.project(u);
}

FemVector MeasurementSpace::reconstruct(const Eigen::VectorXd& w) const {
  if (w.size() != size()) {
    throw DimensionMismatch("MeasurementSpace::reconstruct: expected " +
                            std::to_string(size()) + " coordinates, got " +
                            std::to_string(w.size()));
  }
  FemVector out;
  out.level = level_;
  out.coeffs = Eigen::VectorXd::Zero(duals_[0].coeffs.size());
  for (int i = 0; i < size(); ++i) {
    out.coeffs += w[i] * ortho_.vectors()[static_cast<std::size_t>(i)].coeffs;
  }
  return out;
}

Eigen::MatrixXd cross_gramian(const MeasurementSpace& ms,
                              const std::vector<FemVector>& basis) {
  Eigen::MatrixXd c(ms.size(), static_cast<int>(basis.size()));
  for (int j = 0; j < c.cols(); ++j) {
    const FemVector& phi = basis[static_cast<std::size_t>(j)];
    check_level(phi.level, ms.level(), "cross_gramian basis");
    for (int i = 0; i < c.rows(); ++i) {
      c(i, j) = ms.ortho_duals()[static_cast<std::size_t>(i)].coeffs.dot(
          phi.coeffs);
    }
  }
  return c;
}

}  // namespace multires
