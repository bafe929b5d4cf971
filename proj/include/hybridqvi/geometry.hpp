// Region geometry: finite unions of smooth primitives (ball, axis box,
// half-space). Signed distances are exact for each primitive and combine by
// min over the union; outward normals come from the active primitive.
#ifndef HYBRIDQVI_GEOMETRY_HPP
#define HYBRIDQVI_GEOMETRY_HPP

#include <limits>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hybridqvi/numeric.hpp"

namespace hybridqvi {

struct BBox {
    Vec lo, hi;
    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(std::span<const double> x, double tol = 0.0) const;
    static BBox cube(int dim, double radius);  // [-radius, radius]^dim
    BBox intersect(const BBox& other) const;
};

enum class PrimitiveKind { Ball, Box, HalfSpace };

struct Primitive {
    PrimitiveKind kind = PrimitiveKind::Ball;
    Vec center;      // ball, box
    double radius = 0.0;
    Vec halfwidth;   // box
    Vec normal;      // half-space {n.x <= offset}, |n| = 1
    double offset = 0.0;

    int dim() const;
    double signed_distance(std::span<const double> x) const;
    // Gradient of the signed distance; valid away from the skeleton.
    Vec sdf_gradient(std::span<const double> x) const;
    BBox bounding_box(const BBox& clip) const;
};

struct Region {
    int chart = 0;
    std::vector<Primitive> parts;  // empty => empty region

    bool empty() const { return parts.empty(); }
    // +inf for the empty region; min over parts otherwise.
    double signed_distance(std::span<const double> x) const;
    // Index of the part achieving the min signed distance.
    std::size_t active_part(std::span<const double> x) const;
    // Unit normal pointing out of the region. Throws ModelError when x is
    // farther than boundaryTol from the boundary.
    Vec outward_normal(std::span<const double> x, double boundaryTol = 1e-9) const;
    BBox bounding_box(const BBox& clip) const;
};

// Deterministic sampling used by the assumption audits. Both return points
// filtered to the clip box; boundary samples satisfy |sd| <= tol of the union.
std::vector<Vec> sample_boundary(const Region& region, const BBox& clip, int count,
                                 std::mt19937_64& rng);
std::vector<Vec> sample_volume(const Region& region, const BBox& clip, int count,
                               std::mt19937_64& rng);

}  // namespace hybridqvi

#endif
