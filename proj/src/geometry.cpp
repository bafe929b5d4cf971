#include "hybridqvi/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace hybridqvi {

bool BBox::contains(std::span<const double> x, double tol) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    return true;
}

BBox BBox::cube(int dim, double radius) {
    return BBox{Vec(dim, -radius), Vec(dim, radius)};
}

BBox BBox::intersect(const BBox& other) const {
    BBox out = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        out.lo[i] = std::max(lo[i], other.lo[i]);
        out.hi[i] = std::min(hi[i], other.hi[i]);
    }
    return out;
}

int Primitive::dim() const {
    switch (kind) {
        case PrimitiveKind::Ball: return static_cast<int>(center.size());
        case PrimitiveKind::Box: return static_cast<int>(center.size());
        case PrimitiveKind::HalfSpace: return static_cast<int>(normal.size());
    }
    return 0;
}

double Primitive::signed_distance(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim())
        throw ModelError("signed_distance: dimension mismatch");
    switch (kind) {
        case PrimitiveKind::Ball:
            return dist(x, center) - radius;
        case PrimitiveKind::HalfSpace:
            return dot(normal, x) - offset;
        case PrimitiveKind::Box: {
            // q_i = |x_i - c_i| - halfwidth_i; exact Euclidean distance
            double outside = 0.0;
            double maxq = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double q = std::abs(x[i] - center[i]) - halfwidth[i];
                maxq = std::max(maxq, q);
                if (q > 0.0) outside += q * q;
            }
            return std::sqrt(outside) + std::min(maxq, 0.0);
        }
    }
    throw ModelError("signed_distance: corrupt primitive");
}

Vec Primitive::sdf_gradient(std::span<const double> x) const {
    const int d = dim();
    Vec g(d, 0.0);
    switch (kind) {
        case PrimitiveKind::Ball: {
            const double r = dist(x, center);
            if (r < 1e-300) {
                g[0] = 1.0;  // center: any direction
                return g;
            }
            for (int i = 0; i < d; ++i) g[i] = (x[i] - center[i]) / r;
            return g;
        }
        case PrimitiveKind::HalfSpace:
            return normal;
        case PrimitiveKind::Box: {
            double outside = 0.0;
            int maxAxis = 0;
            double maxq = -std::numeric_limits<double>::infinity();
            Vec q(d);
            for (int i = 0; i < d; ++i) {
                q[i] = std::abs(x[i] - center[i]) - halfwidth[i];
                if (q[i] > maxq) {
                    maxq = q[i];
                    maxAxis = i;
                }
                if (q[i] > 0.0) outside += q[i] * q[i];
            }
            if (outside > 0.0) {
                const double len = std::sqrt(outside);
                for (int i = 0; i < d; ++i)
                    if (q[i] > 0.0)
                        g[i] = (x[i] >= center[i] ? 1.0 : -1.0) * q[i] / len;
            } else {
                g[maxAxis] = x[maxAxis] >= center[maxAxis] ? 1.0 : -1.0;
            }
            return g;
        }
    }
    throw ModelError("sdf_gradient: corrupt primitive");
}

BBox Primitive::bounding_box(const BBox& clip) const {
    const int d = dim();
    BBox box{Vec(d), Vec(d)};
    switch (kind) {
        case PrimitiveKind::Ball:
            for (int i = 0; i < d; ++i) {
                box.lo[i] = center[i] - radius;
                box.hi[i] = center[i] + radius;
            }
            break;
        case PrimitiveKind::Box:
            for (int i = 0; i < d; ++i) {
                box.lo[i] = center[i] - halfwidth[i];
                box.hi[i] = center[i] + halfwidth[i];
            }
            break;
        case PrimitiveKind::HalfSpace:
            return clip;  // cannot tighten a generic half-space
    }
    return box.intersect(clip);
}

double Region::signed_distance(std::span<const double> x) const {
    double sd = std::numeric_limits<double>::infinity();
    for (const Primitive& p : parts) sd = std::min(sd, p.signed_distance(x));
    return sd;
}

std::size_t Region::active_part(std::span<const double> x) const {
    std::size_t best = 0;
    double sd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const double s = parts[i].signed_distance(x);
        if (s < sd) {
            sd = s;
            best = i;
        }
    }
    return best;
}

Vec Region::outward_normal(std::span<const double> x, double boundaryTol) const {
    if (empty()) throw ModelError("outward_normal: empty region");
    const double sd = signed_distance(x);
    if (std::abs(sd) > boundaryTol)
        throw ModelError("outward_normal: point is not on the boundary (sd=" +
                         std::to_string(sd) + ")");
    Vec g = parts[active_part(x)].sdf_gradient(x);
    const double len = norm(g);
    if (len < 1e-300) throw ModelError("outward_normal: degenerate gradient");
    for (double& c : g) c /= len;
    return g;
}

BBox Region::bounding_box(const BBox& clip) const {
    if (empty()) return clip;
    BBox box = parts[0].bounding_box(clip);
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const BBox b = parts[i].bounding_box(clip);
        for (std::size_t k = 0; k < box.lo.size(); ++k) {
            box.lo[k] = std::min(box.lo[k], b.lo[k]);
            box.hi[k] = std::max(box.hi[k], b.hi[k]);
        }
    }
    return box.intersect(clip);
}

namespace {

Vec uniform_in_box(const BBox& box, std::mt19937_64& rng) {
    Vec x(box.lo.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::uniform_real_distribution<double> dist(box.lo[i], box.hi[i]);
        x[i] = dist(rng);
    }
    return x;
}

Vec random_unit(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec d(dim);
    double len = 0.0;
    do {
        for (int i = 0; i < dim; ++i) d[i] = gauss(rng);
        len = norm(d);
    } while (len < 1e-12);
    for (int i = 0; i < dim; ++i) d[i] /= len;
    return d;
}

// One candidate boundary point of a single primitive.
std::optional<Vec> boundary_candidate(const Primitive& p, const BBox& clip,
                                      std::mt19937_64& rng) {
    const int d = p.dim();
    switch (p.kind) {
        case PrimitiveKind::Ball: {
            Vec dir = random_unit(d, rng);
            Vec x(d);
            for (int i = 0; i < d; ++i) x[i] = p.center[i] + p.radius * dir[i];
            return x;
        }
        case PrimitiveKind::Box: {
            Vec x = uniform_in_box(p.bounding_box(clip), rng);
            std::uniform_int_distribution<int> axis(0, d - 1);
            std::uniform_int_distribution<int> side(0, 1);
            const int a = axis(rng);
            x[a] = p.center[a] + (side(rng) ? p.halfwidth[a] : -p.halfwidth[a]);
            return x;
        }
        case PrimitiveKind::HalfSpace: {
            Vec x = uniform_in_box(clip, rng);
            const double s = dot(p.normal, x) - p.offset;
            for (int i = 0; i < d; ++i) x[i] -= s * p.normal[i];
            return x;
        }
    }
    return std::nullopt;
}

}  // namespace

std::vector<Vec> sample_boundary(const Region& region, const BBox& clip, int count,
                                 std::mt19937_64& rng) {
    std::vector<Vec> out;
    if (region.empty() || count <= 0) return out;
    const int maxAttempts = 64 * count + 64;
    int attempts = 0;
    std::size_t part = 0;
    while (static_cast<int>(out.size()) < count && attempts++ < maxAttempts) {
        auto cand = boundary_candidate(region.parts[part], clip, rng);
        part = (part + 1) % region.parts.size();
        if (!cand || !clip.contains(*cand, 1e-12)) continue;
        // Reject points buried inside another member of the union.
        if (std::abs(region.signed_distance(*cand)) > 1e-9) continue;
        out.push_back(std::move(*cand));
    }
    return out;
}

std::vector<Vec> sample_volume(const Region& region, const BBox& clip, int count,
                               std::mt19937_64& rng) {
    std::vector<Vec> out;
    if (region.empty() || count <= 0) return out;
    const int maxAttempts = 256 * count + 256;
    int attempts = 0;
    std::size_t part = 0;
    while (static_cast<int>(out.size()) < count && attempts++ < maxAttempts) {
        const BBox box = region.parts[part].bounding_box(clip);
        part = (part + 1) % region.parts.size();
        bool degenerate = false;
        for (std::size_t i = 0; i < box.lo.size(); ++i)
            if (box.hi[i] < box.lo[i]) degenerate = true;
        if (degenerate) continue;
        Vec x = uniform_in_box(box, rng);
        if (region.signed_distance(x) <= 1e-12) out.push_back(std::move(x));
    }
    return out;
}

}  // namespace hybridqvi
