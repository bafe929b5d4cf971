#include "hybridqvi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>

namespace hybridqvi {

std::size_t ChartGrid::nodeCount() const {
    std::size_t c = 1;
    for (int ni : n) c *= static_cast<std::size_t>(ni);
    return c;
}

Vec ChartGrid::node(std::size_t flat) const {
    Vec x(dim);
    for (int d = dim - 1; d >= 0; --d) {
        const std::size_t nd = static_cast<std::size_t>(n[d]);
        x[d] = lo[d] + static_cast<double>(flat % nd) * spacing[d];
        flat /= nd;
    }
    return x;
}

std::size_t ChartGrid::flatIndex(std::span<const int> multi) const {
    std::size_t flat = 0;
    for (int d = 0; d < dim; ++d) flat = flat * static_cast<std::size_t>(n[d]) + multi[d];
    return flat;
}

void ChartGrid::multiIndex(std::size_t flat, std::span<int> out) const {
    for (int d = dim - 1; d >= 0; --d) {
        const std::size_t nd = static_cast<std::size_t>(n[d]);
        out[d] = static_cast<int>(flat % nd);
        flat /= nd;
    }
}

std::size_t ChartGrid::nearestNode(std::span<const double> x) const {
    std::size_t flat = 0;
    for (int d = 0; d < dim; ++d) {
        const double pos = (std::clamp(x[d], lo[d], hi[d]) - lo[d]) / spacing[d];
        const int i = std::clamp(static_cast<int>(std::lround(pos)), 0, n[d] - 1);
        flat = flat * static_cast<std::size_t>(n[d]) + i;
    }
    return flat;
}

double ChartGrid::maxSpacing() const {
    return *std::max_element(spacing.begin(), spacing.end());
}

double ChartGrid::minSpacing() const {
    return *std::min_element(spacing.begin(), spacing.end());
}

double ChartGrid::interpolate(std::span<const double> values, std::span<const double> x,
                              double* clampDist) const {
    double clamp2 = 0.0;
    // base cell index and weights per axis
    int base[8];
    double w[8];
    if (dim > 8) throw ModelError("grids support at most 8 dimensions");
    for (int d = 0; d < dim; ++d) {
        double xd = x[d];
        if (xd < lo[d]) {
            clamp2 += (lo[d] - xd) * (lo[d] - xd);
            xd = lo[d];
        } else if (xd > hi[d]) {
            clamp2 += (xd - hi[d]) * (xd - hi[d]);
            xd = hi[d];
        }
        const double pos = (xd - lo[d]) / spacing[d];
        int i = static_cast<int>(std::floor(pos));
        i = std::clamp(i, 0, n[d] - 2);
        base[d] = i;
        w[d] = std::clamp(pos - i, 0.0, 1.0);
    }
    if (clampDist) *clampDist = std::sqrt(clamp2);

    double acc = 0.0;
    const int corners = 1 << dim;
    for (int c = 0; c < corners; ++c) {
        double weight = 1.0;
        std::size_t flat = 0;
        for (int d = 0; d < dim; ++d) {
            const int bit = (c >> d) & 1;
            weight *= bit ? w[d] : 1.0 - w[d];
            flat = flat * static_cast<std::size_t>(n[d]) + (base[d] + bit);
        }
        if (weight != 0.0) acc += weight * values[flat];
    }
    return acc;
}

double default_trunc_radius(const HybridModel& model) {
    const double base = 4.0 * model.constants.R;
    return base + model.dynamicsBound(base) / model.constants.lambda;
}

ModelGrid ModelGrid::build(const HybridModel& model, const GridSpec& spec) {
    ModelGrid grid;
    grid.truncRadius = spec.truncRadius > 0 ? spec.truncRadius : default_trunc_radius(model);
    if (spec.h <= 0) throw ModelError("grid spacing must be positive");

    for (int ci = 0; ci < model.chartCount(); ++ci) {
        const Chart& ch = model.chart(ci);
        const BBox box = ch.domain.bounding_box(BBox::cube(ch.dim, grid.truncRadius));
        ChartGrid g;
        g.dim = ch.dim;
        g.lo = box.lo;
        g.hi = box.hi;
        g.n.resize(ch.dim);
        g.spacing.resize(ch.dim);
        for (int d = 0; d < ch.dim; ++d) {
            const double extent = box.hi[d] - box.lo[d];
            if (extent <= 0)
                throw ModelError("chart " + std::to_string(ci) +
                                 " has empty truncated domain along axis " + std::to_string(d));
            const int cells = std::max<int>(1, static_cast<int>(std::llround(extent / spec.h)));
            g.n[d] = cells + 1;
            g.spacing[d] = extent / cells;
        }
        grid.charts.push_back(std::move(g));
    }

    const double tagTol = model.boundaryTol;
    bool anyC = false;
    for (int ci = 0; ci < model.chartCount(); ++ci) {
        const Chart& ch = model.chart(ci);
        const ChartGrid& g = grid.charts[ci];
        std::vector<NodeTag> tag(g.nodeCount(), NodeTag::Free);
        const double destTol = g.maxSpacing() / 2.0;
        for (std::size_t i = 0; i < tag.size(); ++i) {
            const Vec x = g.node(i);
            if (!ch.A.empty() && ch.A.signed_distance(x) <= tagTol) {
                tag[i] = NodeTag::A;
            } else if (!ch.C.empty() && ch.C.signed_distance(x) <= tagTol) {
                tag[i] = NodeTag::C;
                anyC = true;
            }
            if (!ch.D.empty() && ch.D.signed_distance(x) <= destTol)
                grid.destinations.push_back(HybridState{ci, x});
        }
        grid.tags.push_back(std::move(tag));
    }
    if (anyC && grid.destinations.empty())
        throw ModelError("model has controlled-jump nodes but no destination nodes on the grid");
    return grid;
}

std::size_t ModelGrid::totalNodes() const {
    std::size_t c = 0;
    for (const auto& g : charts) c += g.nodeCount();
    return c;
}

bool ModelGrid::hasTag(NodeTag t) const {
    for (const auto& chartTags : tags)
        for (NodeTag tag : chartTags)
            if (tag == t) return true;
    return false;
}

ValueField ValueField::zeros(const ModelGrid& grid) { return constant(grid, 0.0); }

ValueField ValueField::constant(const ModelGrid& grid, double c) {
    ValueField f;
    f.grids = grid.charts;
    for (const auto& g : grid.charts) f.values.emplace_back(g.nodeCount(), c);
    return f;
}

double ValueField::eval(const HybridState& s, double* clampDist) const {
    return grids.at(s.chart).interpolate(values.at(s.chart), s.x, clampDist);
}

double ValueField::minValue() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& v : values)
        for (double c : v) m = std::min(m, c);
    return m;
}

double ValueField::maxValue() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& v : values)
        for (double c : v) m = std::max(m, c);
    return m;
}

double sup_distance(const ValueField& a, const ValueField& b) {
    double m = 0.0;
    for (std::size_t c = 0; c < a.values.size(); ++c)
        m = std::max(m, sup_diff(a.values[c], b.values[c]));
    return m;
}

ValueField shifted(const ValueField& f, double c) {
    ValueField out = f;
    for (auto& chart : out.values)
        for (double& v : chart) v += c;
    return out;
}

void ValueField::write_csv(std::ostream& out) const {
    int maxDim = 0;
    for (const auto& g : grids) maxDim = std::max(maxDim, g.dim);
    out << "chart";
    for (int d = 1; d <= maxDim; ++d) out << ",x" << d;
    out << ",value\n";
    out << std::setprecision(17);
    for (std::size_t c = 0; c < grids.size(); ++c) {
        const ChartGrid& g = grids[c];
        for (std::size_t i = 0; i < values[c].size(); ++i) {
            const Vec x = g.node(i);
            out << c;
            for (int d = 0; d < maxDim; ++d) {
                out << ',';
                if (d < g.dim) out << x[d];
            }
            out << ',' << values[c][i] << '\n';
        }
    }
}

namespace {

// Little-endian scalar IO; the in-memory layout on every supported target is
// already little-endian, so this is a plain byte copy.
template <typename T>
void put(std::ostream& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    char buf[sizeof(T)];
    in.read(buf, sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

constexpr std::uint32_t kMagic = 0x46565148;  // "HQVF"

}  // namespace

void ValueField::write_binary(std::ostream& out) const {
    put<std::uint32_t>(out, kMagic);
    put<std::uint32_t>(out, 1);  // version
    put<std::uint8_t>(out, time.has_value() ? 1 : 0);
    put<double>(out, time.value_or(0.0));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(grids.size()));
    for (const auto& g : grids) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim));
        for (int d = 0; d < g.dim; ++d) {
            put<std::uint64_t>(out, static_cast<std::uint64_t>(g.n[d]));
            put<double>(out, g.lo[d]);
            put<double>(out, g.spacing[d]);
        }
    }
    for (const auto& v : values)
        for (double c : v) put<double>(out, c);
}

ValueField ValueField::read_binary(std::istream& in) {
    if (get<std::uint32_t>(in) != kMagic) throw ModelError("value file: bad magic");
    if (get<std::uint32_t>(in) != 1) throw ModelError("value file: unsupported version");
    const bool hasTime = get<std::uint8_t>(in) != 0;
    const double t = get<double>(in);
    ValueField f;
    if (hasTime) f.time = t;
    const std::uint32_t chartCount = get<std::uint32_t>(in);
    for (std::uint32_t c = 0; c < chartCount; ++c) {
        ChartGrid g;
        g.dim = static_cast<int>(get<std::uint32_t>(in));
        g.n.resize(g.dim);
        g.lo.resize(g.dim);
        g.spacing.resize(g.dim);
        g.hi.resize(g.dim);
        for (int d = 0; d < g.dim; ++d) {
            g.n[d] = static_cast<int>(get<std::uint64_t>(in));
            g.lo[d] = get<double>(in);
            g.spacing[d] = get<double>(in);
            g.hi[d] = g.lo[d] + g.spacing[d] * (g.n[d] - 1);
        }
        f.grids.push_back(std::move(g));
    }
    for (const auto& g : f.grids) {
        std::vector<double> v(g.nodeCount());
        for (double& c : v) c = get<double>(in);
        f.values.push_back(std::move(v));
    }
    if (!in) throw ModelError("value file: truncated");
    return f;
}

}  // namespace hybridqvi
