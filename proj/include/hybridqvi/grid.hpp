// Per-chart rectilinear grids, node tagging by signed distance, and the
// gridded scalar value field with multilinear interpolation.
#ifndef HYBRIDQVI_GRID_HPP
#define HYBRIDQVI_GRID_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hybridqvi/model.hpp"
#include "hybridqvi/numeric.hpp"

namespace hybridqvi {

struct ChartGrid {
    int dim = 0;
    Vec lo, hi;
    std::vector<int> n;  // nodes per axis, >= 2
    Vec spacing;

    std::size_t nodeCount() const;
    Vec node(std::size_t flat) const;
    std::size_t flatIndex(std::span<const int> multi) const;
    void multiIndex(std::size_t flat, std::span<int> out) const;
    std::size_t nearestNode(std::span<const double> x) const;
    double maxSpacing() const;
    double minSpacing() const;

    // Multilinear interpolation; the query is clamped into the grid box and
    // the clamp displacement (0 when inside) is reported through clampDist.
    double interpolate(std::span<const double> values, std::span<const double> x,
                       double* clampDist = nullptr) const;
};

enum class NodeTag : std::uint8_t { Free = 0, A = 1, C = 2 };

struct GridSpec {
    double h = 0.05;          // target spacing
    double truncRadius = 0;   // 0 -> default 4R + reach of one effective horizon
};

// Grids plus the per-node structure shared by both solvers: region tags and
// the discretized destination set (grid nodes within spacing/2 of D).
struct ModelGrid {
    std::vector<ChartGrid> charts;
    std::vector<std::vector<NodeTag>> tags;
    std::vector<HybridState> destinations;  // ordered by chart, then node index
    double truncRadius = 0;

    static ModelGrid build(const HybridModel& model, const GridSpec& spec);

    std::size_t totalNodes() const;
    bool hasTag(NodeTag t) const;
};

double default_trunc_radius(const HybridModel& model);

struct ValueField {
    std::vector<ChartGrid> grids;
    std::vector<std::vector<double>> values;  // per chart, row-major
    std::optional<double> time;               // nullopt = stationary

    static ValueField zeros(const ModelGrid& grid);
    static ValueField constant(const ModelGrid& grid, double c);

    double eval(const HybridState& s, double* clampDist = nullptr) const;
    double minValue() const;
    double maxValue() const;

    void write_csv(std::ostream& out) const;
    void write_binary(std::ostream& out) const;
    static ValueField read_binary(std::istream& in);
};

double sup_distance(const ValueField& a, const ValueField& b);
ValueField shifted(const ValueField& f, double c);

}  // namespace hybridqvi

#endif
