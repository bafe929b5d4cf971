// Problem data for a hybrid control system: charts with autonomous (A),
// controlled (C) and destination (D) sets, dynamics f, jump map g, costs
// K/C_a/C_c/h, and the declared constants. The constants are user-declared
// and audited by sampling; sampling can refute a declaration, not certify it.
#ifndef HYBRIDQVI_MODEL_HPP
#define HYBRIDQVI_MODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridqvi/expr.hpp"
#include "hybridqvi/geometry.hpp"
#include "hybridqvi/numeric.hpp"

namespace hybridqvi {

struct ChartId {
    int index = 0;
};

// A point of the disjoint-union state space: chart index plus coordinates in
// that chart's Euclidean space.
struct HybridState {
    int chart = 0;
    Vec x;
};

struct Chart {
    int dim = 0;
    Region domain;  // Omega_i
    Region A, C, D;
};

// Jump target for one (chart, v-sample) pair. coords are expressions over
// x1..xd and v1..; a single entry per chart is shared across all v samples.
struct JumpTarget {
    int targetChart = 0;
    std::vector<Expr> coords;
};

struct ControlGrid {
    std::vector<Vec> uSamples;  // finite sampling of the compact U
    std::vector<Vec> vSamples;  // finite sampling of the compact V
};

struct Constants {
    double lambda = 1.0;  // discount rate
    double F = 1.0;       // dynamics bound (coefficient of 1+|x| when linearGrowth)
    double L = 1.0;       // Lipschitz constant of f
    double G = 1.0;       // Lipschitz constant of g
    double beta = 1.0;    // separation of A from C and D
    double xi0 = 0.1;     // transversality margin
    double R = 1.0;       // norm bound on D
    int k = 0;            // polynomial growth degree of the costs
    double Cprime = 1.0;  // lower bound on jump costs
};

struct HybridModel {
    std::string name;
    std::vector<Chart> charts;
    std::vector<std::vector<Expr>> dynamics;        // per chart, per component
    std::vector<std::vector<JumpTarget>> jumpMap;   // per chart: 1 or |vSamples| entries
    std::vector<Expr> runningCost;                  // K, per chart (x, t, u)
    std::vector<Expr> autonomousJumpCost;           // C_a, per chart (x, v)
    std::vector<Expr> controlledJumpCost;           // C_c, per source chart (x, y)
    std::vector<Expr> terminalCost;                 // h, per chart (x)
    std::vector<Expr> oracle;                       // optional exact value, per chart (x)
    ControlGrid controls;
    Constants constants;
    bool linearGrowth = false;   // dynamics satisfy |f| <= F(1+|x|) instead of |f| <= F
    bool cIntersectsD = false;   // sampled at load unless declared in the file
    double boundaryTol = 1e-9;

    int chartCount() const { return static_cast<int>(charts.size()); }
    const Chart& chart(int i) const { return charts.at(i); }

    Vec f(int chart, std::span<const double> x, double t, std::span<const double> u) const;
    double K(int chart, std::span<const double> x, double t, std::span<const double> u) const;
    HybridState g(const HybridState& from, int vIndex) const;
    double Ca(const HybridState& from, int vIndex) const;
    double Cc(const HybridState& from, const HybridState& dest) const;
    double h(const HybridState& at) const;
    bool hasOracle() const { return !oracle.empty(); }
    double oracleValue(const HybridState& at) const;

    // Dynamics bound on a ball of the given radius: F or F(1+radius).
    double dynamicsBound(double radius) const {
        return linearGrowth ? constants.F * (1.0 + radius) : constants.F;
    }

    // Point-set membership against the declared tolerance.
    bool onA(const HybridState& s, double tol) const;
    bool onC(const HybridState& s, double tol) const;
    bool inD(const HybridState& s, double tol) const;
};

HybridModel model_from_json(const nlohmann::json& doc);
HybridModel load_model(const std::string& path);

struct CheckEntry {
    std::string name;
    bool pass = false;
    double margin = 0.0;  // how far inside the requirement (negative = violated)
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckEntry> entries;
    std::uint64_t seed = 0;
    int sampleDensity = 0;

    bool all_pass() const;
    const CheckEntry* find(const std::string& name) const;
    nlohmann::json to_json() const;
};

// Samples the standing assumptions: separation (A6), destination radius (A2),
// transversality (A5), dynamics bounds (A4), jump landing (A3), jump-cost
// lower bound (C2), cost growth and lambda > kL (C1 + Theorem hypotheses).
// Failures are report entries, never faults.
ValidationReport validate_model(const HybridModel& model, int sampleDensity = 200,
                                std::uint64_t seed = 0);

}  // namespace hybridqvi

#endif
