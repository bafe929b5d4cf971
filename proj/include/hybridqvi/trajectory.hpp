// Trajectory machinery: fixed-step RK4 integration of the per-chart ODE with
// bisection localization of A/C boundary hits, jump execution, and the
// discounted (or finite-horizon) cost ledger.
#ifndef HYBRIDQVI_TRAJECTORY_HPP
#define HYBRIDQVI_TRAJECTORY_HPP

#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "hybridqvi/model.hpp"
#include "hybridqvi/policy.hpp"

namespace hybridqvi {

// Control signal that is constant on [times[i], times[i+1]); the last value
// extends to +inf. times must be nondecreasing and start at or before t0.
struct PiecewiseControl {
    std::vector<double> times;
    std::vector<Vec> values;

    static PiecewiseControl constant(Vec u);
    const Vec& at(double t) const;
};

struct JumpEvent {
    enum class Kind : int { Autonomous, Controlled };
    double time = 0;
    Kind kind = Kind::Autonomous;
    HybridState pre, post;
    int vIndex = -1;              // autonomous jumps
    double cost = 0;              // raw C_a or C_c value
    double discountedCost = 0;    // cost * e^{-lambda t} (stationary) or cost
};

struct Arc {
    double t0 = 0, t1 = 0;
    int chart = 0;
    std::vector<double> times;
    std::vector<Vec> states;
    double costIntegral = 0;  // running-cost contribution of this arc
};

struct Hit {
    enum class Kind : int { A, C };
    Kind kind;
    double time;
    HybridState state;
};

struct TrajectoryRecord {
    std::vector<Arc> arcs;
    std::vector<JumpEvent> events;
    double runningCostIntegral = 0;
    double jumpCostTotal = 0;
    double terminalCost = 0;  // finite horizon only
    double totalCost = 0;
    bool truncated = false;       // stationary mode
    double truncationTime = 0;
    double truncationBound = 0;   // discounted tail bound at truncation

    // Ledger sum re-evaluated from the stored parts.
    double ledger_recompute() const;

    void write_jsonl(std::ostream& out) const;
    void write_summary_csv(std::ostream& out) const;
};

struct IntegrateOptions {
    double step = 0;          // 0 -> min(0.01, beta / (10 Fhat))
    double hitTimeTol = 1e-10;
    bool detectC = true;
    // When resuming after a declined controlled jump: ignore C contact until
    // the path has left C once (re-contact is a new decision point).
    bool armCOnlyAfterExit = false;
};

struct ArcResult {
    Arc arc;
    std::optional<Hit> hit;
};

// Integrates Eq. (1)-(2) inside one chart until tMax or the first A/C hit.
// Leaving the closed domain anywhere but through A is a model-consistency
// fault and throws ModelError.
ArcResult integrate_arc(const HybridModel& model, const HybridState& x0, double t0,
                        const PiecewiseControl& u, double tMax,
                        const IntegrateOptions& opt = {});

// g(x, v) with the landing checks: result must lie in D and be beta-separated
// from A (up to tolerance).
HybridState apply_autonomous_jump(const HybridModel& model, const HybridState& xOnA,
                                  int vIndex);

struct StationaryHorizon {
    double tailTol = 1e-6;
};
struct FiniteHorizon {
    double s = 0;
    double T = 1;
};
using Horizon = std::variant<StationaryHorizon, FiniteHorizon>;

// Explicit strategy theta = (u(.), v, xi_i, X(xi_i)').
struct ExplicitStrategy {
    PiecewiseControl u;
    std::vector<int> vSequence;  // per autonomous event; last entry repeats
    std::vector<std::pair<double, HybridState>> controlledJumps;  // (time, destination)
};

struct SimulateOptions {
    double step = 0;
    int maxJumps = 1000;
};

TrajectoryRecord simulate(const HybridModel& model, const HybridState& x0,
                          const ExplicitStrategy& strategy, const Horizon& horizon,
                          const SimulateOptions& opt = {});

// Feedback simulation: continuous control and discrete actions are read from
// the policy at the nearest grid node.
TrajectoryRecord simulate(const HybridModel& model, const HybridState& x0,
                          const Policy& policy, const ModelGrid& grid,
                          const Horizon& horizon, const SimulateOptions& opt = {});

}  // namespace hybridqvi

#endif
