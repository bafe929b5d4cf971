// Infinite-horizon discounted solver: Jacobi iteration of the discretized
// QVI (V = MV on A, V = min{NV, continuation} on C, continuation elsewhere)
// from V0 = 0, with argmin extraction and residual diagnostics.
#ifndef HYBRIDQVI_STATIONARY_HPP
#define HYBRIDQVI_STATIONARY_HPP

#include <json.hpp>

#include "hybridqvi/operators.hpp"
#include "hybridqvi/policy.hpp"

namespace hybridqvi {

struct SolveConfig {
    double dt = 0;        // 0 -> h_min / (2 Fhat)
    double tol = 1e-6;
    int maxIter = 200000;
};

struct SolveDiagnostics {
    int iterations = 0;
    std::vector<double> residualHistory;
    std::vector<double> contractionRatios;
    double clampErrorBound = 0;  // max foot-clamp displacement seen
    bool converged = false;
    double dt = 0;
    nlohmann::json to_json() const;
};

double default_dt(const HybridModel& model, const ModelGrid& grid);

// One Jacobi sweep into a fresh field. Optionally records the per-node argmin
// choices and the largest clamp displacement.
ValueField bellman_sweep(const ValueField& V, const HybridModel& model,
                         const ModelGrid& grid, double dt, Policy* argmins = nullptr,
                         double* clampMax = nullptr);

struct StationarySolution {
    ValueField V;
    Policy policy;
    SolveDiagnostics diag;
};

// Requires a passing validate_model (asserted by the CLI, not re-checked
// here). Stops when the sweep difference is at most tol (1 - e^{-lambda dt}),
// which bounds the distance to the discrete fixed point by tol.
StationarySolution solve_stationary(const HybridModel& model, const ModelGrid& grid,
                                    const SolveConfig& config = {});

struct QviResidual {
    double onA = 0;
    double onC = 0;
    double onFree = 0;
    double max() const { return std::max(onA, std::max(onC, onFree)); }
};

QviResidual qvi_residual(const ValueField& V, const HybridModel& model,
                         const ModelGrid& grid, double dt);

nlohmann::json policy_to_json(const Policy& policy, const GridSpec& spec);
Policy policy_from_json(const nlohmann::json& doc, const HybridModel& model,
                        ModelGrid& gridOut);

}  // namespace hybridqvi

#endif
