// Executable checks derived from the paper, grouped into suites: assumption
// audits, operator properties, ODE estimates, trajectory properties, grid
// convergence, the discrete comparison shadow, and finite-horizon properties.
// Every invariant declared by the other modules lives in exactly one suite.
#ifndef HYBRIDQVI_VERIFICATION_HPP
#define HYBRIDQVI_VERIFICATION_HPP

#include <functional>
#include <string>

#include <json.hpp>

#include "hybridqvi/finite_horizon.hpp"
#include "hybridqvi/stationary.hpp"
#include "hybridqvi/trajectory.hpp"

namespace hybridqvi {

struct PropertyCheck {
    std::string name;
    bool pass = false;
    double margin = 0;      // slack against the bound; negative = violated
    std::string witness;
};

struct PropertyReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<PropertyCheck> checks;

    bool all_pass() const;
    const PropertyCheck* find(const std::string& name) const;
    nlohmann::json to_json() const;
    void print(std::ostream& out) const;
};

PropertyReport run_assumption_audit(const HybridModel& model, int sampleDensity = 200,
                                    std::uint64_t seed = 0);

PropertyReport run_operator_properties(const HybridModel& model, const ModelGrid& grid,
                                       int trials = 100, std::uint64_t seed = 0);

PropertyReport run_ode_estimates(const HybridModel& model, int trials = 100,
                                 std::uint64_t seed = 0);

PropertyReport run_trajectory_properties(const HybridModel& model, const ModelGrid& grid,
                                         const SolveConfig& config = {}, int starts = 10,
                                         std::uint64_t seed = 0);

// Discrete shadow of the comparison theorem: a strict super/subsolution pair
// around the solve stays ordered under iterated sweeps), plus the solver's
// contraction, monotone-from-zero and nonnegativity diagnostics.
PropertyReport run_comparison_shadow(const HybridModel& model, const ModelGrid& grid,
                                     const SolveConfig& config = {}, double margin = 0.1,
                                     int sweeps = 100);

// True when the two fields stay ordered (sub <= super nodewise) through the
// given number of sweeps. Used by the suite and by negative-control tests.
bool comparison_shadow_ordered(const HybridModel& model, const ModelGrid& grid, double dt,
                               ValueField sub, ValueField super, int sweeps,
                               double* worstGap = nullptr);

struct ConvergenceStudy {
    std::vector<GridSpec> levels;
    std::vector<double> dts;
    std::vector<double> errors;  // sup-norm error against the oracle per level
    double empiricalOrder = 0;   // fitted slope of log error vs log h
    nlohmann::json to_json() const;
};

using Oracle = std::function<double(const HybridState&)>;

// Solves at each refinement level and fits the empirical order. Levels must
// strictly refine in h.
ConvergenceStudy run_convergence(const HybridModel& model, const Oracle& oracle,
                                 std::span<const GridSpec> levels,
                                 const SolveConfig& config = {});

PropertyReport run_finite_horizon_properties(const HybridModel& model,
                                             const ModelGrid& grid,
                                             const TimeGrid& timeGrid,
                                             std::uint64_t seed = 0);

}  // namespace hybridqvi

#endif
