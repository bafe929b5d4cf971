// Finite-horizon solver: builds the effective terminal data h-tilde by the
// stationary terminal construction, then marches the time-dependent QVI
// backward from T to 0.
#ifndef HYBRIDQVI_FINITE_HORIZON_HPP
#define HYBRIDQVI_FINITE_HORIZON_HPP

#include <cstdint>

#include "hybridqvi/operators.hpp"
#include "hybridqvi/policy.hpp"
#include "hybridqvi/stationary.hpp"

namespace hybridqvi {

struct TimeGrid {
    double T = 1;
    int steps = 100;
    double dt() const { return T / steps; }
};

// Samples C_c(x,y) <= C_c(x,z) + C_c(z,y) over x in C, y in D, z in C∩D.
// Vacuously true when C∩D is empty.
bool check_triangle(const HybridModel& model, int sampleDensity = 200,
                    std::uint64_t seed = 0, double tol = 1e-9);

enum class TerminalStep : std::uint8_t { CopyH = 0, MinHNh = 1, MOfHtilde = 2 };

struct TerminalData {
    ValueField field;
    std::vector<std::vector<TerminalStep>> constructionLog;
    bool triangleChecked = false;
    QviResidual residual;  // of the terminal stationary system
};

// Three-step construction: copy h off A and C; h~ = min(h, Nh) on C;
// h~ = M h~ on A (well-defined because h~ is already final on D). Refuses
// when C∩D is nonempty and the triangle condition fails, since no
// construction is available in that case.
TerminalData build_terminal_data(const HybridModel& model, const ModelGrid& grid,
                                 int sampleDensity = 200, std::uint64_t seed = 0);

// Residual of the terminal system for an arbitrary field.
QviResidual terminal_residual(const ValueField& field, const HybridModel& model,
                              const ModelGrid& grid);

struct BackwardConfig {
    double subTol = 1e-12;
    int maxSubIter = 200;
};

struct BackwardResult {
    std::vector<ValueField> slices;   // index n holds time n*dt; last is T
    std::vector<Policy> policies;     // one per slice except the terminal one
    std::vector<int> subIterations;   // per computed slice
    std::vector<double> sliceResiduals;
    TimeGrid timeGrid;
};

// Backward march of QVI-T. Within a slice the update order is free -> C -> A;
// the C pass sub-iterates only when C∩D is nonempty. dt must satisfy the CFL
// restriction dt <= h_min / (2 Fhat) with Fhat the dynamics bound on the
// truncated domain.
BackwardResult backward_march(const HybridModel& model, const ModelGrid& grid,
                              const TimeGrid& timeGrid, const TerminalData& terminal,
                              const BackwardConfig& config = {});

// Sup of |V(t,x) - h~(x)| over grid nodes with |x| <= r, for the last nLast
// slices in increasing time order (the final entry is t = T and must be 0).
std::vector<double> terminal_consistency_check(const BackwardResult& result,
                                               const TerminalData& terminal, double r,
                                               int nLast = 5);

}  // namespace hybridqvi

#endif
