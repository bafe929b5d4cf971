// The nonlocal jump operators M and N, the Hamiltonian in stationary and
// time-dependent form, the semi-Lagrangian continuation update, and the
// growth-conditioning transform w = u e^{-eta xi}.
#ifndef HYBRIDQVI_OPERATORS_HPP
#define HYBRIDQVI_OPERATORS_HPP

#include <span>

#include "hybridqvi/grid.hpp"
#include "hybridqvi/model.hpp"

namespace hybridqvi {

// Cutoff-weighted change of variable. xi vanishes on |x| <= R, equals
// sqrt(1+|x|^2) for |x| > 2R and blends monotonically in between, so the
// transform is the identity wherever jumps land.
struct GrowthTransform {
    double eta = 0;
    double R = 0;

    static GrowthTransform make(const HybridModel& model, double etaFraction = 0.5);

    double xi(std::span<const double> x) const;
    double weight(std::span<const double> x) const;  // e^{-eta xi(x)}
};

ValueField to_bounded(const ValueField& u, const GrowthTransform& tr);
ValueField from_bounded(const ValueField& w, const GrowthTransform& tr);

struct OpResult {
    double value = 0;
    int argIndex = -1;  // v-sample index (M) or destination index (N)
};

// M phi(x) = min_v { phi(g(x,v)) + C_a(x,v) }, ties to the lowest v index.
OpResult M_op(const ValueField& V, const HybridState& x, const HybridModel& model);

// N phi(x) = min over the destination samples of { phi(x') + C_c(x,x') }.
OpResult N_op(const ValueField& V, const HybridState& x, const HybridModel& model,
              std::span<const HybridState> destinations);

// H(x,p) = max_u { (-K(x,u) - f(x,u).p) / lambda }.
double hamiltonian_stationary(const HybridState& x, std::span<const double> p,
                              const HybridModel& model);

// H(t,x,p) = max_u { -K(t,x,u) - f(t,x,u).p }  (no 1/lambda factor).
double hamiltonian_time(double t, const HybridState& x, std::span<const double> p,
                        const HybridModel& model);

struct ContinuationResult {
    double value = 0;
    int uIndex = -1;
    double clampDist = 0;  // how far the foot point was clamped into the grid
};

// Stationary semi-Lagrangian update:
//   min_u { dt K(x,u) + e^{-lambda dt} V(x + dt f(x,u)) }.
ContinuationResult continuation_update(const ValueField& V, const HybridState& x,
                                       const HybridModel& model, double dt);

// Time form, evaluated against the next slice:
//   min_u { dt K(t,x,u) + Vnext(x + dt f(t,x,u)) }.
ContinuationResult continuation_update_time(const ValueField& Vnext, double t,
                                            const HybridState& x, const HybridModel& model,
                                            double dt);

}  // namespace hybridqvi

#endif
