#include "hybridqvi/operators.hpp"

#include <cmath>

namespace hybridqvi {

GrowthTransform GrowthTransform::make(const HybridModel& model, double etaFraction) {
    if (etaFraction <= 0 || etaFraction >= 1)
        throw ModelError("GrowthTransform: eta fraction must lie in (0,1)");
    GrowthTransform tr;
    tr.R = model.constants.R;
    tr.eta = etaFraction * model.constants.lambda / model.constants.F;
    return tr;
}

double GrowthTransform::xi(std::span<const double> x) const {
    const double r = norm(x);
    if (r <= R) return 0.0;
    const double far = std::sqrt(1.0 + r * r);
    if (r >= 2.0 * R) return far;
    // quintic smoothstep blend on (R, 2R)
    const double s = (r - R) / R;
    const double blend = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    return blend * far;
}

double GrowthTransform::weight(std::span<const double> x) const {
    return std::exp(-eta * xi(x));
}

namespace {

ValueField apply_weight(const ValueField& f, const GrowthTransform& tr, bool inverse) {
    ValueField out = f;
    for (std::size_t c = 0; c < out.grids.size(); ++c) {
        const ChartGrid& g = out.grids[c];
        for (std::size_t i = 0; i < out.values[c].size(); ++i) {
            const Vec x = g.node(i);
            const double w = tr.weight(x);
            out.values[c][i] = inverse ? out.values[c][i] / w : out.values[c][i] * w;
        }
    }
    return out;
}

}  // namespace

ValueField to_bounded(const ValueField& u, const GrowthTransform& tr) {
    return apply_weight(u, tr, false);
}

ValueField from_bounded(const ValueField& w, const GrowthTransform& tr) {
    return apply_weight(w, tr, true);
}

OpResult M_op(const ValueField& V, const HybridState& x, const HybridModel& model) {
    const std::size_t nv = model.controls.vSamples.size();
    if (nv == 0) throw ModelError("M_op: empty v-sample set");
    OpResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t vi = 0; vi < nv; ++vi) {
        const HybridState dest = model.g(x, static_cast<int>(vi));
        const double val = V.eval(dest) + model.Ca(x, static_cast<int>(vi));
        if (val < best.value) {  // strict: ties keep the lowest index
            best.value = val;
            best.argIndex = static_cast<int>(vi);
        }
    }
    return best;
}

OpResult N_op(const ValueField& V, const HybridState& x, const HybridModel& model,
              std::span<const HybridState> destinations) {
    if (destinations.empty()) throw ModelError("N_op: empty destination set");
    OpResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t di = 0; di < destinations.size(); ++di) {
        const HybridState& dest = destinations[di];
        const double val = V.eval(dest) + model.Cc(x, dest);
        if (val < best.value) {
            best.value = val;
            best.argIndex = static_cast<int>(di);
        }
    }
    return best;
}

double hamiltonian_stationary(const HybridState& x, std::span<const double> p,
                              const HybridModel& model) {
    if (p.size() != x.x.size()) throw ModelError("hamiltonian: gradient dimension mismatch");
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec& u : model.controls.uSamples) {
        const Vec fx = model.f(x.chart, x.x, 0.0, u);
        const double val = (-model.K(x.chart, x.x, 0.0, u) - dot(fx, p)) / model.constants.lambda;
        best = std::max(best, val);
    }
    return best;
}

double hamiltonian_time(double t, const HybridState& x, std::span<const double> p,
                        const HybridModel& model) {
    if (p.size() != x.x.size()) throw ModelError("hamiltonian: gradient dimension mismatch");
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec& u : model.controls.uSamples) {
        const Vec fx = model.f(x.chart, x.x, t, u);
        best = std::max(best, -model.K(x.chart, x.x, t, u) - dot(fx, p));
    }
    return best;
}

ContinuationResult continuation_update(const ValueField& V, const HybridState& x,
                                       const HybridModel& model, double dt) {
    const double decay = std::exp(-model.constants.lambda * dt);
    ContinuationResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t ui = 0; ui < model.controls.uSamples.size(); ++ui) {
        const Vec& u = model.controls.uSamples[ui];
        const Vec foot = axpy(x.x, dt, model.f(x.chart, x.x, 0.0, u));
        double clamp = 0;
        const double val = dt * model.K(x.chart, x.x, 0.0, u) +
                           decay * V.grids[x.chart].interpolate(V.values[x.chart], foot, &clamp);
        if (val < best.value) {
            best.value = val;
            best.uIndex = static_cast<int>(ui);
            best.clampDist = clamp;
        }
    }
    return best;
}

ContinuationResult continuation_update_time(const ValueField& Vnext, double t,
                                            const HybridState& x, const HybridModel& model,
                                            double dt) {
    ContinuationResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t ui = 0; ui < model.controls.uSamples.size(); ++ui) {
        const Vec& u = model.controls.uSamples[ui];
        const Vec foot = axpy(x.x, dt, model.f(x.chart, x.x, t, u));
        double clamp = 0;
        const double val =
            dt * model.K(x.chart, x.x, t, u) +
            Vnext.grids[x.chart].interpolate(Vnext.values[x.chart], foot, &clamp);
        if (val < best.value) {
            best.value = val;
            best.uIndex = static_cast<int>(ui);
            best.clampDist = clamp;
        }
    }
    return best;
}

}  // namespace hybridqvi
