#include "hybridqvi/stationary.hpp"

#include <cmath>

namespace hybridqvi {

double default_dt(const HybridModel& model, const ModelGrid& grid) {
    double hMin = std::numeric_limits<double>::infinity();
    for (const auto& g : grid.charts) hMin = std::min(hMin, g.minSpacing());
    const double fhat = std::max(model.dynamicsBound(grid.truncRadius), 1e-12);
    return hMin / (2.0 * fhat);
}

ValueField bellman_sweep(const ValueField& V, const HybridModel& model,
                         const ModelGrid& grid, double dt, Policy* argmins,
                         double* clampMax) {
    ValueField out = V;
    if (argmins && argmins->entries.empty())
        argmins->entries.resize(grid.charts.size());
    double worstClamp = 0;

    for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
        const ChartGrid& g = grid.charts[ci];
        const auto& tags = grid.tags[ci];
        auto& dst = out.values[ci];
        std::vector<PolicyEntry>* pol = nullptr;
        if (argmins) {
            argmins->entries[ci].assign(g.nodeCount(), PolicyEntry{});
            pol = &argmins->entries[ci];
        }
        std::vector<double> clamps(clampMax ? g.nodeCount() : 0, 0.0);

        parallel_for(g.nodeCount(), [&](std::size_t i) {
            const HybridState s{static_cast<int>(ci), g.node(i)};
            PolicyEntry entry;
            entry.tag = tags[i];
            switch (tags[i]) {
                case NodeTag::A: {
                    const OpResult m = M_op(V, s, model);
                    dst[i] = m.value;
                    entry.vIndex = m.argIndex;
                    break;
                }
                case NodeTag::C: {
                    const OpResult n = N_op(V, s, model, grid.destinations);
                    const ContinuationResult c = continuation_update(V, s, model, dt);
                    if (!clamps.empty()) clamps[i] = c.clampDist;
                    if (n.value < c.value) {  // ties decline
                        dst[i] = n.value;
                        entry.cAction = CAction::Jump;
                        entry.destIndex = n.argIndex;
                        entry.uIndex = c.uIndex;
                    } else {
                        dst[i] = c.value;
                        entry.cAction = CAction::Decline;
                        entry.uIndex = c.uIndex;
                    }
                    break;
                }
                case NodeTag::Free: {
                    const ContinuationResult c = continuation_update(V, s, model, dt);
                    if (!clamps.empty()) clamps[i] = c.clampDist;
                    dst[i] = c.value;
                    entry.uIndex = c.uIndex;
                    break;
                }
            }
            if (pol) (*pol)[i] = entry;
        });

        for (double c : clamps) worstClamp = std::max(worstClamp, c);
    }
    if (clampMax) *clampMax = worstClamp;
    return out;
}

StationarySolution solve_stationary(const HybridModel& model, const ModelGrid& grid,
                                    const SolveConfig& config) {
    const double dt = config.dt > 0 ? config.dt : default_dt(model, grid);
    if (model.constants.lambda * dt <= 0)
        throw ModelError("solve_stationary: lambda * dt must be positive");
    const double stopAt = config.tol * (1.0 - std::exp(-model.constants.lambda * dt));

    StationarySolution sol;
    sol.diag.dt = dt;
    ValueField V = ValueField::zeros(grid);
    double prevDiff = -1;

    for (int iter = 1; iter <= config.maxIter; ++iter) {
        double clamp = 0;
        Policy argmins;
        ValueField next = bellman_sweep(V, model, grid, dt, &argmins, &clamp);
        const double diff = sup_distance(next, V);
        sol.diag.residualHistory.push_back(diff);
        if (prevDiff > 0) sol.diag.contractionRatios.push_back(diff / prevDiff);
        prevDiff = diff;
        sol.diag.clampErrorBound = std::max(sol.diag.clampErrorBound, clamp);
        sol.diag.iterations = iter;
        V = std::move(next);
        sol.policy = std::move(argmins);
        if (diff <= stopAt) {
            sol.diag.converged = true;
            break;
        }
    }
    sol.V = std::move(V);
    return sol;
}

QviResidual qvi_residual(const ValueField& V, const HybridModel& model,
                         const ModelGrid& grid, double dt) {
    QviResidual res;
    for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
        const ChartGrid& g = grid.charts[ci];
        const auto& tags = grid.tags[ci];
        const auto& vals = V.values[ci];
        std::vector<double> local(g.nodeCount(), 0.0);
        std::vector<std::uint8_t> kind(g.nodeCount(), 0);
        parallel_for(g.nodeCount(), [&](std::size_t i) {
            const HybridState s{static_cast<int>(ci), g.node(i)};
            switch (tags[i]) {
                case NodeTag::A:
                    local[i] = std::abs(vals[i] - M_op(V, s, model).value);
                    kind[i] = 1;
                    break;
                case NodeTag::C: {
                    const double n = N_op(V, s, model, grid.destinations).value;
                    const double c = continuation_update(V, s, model, dt).value;
                    local[i] = std::abs(vals[i] - std::min(n, c));
                    kind[i] = 2;
                    break;
                }
                case NodeTag::Free:
                    local[i] = std::abs(vals[i] - continuation_update(V, s, model, dt).value);
                    kind[i] = 0;
                    break;
            }
        });
        for (std::size_t i = 0; i < local.size(); ++i) {
            if (kind[i] == 1)
                res.onA = std::max(res.onA, local[i]);
            else if (kind[i] == 2)
                res.onC = std::max(res.onC, local[i]);
            else
                res.onFree = std::max(res.onFree, local[i]);
        }
    }
    return res;
}

nlohmann::json SolveDiagnostics::to_json() const {
    nlohmann::json j;
    j["iterations"] = iterations;
    j["converged"] = converged;
    j["dt"] = dt;
    j["clamp_error_bound"] = clampErrorBound;
    j["residual_history"] = residualHistory;
    j["contraction_ratios"] = contractionRatios;
    return j;
}

nlohmann::json policy_to_json(const Policy& policy, const GridSpec& spec) {
    nlohmann::json j;
    j["grid_h"] = spec.h;
    j["trunc_radius"] = spec.truncRadius;
    j["charts"] = nlohmann::json::array();
    for (const auto& chartEntries : policy.entries) {
        nlohmann::json rows = nlohmann::json::array();
        for (const PolicyEntry& e : chartEntries)
            rows.push_back({static_cast<int>(e.tag), e.uIndex, e.vIndex,
                            static_cast<int>(e.cAction), e.destIndex});
        j["charts"].push_back(std::move(rows));
    }
    return j;
}

Policy policy_from_json(const nlohmann::json& doc, const HybridModel& model,
                        ModelGrid& gridOut) {
    GridSpec spec;
    spec.h = doc.at("grid_h").get<double>();
    spec.truncRadius = doc.at("trunc_radius").get<double>();
    gridOut = ModelGrid::build(model, spec);
    Policy p;
    const auto& charts = doc.at("charts");
    if (charts.size() != gridOut.charts.size())
        throw ModelError("policy file does not match the model's chart count");
    for (std::size_t ci = 0; ci < charts.size(); ++ci) {
        std::vector<PolicyEntry> entries;
        entries.reserve(charts[ci].size());
        for (const auto& row : charts[ci]) {
            PolicyEntry e;
            e.tag = static_cast<NodeTag>(row.at(0).get<int>());
            e.uIndex = row.at(1).get<int>();
            e.vIndex = row.at(2).get<int>();
            e.cAction = static_cast<CAction>(row.at(3).get<int>());
            e.destIndex = row.at(4).get<int>();
            entries.push_back(e);
        }
        if (entries.size() != gridOut.charts[ci].nodeCount())
            throw ModelError("policy file does not match the rebuilt grid");
        p.entries.push_back(std::move(entries));
    }
    return p;
}

}  // namespace hybridqvi
