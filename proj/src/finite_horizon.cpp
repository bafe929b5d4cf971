#include "hybridqvi/finite_horizon.hpp"

#include <cmath>

namespace hybridqvi {

bool check_triangle(const HybridModel& model, int sampleDensity, std::uint64_t seed,
                    double tol) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);

    // z candidates: points of C ∩ D (the only place a double jump can relay)
    std::vector<HybridState> relays;
    std::vector<HybridState> cPoints, dPoints;
    for (int i = 0; i < model.chartCount(); ++i) {
        const Chart& ch = model.chart(i);
        const BBox clip = ch.domain.bounding_box(
            BBox::cube(ch.dim, default_trunc_radius(model)));
        for (Vec& x : sample_volume(ch.D, clip, sampleDensity, rng)) {
            if (!ch.C.empty() && ch.C.signed_distance(x) <= model.boundaryTol)
                relays.push_back(HybridState{i, x});
            dPoints.push_back(HybridState{i, std::move(x)});
        }
        for (Vec& x : sample_volume(ch.C, clip, sampleDensity, rng))
            cPoints.push_back(HybridState{i, std::move(x)});
        for (Vec& x : sample_boundary(ch.C, clip, sampleDensity / 2, rng))
            cPoints.push_back(HybridState{i, std::move(x)});
    }
    if (relays.empty()) return true;  // vacuous

    for (const HybridState& x : cPoints)
        for (const HybridState& y : dPoints)
            for (const HybridState& z : relays) {
                const double direct = model.Cc(x, y);
                const double viaZ = model.Cc(x, z) + model.Cc(z, y);
                if (direct > viaZ + tol) return false;
            }
    return true;
}

TerminalData build_terminal_data(const HybridModel& model, const ModelGrid& grid,
                                 int sampleDensity, std::uint64_t seed) {
    const bool triangleOk =
        !model.cIntersectsD || check_triangle(model, sampleDensity, seed);
    if (!triangleOk)
        throw ModelError(
            "build_terminal_data: C∩D is nonempty and C_c fails the triangle condition; "
            "no terminal construction is available for such data");

    TerminalData td;
    td.triangleChecked = true;

    // step (i): h everywhere (free nodes keep it)
    ValueField h = ValueField::zeros(grid);
    for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
        const ChartGrid& g = grid.charts[ci];
        for (std::size_t i = 0; i < g.nodeCount(); ++i)
            h.values[ci][i] = model.h(HybridState{static_cast<int>(ci), g.node(i)});
    }
    td.field = h;
    td.field.time = std::nullopt;  // set by the march
    td.constructionLog.resize(grid.charts.size());
    for (std::size_t ci = 0; ci < grid.charts.size(); ++ci)
        td.constructionLog[ci].assign(grid.charts[ci].nodeCount(), TerminalStep::CopyH);

    // step (ii): C nodes take min(h, Nh), with N evaluated on the raw h field
    for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
        const ChartGrid& g = grid.charts[ci];
        for (std::size_t i = 0; i < g.nodeCount(); ++i) {
            if (grid.tags[ci][i] != NodeTag::C) continue;
            const HybridState s{static_cast<int>(ci), g.node(i)};
            const double nh = N_op(h, s, model, grid.destinations).value;
            td.field.values[ci][i] = std::min(h.values[ci][i], nh);
            td.constructionLog[ci][i] = TerminalStep::MinHNh;
        }
    }

    // step (iii): A nodes take M h~, reading h~ which is final on D
    for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
        const ChartGrid& g = grid.charts[ci];
        for (std::size_t i = 0; i < g.nodeCount(); ++i) {
            if (grid.tags[ci][i] != NodeTag::A) continue;
            const HybridState s{static_cast<int>(ci), g.node(i)};
            td.field.values[ci][i] = M_op(td.field, s, model).value;
            td.constructionLog[ci][i] = TerminalStep::MOfHtilde;
        }
    }

    td.residual = terminal_residual(td.field, model, grid);
    return td;
}

QviResidual terminal_residual(const ValueField& field, const HybridModel& model,
                              const ModelGrid& grid) {
    QviResidual res;
    for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
        const ChartGrid& g = grid.charts[ci];
        for (std::size_t i = 0; i < g.nodeCount(); ++i) {
            const HybridState s{static_cast<int>(ci), g.node(i)};
            const double val = field.values[ci][i];
            switch (grid.tags[ci][i]) {
                case NodeTag::A:
                    res.onA = std::max(res.onA, std::abs(val - M_op(field, s, model).value));
                    break;
                case NodeTag::C: {
                    const double nv = N_op(field, s, model, grid.destinations).value;
                    const double hv = model.h(s);
                    res.onC = std::max(res.onC,
                                       std::abs(std::max(val - nv, val - hv)));
                    break;
                }
                case NodeTag::Free:
                    res.onFree = std::max(res.onFree, std::abs(val - model.h(s)));
                    break;
            }
        }
    }
    return res;
}

BackwardResult backward_march(const HybridModel& model, const ModelGrid& grid,
                              const TimeGrid& timeGrid, const TerminalData& terminal,
                              const BackwardConfig& config) {
    if (timeGrid.steps < 1) throw ModelError("backward_march: need at least one step");
    const double dt = timeGrid.dt();
    double hMin = std::numeric_limits<double>::infinity();
    for (const auto& g : grid.charts) hMin = std::min(hMin, g.minSpacing());
    const double fhat = std::max(model.dynamicsBound(grid.truncRadius), 1e-12);
    if (dt > hMin / (2.0 * fhat) * (1.0 + 1e-9))
        throw ModelError("backward_march: dt violates the CFL restriction h/(2 Fhat); "
                         "increase steps or coarsen the grid");

    BackwardResult out;
    out.timeGrid = timeGrid;
    out.slices.resize(timeGrid.steps + 1);
    out.policies.resize(timeGrid.steps);
    out.subIterations.assign(timeGrid.steps, 0);
    out.sliceResiduals.assign(timeGrid.steps, 0.0);

    out.slices[timeGrid.steps] = terminal.field;
    out.slices[timeGrid.steps].time = timeGrid.T;

    for (int n = timeGrid.steps - 1; n >= 0; --n) {
        const ValueField& next = out.slices[n + 1];
        // f and K sampled at the slice midpoint: second order in time for
        // smooth data at no structural cost.
        const double tMid = (n + 0.5) * dt;
        ValueField cur = next;
        cur.time = n * dt;
        Policy pol;
        pol.entries.resize(grid.charts.size());
        for (std::size_t ci = 0; ci < grid.charts.size(); ++ci)
            pol.entries[ci].assign(grid.charts[ci].nodeCount(), PolicyEntry{});

        // pass 1: free nodes from the next slice
        for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
            const ChartGrid& g = grid.charts[ci];
            auto& vals = cur.values[ci];
            auto& entries = pol.entries[ci];
            parallel_for(g.nodeCount(), [&](std::size_t i) {
                entries[i].tag = grid.tags[ci][i];
                if (grid.tags[ci][i] != NodeTag::Free) return;
                const HybridState s{static_cast<int>(ci), g.node(i)};
                const ContinuationResult c = continuation_update_time(next, tMid, s, model, dt);
                vals[i] = c.value;
                entries[i].uIndex = c.uIndex;
            });
        }

        // pass 2: C nodes; sub-iterate only if destinations overlap C
        int subIters = 0;
        double lastChange = 0.0;
        const int iterCap = model.cIntersectsD ? config.maxSubIter : 1;
        for (int it = 0; it < iterCap; ++it) {
            double change = 0.0;
            for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
                const ChartGrid& g = grid.charts[ci];
                auto& vals = cur.values[ci];
                auto& entries = pol.entries[ci];
                std::vector<double> fresh(vals);
                parallel_for(g.nodeCount(), [&](std::size_t i) {
                    if (grid.tags[ci][i] != NodeTag::C) return;
                    const HybridState s{static_cast<int>(ci), g.node(i)};
                    const OpResult nv = N_op(cur, s, model, grid.destinations);
                    const ContinuationResult c = continuation_update_time(next, tMid, s, model, dt);
                    PolicyEntry e = entries[i];
                    if (nv.value < c.value) {
                        fresh[i] = nv.value;
                        e.cAction = CAction::Jump;
                        e.destIndex = nv.argIndex;
                        e.uIndex = c.uIndex;
                    } else {
                        fresh[i] = c.value;
                        e.cAction = CAction::Decline;
                        e.uIndex = c.uIndex;
                    }
                    entries[i] = e;
                });
                change = std::max(change, sup_diff(fresh, vals));
                vals = std::move(fresh);
            }
            ++subIters;
            lastChange = change;
            if (change <= config.subTol) break;
        }
        if (model.cIntersectsD && lastChange > config.subTol)
            throw ModelError("backward_march: within-slice sub-iteration did not settle "
                             "(worst change " + std::to_string(lastChange) + ")");
        out.subIterations[n] = subIters;
        out.sliceResiduals[n] = lastChange;

        // pass 3: A nodes read D values, final after passes 1-2
        for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
            const ChartGrid& g = grid.charts[ci];
            auto& vals = cur.values[ci];
            auto& entries = pol.entries[ci];
            parallel_for(g.nodeCount(), [&](std::size_t i) {
                if (grid.tags[ci][i] != NodeTag::A) return;
                const HybridState s{static_cast<int>(ci), g.node(i)};
                const OpResult m = M_op(cur, s, model);
                vals[i] = m.value;
                entries[i].vIndex = m.argIndex;
            });
        }

        out.policies[n] = std::move(pol);
        out.slices[n] = std::move(cur);
    }
    return out;
}

std::vector<double> terminal_consistency_check(const BackwardResult& result,
                                               const TerminalData& terminal, double r,
                                               int nLast) {
    std::vector<double> diffs;
    const int total = static_cast<int>(result.slices.size());
    const int first = std::max(0, total - nLast);
    for (int n = first; n < total; ++n) {
        double worst = 0.0;
        for (std::size_t ci = 0; ci < result.slices[n].grids.size(); ++ci) {
            const ChartGrid& g = result.slices[n].grids[ci];
            for (std::size_t i = 0; i < g.nodeCount(); ++i) {
                if (norm(g.node(i)) > r) continue;
                worst = std::max(worst, std::abs(result.slices[n].values[ci][i] -
                                                 terminal.field.values[ci][i]));
            }
        }
        diffs.push_back(worst);
    }
    return diffs;
}

}  // namespace hybridqvi
