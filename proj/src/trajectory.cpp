#include "hybridqvi/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>

#include <json.hpp>

namespace hybridqvi {

PiecewiseControl PiecewiseControl::constant(Vec u) {
    PiecewiseControl c;
    c.times = {0.0};
    c.values = {std::move(u)};
    return c;
}

const Vec& PiecewiseControl::at(double t) const {
    if (values.empty()) throw ModelError("control signal is empty");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin() - 1);
    return values[std::min(i, values.size() - 1)];
}

namespace {

enum class CostMode { None, Discounted, Plain };

using ControlFn = std::function<const Vec&(double, const HybridState&)>;

struct StepOut {
    Vec x;
    double dc = 0;
};

// One RK4 step of the chart ODE, augmented with the running-cost integrand
// (K e^{-lambda t} or plain K).
StepOut rk4_step(const HybridModel& m, int chart, const Vec& x, double t, double dt,
                 const Vec& u, CostMode mode, double lambda) {
    auto rate = [&](const Vec& xs, double ts) -> double {
        switch (mode) {
            case CostMode::None: return 0.0;
            case CostMode::Plain: return m.K(chart, xs, ts, u);
            case CostMode::Discounted: return m.K(chart, xs, ts, u) * std::exp(-lambda * ts);
        }
        return 0.0;
    };
    const Vec k1 = m.f(chart, x, t, u);
    const double c1 = rate(x, t);
    const Vec x2 = axpy(x, dt / 2, k1);
    const Vec k2 = m.f(chart, x2, t + dt / 2, u);
    const double c2 = rate(x2, t + dt / 2);
    const Vec x3 = axpy(x, dt / 2, k2);
    const Vec k3 = m.f(chart, x3, t + dt / 2, u);
    const double c3 = rate(x3, t + dt / 2);
    const Vec x4 = axpy(x, dt, k3);
    const Vec k4 = m.f(chart, x4, t + dt, u);
    const double c4 = rate(x4, t + dt);

    StepOut out;
    out.x.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out.x[i] = x[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    out.dc = dt / 6.0 * (c1 + 2 * c2 + 2 * c3 + c4);
    return out;
}

struct ImplOptions {
    double step = 0;
    double hitTimeTol = 1e-10;
    bool detectC = true;
    bool armCOnlyAfterExit = false;
    CostMode costMode = CostMode::None;
};

double default_step(const HybridModel& model, const HybridState& x0) {
    const double radius = std::max(norm(x0.x), 4.0 * model.constants.R);
    const double fhat = std::max(model.dynamicsBound(radius), 1e-12);
    return std::min(0.01, model.constants.beta / (10.0 * fhat));
}

ArcResult integrate_arc_impl(const HybridModel& model, const HybridState& x0, double t0,
                             const ControlFn& control, double tMax, const ImplOptions& opt) {
    if (!(t0 < tMax)) throw ModelError("integrate_arc: t0 must be below tMax");
    const Chart& ch = model.chart(x0.chart);
    if (static_cast<int>(x0.x.size()) != ch.dim)
        throw ModelError("integrate_arc: state dimension mismatch");
    const double tol = model.boundaryTol;
    const double lambda = model.constants.lambda;
    const double step = opt.step > 0 ? opt.step : default_step(model, x0);

    ArcResult res;
    Arc& arc = res.arc;
    arc.chart = x0.chart;
    arc.t0 = t0;
    arc.times.push_back(t0);
    arc.states.push_back(x0.x);

    const bool hasA = !ch.A.empty();
    const bool hasC = !ch.C.empty() && opt.detectC;
    bool cArmed = hasC && !opt.armCOnlyAfterExit;

    // Hits at the very start: a state on (or inside) A jumps immediately;
    // same for a C contact when armed.
    if (hasA && ch.A.signed_distance(x0.x) <= tol) {
        arc.t1 = t0;
        res.hit = Hit{Hit::Kind::A, t0, x0};
        return res;
    }
    if (hasC) {
        const double sd = ch.C.signed_distance(x0.x);
        if (cArmed && sd <= tol) {
            arc.t1 = t0;
            res.hit = Hit{Hit::Kind::C, t0, x0};
            return res;
        }
        if (sd > tol) cArmed = true;
    }

    // Bisection refinement of the first time the region's signed distance
    // reaches zero inside (tBase, tBase+dt].
    auto locate = [&](const Region& region, const Vec& xBase, double tBase, double dt,
                      const Vec& u) {
        double loT = 0.0, hiT = dt;
        Vec hiX = rk4_step(model, x0.chart, xBase, tBase, dt, u, CostMode::None, lambda).x;
        while (hiT - loT > opt.hitTimeTol) {
            const double midT = 0.5 * (loT + hiT);
            Vec midX = rk4_step(model, x0.chart, xBase, tBase, midT, u, CostMode::None, lambda).x;
            if (region.signed_distance(midX) <= 0.0) {
                hiT = midT;
                hiX = std::move(midX);
            } else {
                loT = midT;
            }
        }
        return std::make_pair(tBase + hiT, hiX);
    };

    double t = t0;
    Vec x = x0.x;
    const long maxSteps = 4 + static_cast<long>((tMax - t0) / step) + 8;
    for (long s = 0; s < maxSteps && t < tMax - 1e-15; ++s) {
        const double dt = std::min(step, tMax - t);
        const Vec& u = control(t, HybridState{x0.chart, x});
        const StepOut next = rk4_step(model, x0.chart, x, t, dt, u, opt.costMode, lambda);

        const double sdA = hasA ? ch.A.signed_distance(next.x) : 1.0;
        const double sdC = hasC ? ch.C.signed_distance(next.x) : 1.0;

        if (hasA && sdA <= 0.0) {
            auto [hitT, hitX] = locate(ch.A, x, t, dt, u);
            if (opt.costMode != CostMode::None && hitT > t) {
                arc.costIntegral +=
                    rk4_step(model, x0.chart, x, t, hitT - t, u, opt.costMode, lambda).dc;
            }
            arc.t1 = hitT;
            arc.times.push_back(hitT);
            arc.states.push_back(hitX);
            res.hit = Hit{Hit::Kind::A, hitT, HybridState{x0.chart, hitX}};
            return res;
        }
        if (hasC && cArmed && sdC <= 0.0) {
            auto [hitT, hitX] = locate(ch.C, x, t, dt, u);
            if (opt.costMode != CostMode::None && hitT > t) {
                arc.costIntegral +=
                    rk4_step(model, x0.chart, x, t, hitT - t, u, opt.costMode, lambda).dc;
            }
            arc.t1 = hitT;
            arc.times.push_back(hitT);
            arc.states.push_back(hitX);
            res.hit = Hit{Hit::Kind::C, hitT, HybridState{x0.chart, hitX}};
            return res;
        }
        if (hasC && !cArmed && sdC > tol) cArmed = true;

        if (ch.domain.signed_distance(next.x) > tol) {
            throw ModelError(
                "trajectory left the closed chart domain away from A; the model violates "
                "boundary containment of the autonomous set");
        }

        t += dt;
        x = next.x;
        arc.costIntegral += next.dc;
        arc.times.push_back(t);
        arc.states.push_back(x);
    }
    arc.t1 = t;
    return res;
}

}  // namespace

ArcResult integrate_arc(const HybridModel& model, const HybridState& x0, double t0,
                        const PiecewiseControl& u, double tMax, const IntegrateOptions& opt) {
    ImplOptions impl;
    impl.step = opt.step;
    impl.hitTimeTol = opt.hitTimeTol;
    impl.detectC = opt.detectC;
    impl.armCOnlyAfterExit = opt.armCOnlyAfterExit;
    ControlFn fn = [&u](double t, const HybridState&) -> const Vec& { return u.at(t); };
    return integrate_arc_impl(model, x0, t0, fn, tMax, impl);
}

HybridState apply_autonomous_jump(const HybridModel& model, const HybridState& xOnA,
                                  int vIndex) {
    const double tol = model.boundaryTol;
    const Region& A = model.chart(xOnA.chart).A;
    if (A.empty() || A.signed_distance(xOnA.x) > tol)
        throw ModelError("apply_autonomous_jump: state is not on A");
    if (vIndex < 0 || vIndex >= static_cast<int>(model.controls.vSamples.size()))
        throw ModelError("apply_autonomous_jump: v index out of range");
    HybridState post = model.g(xOnA, vIndex);
    const Region& D = model.chart(post.chart).D;
    if (D.empty() || D.signed_distance(post.x) > tol)
        throw ModelError("apply_autonomous_jump: g landed outside D (model fault)");
    const Region& Apost = model.chart(post.chart).A;
    if (!Apost.empty() &&
        Apost.signed_distance(post.x) < model.constants.beta - 1e-6)
        throw ModelError("apply_autonomous_jump: landing is not beta-separated from A");
    return post;
}

namespace {

struct JumpCostBounds {
    double Kbar = 0;   // running-cost bound on the truncated visited region
    double Cbar = 0;   // bound on the discounted sum of future jump costs
};

// Sampled cost bounds over the charts, clipped to the audit radius. Used only
// for the stationary truncation bound which is recorded in the record.
JumpCostBounds sample_cost_bounds(const HybridModel& model, double radius) {
    JumpCostBounds b;
    std::mt19937_64 rng(12345);
    double jumpMax = 0;
    bool anyJumpSet = false;
    for (int i = 0; i < model.chartCount(); ++i) {
        const Chart& ch = model.chart(i);
        const BBox clip = ch.domain.bounding_box(BBox::cube(ch.dim, radius));
        for (const Vec& x : sample_volume(ch.domain, clip, 200, rng))
            for (const Vec& u : model.controls.uSamples)
                b.Kbar = std::max(b.Kbar, model.K(i, x, 0.0, u));
        std::vector<Vec> aPts = sample_boundary(ch.A, clip, 100, rng);
        for (auto& p : sample_volume(ch.A, clip, 100, rng)) aPts.push_back(std::move(p));
        for (const Vec& x : aPts)
            for (std::size_t vi = 0; vi < model.controls.vSamples.size(); ++vi) {
                jumpMax = std::max(jumpMax, model.Ca(HybridState{i, x}, static_cast<int>(vi)));
                anyJumpSet = true;
            }
        std::vector<Vec> cPts = sample_boundary(ch.C, clip, 100, rng);
        for (auto& p : sample_volume(ch.C, clip, 100, rng)) cPts.push_back(std::move(p));
        if (!cPts.empty()) {
            for (int j = 0; j < model.chartCount(); ++j) {
                const Chart& chj = model.chart(j);
                const BBox clipj = chj.domain.bounding_box(BBox::cube(chj.dim, radius));
                for (const Vec& x : cPts)
                    for (const Vec& y : sample_volume(chj.D, clipj, 50, rng)) {
                        jumpMax = std::max(jumpMax, model.Cc(HybridState{i, x}, HybridState{j, y}));
                        anyJumpSet = true;
                    }
            }
        }
    }
    if (anyJumpSet && jumpMax > 0) {
        const double fhat = std::max(model.dynamicsBound(radius), 1e-12);
        const double gap = model.constants.beta / fhat;  // min time between jumps
        b.Cbar = jumpMax / (1.0 - std::exp(-model.constants.lambda * gap));
    }
    return b;
}

struct Decider {
    ControlFn control;
    std::function<int(const HybridState&, int)> chooseV;  // (pre, eventIndex)
    // nullopt = decline; value = jump destination
    std::function<std::optional<HybridState>(double, const HybridState&)> decideC;
    bool detectC = true;
    const std::vector<std::pair<double, HybridState>>* forcedJumps = nullptr;
};

TrajectoryRecord simulate_core(const HybridModel& model, const HybridState& x0,
                               const Decider& decider, const Horizon& horizon,
                               const SimulateOptions& opt) {
    const double tol = model.boundaryTol;
    const double lambda = model.constants.lambda;
    const bool stationary = std::holds_alternative<StationaryHorizon>(horizon);
    const double tailTol = stationary ? std::get<StationaryHorizon>(horizon).tailTol : 0.0;
    if (stationary && lambda <= 0) throw ModelError("stationary simulation needs lambda > 0");

    double t = stationary ? 0.0 : std::get<FiniteHorizon>(horizon).s;
    const double T = stationary ? 0.0 : std::get<FiniteHorizon>(horizon).T;
    HybridState cur = x0;

    TrajectoryRecord rec;
    ImplOptions impl;
    impl.step = opt.step;
    impl.costMode = stationary ? CostMode::Discounted : CostMode::Plain;
    impl.detectC = decider.detectC;

    double visitRadius = std::max(norm(x0.x), 4.0 * model.constants.R);
    JumpCostBounds bounds = sample_cost_bounds(model, visitRadius);
    bool armAfterExit = false;
    std::size_t nextForced = 0;
    int autonomousIdx = 0;

    auto discount = [&](double at) { return stationary ? std::exp(-lambda * at) : 1.0; };

    auto recordJump = [&](JumpEvent ev) {
        if (static_cast<int>(rec.events.size()) >= opt.maxJumps)
            throw ModelError("simulate: more than maxJumps jump events");
        rec.jumpCostTotal += ev.discountedCost;
        rec.events.push_back(std::move(ev));
    };

    auto doAutonomous = [&](const HybridState& pre, double at) {
        const int v = decider.chooseV(pre, autonomousIdx++);
        HybridState post = apply_autonomous_jump(model, pre, v);
        JumpEvent ev;
        ev.time = at;
        ev.kind = JumpEvent::Kind::Autonomous;
        ev.pre = pre;
        ev.post = post;
        ev.vIndex = v;
        ev.cost = model.Ca(pre, v);
        ev.discountedCost = ev.cost * discount(at);
        recordJump(std::move(ev));
        cur = post;
        armAfterExit = false;
    };

    const long maxLoops = 16L * opt.maxJumps + 4096;
    for (long loop = 0; loop < maxLoops; ++loop) {
        if (!stationary && t >= T - 1e-12) break;

        if (model.onA(cur, tol)) {
            doAutonomous(cur, t);
            continue;
        }

        double tMax;
        if (stationary) {
            const double budget = bounds.Kbar / lambda + bounds.Cbar;
            // aim below the tolerance so the recorded bound is strict
            if (budget <= 0.9 * tailTol) {
                rec.truncated = true;
                rec.truncationTime = t;
                rec.truncationBound = budget * discount(t);
                break;
            }
            const double tStar = std::log(budget / (0.9 * tailTol)) / lambda;
            if (t >= tStar) {
                rec.truncated = true;
                rec.truncationTime = t;
                rec.truncationBound = budget * discount(t);
                break;
            }
            tMax = tStar;
        } else {
            tMax = T;
        }
        bool forcedNext = false;
        if (decider.forcedJumps && nextForced < decider.forcedJumps->size()) {
            const double xi = (*decider.forcedJumps)[nextForced].first;
            if (xi < tMax) {
                tMax = xi;
                forcedNext = true;
            }
        }
        if (tMax <= t + 1e-15) tMax = t + 1e-9;

        impl.armCOnlyAfterExit = armAfterExit;
        ArcResult res = integrate_arc_impl(model, cur, t, decider.control, tMax, impl);
        rec.runningCostIntegral += res.arc.costIntegral;
        t = res.arc.t1;
        if (!res.arc.states.empty()) cur.x = res.arc.states.back();
        for (const Vec& s : res.arc.states) visitRadius = std::max(visitRadius, norm(s));
        rec.arcs.push_back(std::move(res.arc));

        if (res.hit) {
            cur = res.hit->state;
            if (res.hit->kind == Hit::Kind::A) {
                doAutonomous(cur, t);
            } else {
                auto dest = decider.decideC(t, cur);
                if (dest) {
                    JumpEvent ev;
                    ev.time = t;
                    ev.kind = JumpEvent::Kind::Controlled;
                    ev.pre = cur;
                    ev.post = *dest;
                    ev.cost = model.Cc(cur, *dest);
                    ev.discountedCost = ev.cost * discount(t);
                    recordJump(std::move(ev));
                    cur = *dest;
                    armAfterExit = false;
                } else {
                    armAfterExit = true;  // re-contact is a new decision point
                }
            }
            continue;
        }

        if (forcedNext && std::abs(t - (*decider.forcedJumps)[nextForced].first) <= 1e-9) {
            const auto& [xi, dest] = (*decider.forcedJumps)[nextForced];
            if (!model.onC(cur, std::max(tol, 1e-7)))
                throw ModelError("simulate: scheduled controlled jump at t=" +
                                 std::to_string(xi) + " but the state is not on C");
            if (!model.inD(dest, std::max(tol, 1e-9)))
                throw ModelError("simulate: scheduled controlled-jump destination is not in D");
            JumpEvent ev;
            ev.time = t;
            ev.kind = JumpEvent::Kind::Controlled;
            ev.pre = cur;
            ev.post = dest;
            ev.cost = model.Cc(cur, dest);
            ev.discountedCost = ev.cost * discount(t);
            recordJump(std::move(ev));
            cur = dest;
            ++nextForced;
            continue;
        }

        if (stationary) {
            // The tail-bound horizon may have grown with the visited region.
            JumpCostBounds fresh = sample_cost_bounds(model, visitRadius);
            bounds.Kbar = std::max(bounds.Kbar, fresh.Kbar);
            bounds.Cbar = std::max(bounds.Cbar, fresh.Cbar);
        }
    }

    if (!stationary) {
        rec.terminalCost = model.h(cur);
        rec.truncationTime = T;
    }
    rec.totalCost = rec.runningCostIntegral + rec.jumpCostTotal + rec.terminalCost;
    return rec;
}

}  // namespace

TrajectoryRecord simulate(const HybridModel& model, const HybridState& x0,
                          const ExplicitStrategy& strategy, const Horizon& horizon,
                          const SimulateOptions& opt) {
    Decider d;
    d.control = [&strategy](double t, const HybridState&) -> const Vec& {
        return strategy.u.at(t);
    };
    d.chooseV = [&strategy](const HybridState&, int idx) {
        if (strategy.vSequence.empty()) return 0;
        return strategy.vSequence[std::min<std::size_t>(idx, strategy.vSequence.size() - 1)];
    };
    d.decideC = [](double, const HybridState&) { return std::optional<HybridState>{}; };
    d.detectC = false;  // explicit strategies jump only at the scheduled times
    d.forcedJumps = &strategy.controlledJumps;
    return simulate_core(model, x0, d, horizon, opt);
}

namespace {

// Nearest node with the wanted tag, searching the 3^d neighborhood of the
// rounded node first.
std::size_t nearest_tagged_node(const ModelGrid& grid,
                                const std::vector<PolicyEntry>& entries,
                                const HybridState& s, NodeTag tag, bool& found) {
    const ChartGrid& g = grid.charts.at(s.chart);
    const std::size_t nearest = g.nearestNode(s.x);
    if (entries[nearest].tag == tag) {
        found = true;
        return nearest;
    }
    std::vector<int> multi(g.dim);
    g.multiIndex(nearest, multi);
    double bestDist = std::numeric_limits<double>::infinity();
    std::size_t best = nearest;
    found = false;
    std::vector<int> probe(g.dim);
    int total = 1;
    for (int d = 0; d < g.dim; ++d) total *= 3;
    for (int c = 0; c < total; ++c) {
        int rem = c;
        bool ok = true;
        for (int d = 0; d < g.dim; ++d) {
            const int off = rem % 3 - 1;
            rem /= 3;
            probe[d] = multi[d] + off;
            if (probe[d] < 0 || probe[d] >= g.n[d]) ok = false;
        }
        if (!ok) continue;
        const std::size_t flat = g.flatIndex(probe);
        if (entries[flat].tag != tag) continue;
        const double dd = dist(g.node(flat), s.x);
        if (dd < bestDist) {
            bestDist = dd;
            best = flat;
            found = true;
        }
    }
    return best;
}

}  // namespace

TrajectoryRecord simulate(const HybridModel& model, const HybridState& x0,
                          const Policy& policy, const ModelGrid& grid,
                          const Horizon& horizon, const SimulateOptions& opt) {
    Decider d;
    d.control = [&](double, const HybridState& s) -> const Vec& {
        const PolicyEntry& e = policy.nearest(grid, s);
        const int ui = e.uIndex >= 0 ? e.uIndex : 0;
        return model.controls.uSamples.at(ui);
    };
    d.chooseV = [&](const HybridState& pre, int) {
        bool found = false;
        const std::size_t node =
            nearest_tagged_node(grid, policy.entries.at(pre.chart), pre, NodeTag::A, found);
        const PolicyEntry& e = policy.entries.at(pre.chart).at(node);
        return found && e.vIndex >= 0 ? e.vIndex : 0;
    };
    d.decideC = [&](double, const HybridState& s) -> std::optional<HybridState> {
        bool found = false;
        const std::size_t node =
            nearest_tagged_node(grid, policy.entries.at(s.chart), s, NodeTag::C, found);
        if (!found) return std::nullopt;
        const PolicyEntry& e = policy.entries.at(s.chart).at(node);
        if (e.cAction != CAction::Jump || e.destIndex < 0) return std::nullopt;
        return grid.destinations.at(e.destIndex);
    };
    d.detectC = true;
    return simulate_core(model, x0, d, horizon, opt);
}

double TrajectoryRecord::ledger_recompute() const {
    double total = terminalCost;
    for (const Arc& a : arcs) total += a.costIntegral;
    for (const JumpEvent& e : events) total += e.discountedCost;
    return total;
}

void TrajectoryRecord::write_jsonl(std::ostream& out) const {
    using nlohmann::json;
    for (const Arc& a : arcs) {
        for (std::size_t i = 0; i < a.times.size(); ++i) {
            json line = {{"type", "sample"},
                         {"t", a.times[i]},
                         {"chart", a.chart},
                         {"x", a.states[i]}};
            out << line.dump() << '\n';
        }
    }
    for (const JumpEvent& e : events) {
        json line = {{"type", e.kind == JumpEvent::Kind::Autonomous ? "jump_autonomous"
                                                                    : "jump_controlled"},
                     {"t", e.time},
                     {"pre_chart", e.pre.chart},
                     {"pre_x", e.pre.x},
                     {"post_chart", e.post.chart},
                     {"post_x", e.post.x},
                     {"cost", e.cost},
                     {"discounted_cost", e.discountedCost}};
        if (e.vIndex >= 0) line["v_index"] = e.vIndex;
        out << line.dump() << '\n';
    }
    nlohmann::json summary = {{"type", "summary"},
                              {"running_cost", runningCostIntegral},
                              {"jump_cost", jumpCostTotal},
                              {"terminal_cost", terminalCost},
                              {"total_cost", totalCost},
                              {"truncated", truncated},
                              {"truncation_time", truncationTime},
                              {"truncation_bound", truncationBound}};
    out << summary.dump() << '\n';
}

void TrajectoryRecord::write_summary_csv(std::ostream& out) const {
    int maxDim = 1;
    for (const Arc& a : arcs)
        for (const Vec& s : a.states) maxDim = std::max(maxDim, static_cast<int>(s.size()));
    out << "t,chart";
    for (int d = 1; d <= maxDim; ++d) out << ",x" << d;
    out << ",event_kind,cost_increment,discounted_increment\n";
    out << std::setprecision(17);

    struct Row {
        double t;
        int chart;
        const Vec* x;
        const char* kind;
        double cost, disc;
    };
    std::vector<Row> rows;
    for (const Arc& a : arcs)
        for (std::size_t i = 0; i < a.times.size(); ++i) {
            const bool last = i + 1 == a.times.size();
            rows.push_back({a.times[i], a.chart, &a.states[i], "",
                            last ? a.costIntegral : 0.0, last ? a.costIntegral : 0.0});
        }
    for (const JumpEvent& e : events)
        rows.push_back({e.time, e.pre.chart, &e.pre.x,
                        e.kind == JumpEvent::Kind::Autonomous ? "autonomous" : "controlled",
                        e.cost, e.discountedCost});
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.t < b.t; });
    for (const Row& r : rows) {
        out << r.t << ',' << r.chart;
        for (int d = 0; d < maxDim; ++d) {
            out << ',';
            if (d < static_cast<int>(r.x->size())) out << (*r.x)[d];
        }
        out << ',' << r.kind << ',' << r.cost << ',' << r.disc << '\n';
    }
}

}  // namespace hybridqvi
