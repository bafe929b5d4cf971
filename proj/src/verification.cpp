#include "hybridqvi/verification.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace hybridqvi {

bool PropertyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const PropertyCheck& c) { return c.pass; });
}

const PropertyCheck* PropertyReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

nlohmann::json PropertyReport::to_json() const {
    nlohmann::json j;
    j["suite"] = suite;
    j["seed"] = seed;
    j["all_pass"] = all_pass();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks)
        j["checks"].push_back({{"name", c.name},
                               {"pass", c.pass},
                               {"margin", c.margin},
                               {"witness", c.witness}});
    return j;
}

void PropertyReport::print(std::ostream& out) const {
    for (const auto& c : checks) {
        out << (c.pass ? "[PASS] " : "[FAIL] ") << suite << '.' << c.name;
        if (!c.witness.empty()) out << "  (" << c.witness << ")";
        out << '\n';
    }
}

namespace {

void add(PropertyReport& rep, std::string name, bool pass, double margin,
         std::string witness = "") {
    rep.checks.push_back({std::move(name), pass, margin, std::move(witness)});
}

std::vector<std::pair<int, Vec>> domain_points(const HybridModel& model, int perChart,
                                               std::mt19937_64& rng) {
    std::vector<std::pair<int, Vec>> pts;
    for (int i = 0; i < model.chartCount(); ++i) {
        const Chart& ch = model.chart(i);
        const BBox clip = ch.domain.bounding_box(
            BBox::cube(ch.dim, default_trunc_radius(model)));
        for (Vec& x : sample_volume(ch.domain, clip, perChart, rng))
            pts.emplace_back(i, std::move(x));
    }
    return pts;
}

ValueField random_field(const ModelGrid& grid, std::mt19937_64& rng, double lo, double hi) {
    ValueField f = ValueField::zeros(grid);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& chart : f.values)
        for (double& v : chart) v = dist(rng);
    return f;
}

// Plain RK4 flow of the model ODE without event handling; the ODE-estimate
// checks compare free flows.
std::vector<Vec> flow_samples(const HybridModel& model, int chart, Vec x, const Vec& u,
                              double T, double step, std::vector<double>* times = nullptr) {
    std::vector<Vec> out;
    double t = 0;
    out.push_back(x);
    if (times) times->push_back(0.0);
    while (t < T - 1e-15) {
        const double dt = std::min(step, T - t);
        const Vec k1 = model.f(chart, x, t, u);
        const Vec x2 = axpy(x, dt / 2, k1);
        const Vec k2 = model.f(chart, x2, t + dt / 2, u);
        const Vec x3 = axpy(x, dt / 2, k2);
        const Vec k3 = model.f(chart, x3, t + dt / 2, u);
        const Vec x4 = axpy(x, dt, k3);
        const Vec k4 = model.f(chart, x4, t + dt, u);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        t += dt;
        out.push_back(x);
        if (times) times->push_back(t);
    }
    return out;
}

}  // namespace

PropertyReport run_assumption_audit(const HybridModel& model, int sampleDensity,
                                    std::uint64_t seed) {
    PropertyReport rep;
    rep.suite = "audit";
    rep.seed = seed;

    const ValidationReport v = validate_model(model, sampleDensity, seed);
    for (const CheckEntry& e : v.entries) add(rep, e.name, e.pass, e.margin, e.detail);

    // determinism of the audit under a fixed seed
    {
        const ValidationReport v2 = validate_model(model, sampleDensity, seed);
        bool same = v.entries.size() == v2.entries.size();
        for (std::size_t i = 0; same && i < v.entries.size(); ++i)
            same = v.entries[i].pass == v2.entries[i].pass &&
                   v.entries[i].margin == v2.entries[i].margin;
        add(rep, "deterministic", same, same ? 0.0 : -1.0);
    }

    std::mt19937_64 rng(seed + 1);

    // signed_distance is 1-Lipschitz for every primitive region
    {
        double worst = 0.0;
        for (int i = 0; i < model.chartCount(); ++i) {
            const Chart& ch = model.chart(i);
            const BBox clip = ch.domain.bounding_box(
                BBox::cube(ch.dim, default_trunc_radius(model)));
            std::uniform_real_distribution<double> dist01(0.0, 1.0);
            for (const Region* region : {&ch.domain, &ch.A, &ch.C, &ch.D}) {
                if (region->empty()) continue;
                for (int trial = 0; trial < sampleDensity; ++trial) {
                    Vec x(ch.dim), z(ch.dim);
                    for (int d = 0; d < ch.dim; ++d) {
                        x[d] = clip.lo[d] + dist01(rng) * (clip.hi[d] - clip.lo[d]);
                        z[d] = clip.lo[d] + dist01(rng) * (clip.hi[d] - clip.lo[d]);
                    }
                    const double dxz = dist(x, z);
                    if (dxz < 1e-12) continue;
                    const double ratio =
                        std::abs(region->signed_distance(x) - region->signed_distance(z)) / dxz;
                    worst = std::max(worst, ratio);
                }
            }
        }
        add(rep, "sdf_lipschitz", worst <= 1.0 + 1e-9, 1.0 - worst,
            "worst ratio = " + std::to_string(worst));
    }

    // outward normal vs normalized finite-difference gradient of the sdf
    {
        const double fd = 1e-6;
        double worst = 0.0;
        int tested = 0;
        for (int i = 0; i < model.chartCount(); ++i) {
            const Chart& ch = model.chart(i);
            const BBox clip = ch.domain.bounding_box(
                BBox::cube(ch.dim, default_trunc_radius(model)));
            for (const Region* region : {&ch.A, &ch.C, &ch.D}) {
                if (region->empty()) continue;
                for (const Vec& x : sample_boundary(*region, clip, sampleDensity / 2, rng)) {
                    Vec grad(ch.dim);
                    for (int d = 0; d < ch.dim; ++d) {
                        Vec xp = x, xm = x;
                        xp[d] += fd;
                        xm[d] -= fd;
                        grad[d] = (region->signed_distance(xp) - region->signed_distance(xm)) /
                                  (2 * fd);
                    }
                    const double glen = norm(grad);
                    if (std::abs(glen - 1.0) > 0.1) continue;  // skeleton/edge proximity
                    for (double& c : grad) c /= glen;
                    Vec n;
                    try {
                        n = region->outward_normal(x, 1e-6);
                    } catch (const ModelError&) {
                        continue;
                    }
                    worst = std::max(worst, dist(n, grad));
                    ++tested;
                }
            }
        }
        add(rep, "normal_gradient", worst <= 1e-6, 1e-6 - worst,
            "points tested = " + std::to_string(tested) +
                ", worst deviation = " + std::to_string(worst));
    }
    return rep;
}

PropertyReport run_operator_properties(const HybridModel& model, const ModelGrid& grid,
                                       int trials, std::uint64_t seed) {
    PropertyReport rep;
    rep.suite = "operators";
    rep.seed = seed;
    std::mt19937_64 rng(seed);
    const double dt = default_dt(model, grid);
    const double decay = std::exp(-model.constants.lambda * dt);

    // query points per tag
    std::vector<HybridState> aPts, cPts, anyPts;
    for (int i = 0; i < model.chartCount(); ++i) {
        const Chart& ch = model.chart(i);
        const BBox clip = ch.domain.bounding_box(
            BBox::cube(ch.dim, default_trunc_radius(model)));
        for (Vec& x : sample_boundary(ch.A, clip, 20, rng)) aPts.push_back({i, std::move(x)});
        for (Vec& x : sample_volume(ch.C, clip, 20, rng)) cPts.push_back({i, std::move(x)});
        for (Vec& x : sample_volume(ch.domain, clip, 20, rng)) anyPts.push_back({i, std::move(x)});
    }

    double monoM = std::numeric_limits<double>::infinity();
    double monoN = std::numeric_limits<double>::infinity();
    double monoC = std::numeric_limits<double>::infinity();
    double shiftM = 0, shiftC = 0, convex = 0, insens = 0, roundtrip = 0, inside = 0;
    const GrowthTransform tr = GrowthTransform::make(model);

    std::uniform_real_distribution<double> shift(0.1, 2.0);
    std::uniform_real_distribution<double> pDist(-2.0, 2.0);

    for (int trial = 0; trial < trials; ++trial) {
        const ValueField v1 = random_field(grid, rng, 0.0, 2.0);
        ValueField v2 = v1;
        std::uniform_real_distribution<double> bump(0.0, 1.0);
        for (auto& chart : v2.values)
            for (double& val : chart) val += bump(rng);
        const double c = shift(rng);
        const ValueField v1c = shifted(v1, c);

        for (const HybridState& x : aPts) {
            monoM = std::min(monoM, M_op(v2, x, model).value - M_op(v1, x, model).value);
            shiftM = std::max(shiftM, std::abs(M_op(v1c, x, model).value -
                                               (M_op(v1, x, model).value + c)));
        }
        if (!grid.destinations.empty())
            for (const HybridState& x : cPts)
                monoN = std::min(monoN, N_op(v2, x, model, grid.destinations).value -
                                            N_op(v1, x, model, grid.destinations).value);
        for (const HybridState& x : anyPts) {
            monoC = std::min(monoC, continuation_update(v2, x, model, dt).value -
                                        continuation_update(v1, x, model, dt).value);
            shiftC = std::max(shiftC,
                              std::abs(continuation_update(v1c, x, model, dt).value -
                                       (continuation_update(v1, x, model, dt).value + decay * c)));
            // midpoint convexity of H in p
            Vec p1(x.x.size()), p2(x.x.size()), pm(x.x.size());
            for (std::size_t d = 0; d < p1.size(); ++d) {
                p1[d] = pDist(rng);
                p2[d] = pDist(rng);
                pm[d] = 0.5 * (p1[d] + p2[d]);
            }
            const double lhsS = hamiltonian_stationary(x, pm, model);
            const double rhsS = 0.5 * (hamiltonian_stationary(x, p1, model) +
                                       hamiltonian_stationary(x, p2, model));
            convex = std::max(convex, lhsS - rhsS);
            const double lhsT = hamiltonian_time(0.3, x, pm, model);
            const double rhsT = 0.5 * (hamiltonian_time(0.3, x, p1, model) +
                                       hamiltonian_time(0.3, x, p2, model));
            convex = std::max(convex, lhsT - rhsT);
        }

        // M is insensitive to values away from D (beyond one interpolation cell)
        if (!aPts.empty()) {
            ValueField v3 = v1;
            for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
                const ChartGrid& g = grid.charts[ci];
                const Region& D = model.chart(static_cast<int>(ci)).D;
                const double cellDiag = g.maxSpacing() * std::sqrt(double(g.dim));
                for (std::size_t i = 0; i < v3.values[ci].size(); ++i) {
                    const double sd =
                        D.empty() ? 1e300 : D.signed_distance(g.node(i));
                    if (sd > 1.5 * cellDiag) v3.values[ci][i] += 7.0;
                }
            }
            for (const HybridState& x : aPts)
                insens = std::max(insens, std::abs(M_op(v3, x, model).value -
                                                   M_op(v1, x, model).value));
        }

        // growth transform: exact round trip, identity inside |x| <= R
        const ValueField w = to_bounded(v1, tr);
        const ValueField back = from_bounded(w, tr);
        roundtrip = std::max(roundtrip, sup_distance(back, v1));
        for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
            const ChartGrid& g = grid.charts[ci];
            for (std::size_t i = 0; i < w.values[ci].size(); ++i)
                if (norm(g.node(i)) <= model.constants.R)
                    inside = std::max(inside,
                                      std::abs(w.values[ci][i] - v1.values[ci][i]));
        }
    }

    const double inf = std::numeric_limits<double>::infinity();
    add(rep, "monotonicity.M", monoM >= -1e-12 || monoM == inf,
        monoM == inf ? inf : monoM, aPts.empty() ? "no A points (vacuous)" : "");
    add(rep, "monotonicity.N", monoN >= -1e-12 || monoN == inf,
        monoN == inf ? inf : monoN, cPts.empty() ? "no C points (vacuous)" : "");
    add(rep, "monotonicity.continuation", monoC >= -1e-12, monoC);
    add(rep, "shift.M", shiftM <= 1e-12, 1e-12 - shiftM);
    add(rep, "shift.continuation", shiftC <= 1e-12, 1e-12 - shiftC);
    add(rep, "M_insensitive_outside_D", insens <= 1e-12, 1e-12 - insens,
        aPts.empty() ? "no A points (vacuous)" : "");
    add(rep, "hamiltonian_convexity", convex <= 1e-12, 1e-12 - convex);
    add(rep, "transform.roundtrip", roundtrip <= 1e-12, 1e-12 - roundtrip);
    add(rep, "transform.identity_inside_R", inside <= 1e-12, 1e-12 - inside);
    return rep;
}

PropertyReport run_ode_estimates(const HybridModel& model, int trials, std::uint64_t seed) {
    PropertyReport rep;
    rep.suite = "ode";
    rep.seed = seed;
    std::mt19937_64 rng(seed);
    const double L = model.constants.L;
    const double horizon = 1.0;
    const double step = 0.01;

    auto pts = domain_points(model, std::max(4, trials / 2), rng);
    std::uniform_int_distribution<std::size_t> uPick(0, model.controls.uSamples.size() - 1);

    double worst7 = -std::numeric_limits<double>::infinity();
    double worst8 = -std::numeric_limits<double>::infinity();
    int done = 0;
    for (int trial = 0; trial < trials && pts.size() >= 2; ++trial) {
        const auto& [ci, x] = pts[rng() % pts.size()];
        // partner point in the same chart
        const Vec* z = nullptr;
        for (int tries = 0; tries < 64 && !z; ++tries) {
            const auto& cand = pts[rng() % pts.size()];
            if (cand.first == ci && dist(cand.second, x) > 1e-9) z = &cand.second;
        }
        if (!z) continue;
        const Vec& u = model.controls.uSamples[uPick(rng)];

        std::vector<double> times;
        const auto pathX = flow_samples(model, ci, x, u, horizon, step, &times);
        const auto pathZ = flow_samples(model, ci, *z, u, horizon, step);
        const double d0 = dist(x, *z);
        // Fhat is the dynamics bound on the visited region: the realized
        // speed along the path, not the declared in-domain constant. Between
        // sample points |f| can drift by at most L * speed * step.
        double fhat = 0;
        for (std::size_t k = 0; k < pathX.size(); ++k)
            fhat = std::max(fhat, norm(model.f(ci, pathX[k], times[k], u)));
        fhat *= 1.0 + L * step;

        for (std::size_t k = 0; k < pathX.size(); ++k) {
            const double sep = dist(pathX[k], pathZ[k]);
            const double bound = std::exp(L * times[k]) * d0 * (1.0 + 1e-6);
            worst7 = std::max(worst7, sep - bound);
        }
        for (std::size_t a = 0; a < pathX.size(); a += 7)
            for (std::size_t b = a + 1; b < pathX.size(); b += 7) {
                const double lhs = dist(pathX[a], pathX[b]);
                const double rhs = fhat * (times[b] - times[a]) * (1.0 + 1e-9) + 1e-12;
                worst8 = std::max(worst8, lhs - rhs);
            }
        ++done;
    }
    add(rep, "eq7_separation_bound", done == 0 || worst7 <= 0, -worst7,
        "pairs tested = " + std::to_string(done));
    add(rep, "eq8_time_bound", done == 0 || worst8 <= 0, -worst8);
    return rep;
}

PropertyReport run_trajectory_properties(const HybridModel& model, const ModelGrid& grid,
                                         const SolveConfig& config, int starts,
                                         std::uint64_t seed) {
    PropertyReport rep;
    rep.suite = "trajectory";
    rep.seed = seed;
    std::mt19937_64 rng(seed);

    const StationarySolution sol = solve_stationary(model, grid, config);
    const double dt = sol.diag.dt;
    double hMax = 0;
    for (const auto& g : grid.charts) hMax = std::max(hMax, g.maxSpacing());

    auto pts = domain_points(model, std::max(2, starts), rng);
    std::vector<HybridState> x0s;
    for (const auto& [ci, x] : pts) {
        HybridState s{ci, x};
        if (model.onA(s, model.boundaryTol)) continue;  // start on A jumps at t=0
        x0s.push_back(std::move(s));
        if (static_cast<int>(x0s.size()) >= starts) break;
    }

    double ledgerWorst = 0, sepWorst = std::numeric_limits<double>::infinity();
    double policyWorst = -std::numeric_limits<double>::infinity();
    const double fhat = std::max(model.dynamicsBound(grid.truncRadius), 1e-12);
    const double minGap = model.constants.beta / fhat;
    int simulated = 0;

    for (const HybridState& x0 : x0s) {
        SimulateOptions opt;
        TrajectoryRecord recSim =
            simulate(model, x0, sol.policy, grid, StationaryHorizon{1e-7}, opt);
        ledgerWorst = std::max(ledgerWorst,
                               std::abs(recSim.totalCost - recSim.ledger_recompute()));
        for (std::size_t e = 1; e < recSim.events.size(); ++e)
            sepWorst = std::min(sepWorst,
                                recSim.events[e].time - recSim.events[e - 1].time);
        const double bound = sol.V.eval(x0) + std::max(5 * hMax, 5 * dt) + 1e-7;
        policyWorst = std::max(policyWorst, recSim.totalCost - bound);
        ++simulated;
    }

    add(rep, "ledger_additivity", ledgerWorst <= 1e-10, 1e-10 - ledgerWorst,
        "records = " + std::to_string(simulated));
    add(rep, "jump_separation",
        sepWorst == std::numeric_limits<double>::infinity() || sepWorst >= minGap - 1e-9,
        sepWorst == std::numeric_limits<double>::infinity() ? 1e300 : sepWorst - minGap,
        "min gap bound = " + std::to_string(minGap));
    add(rep, "policy_consistency", simulated == 0 || policyWorst <= 0, -policyWorst,
        "cost <= V(x0) + max(5h,5dt)");

    // empirical order of the hit-time error under step halving
    {
        double order = 4.0;
        std::string note = "no A hits along sampled arcs";
        for (const HybridState& x0 : x0s) {
            if (model.chart(x0.chart).A.empty()) continue;
            auto hitAt = [&](double step) -> std::optional<double> {
                IntegrateOptions io;
                io.step = step;
                const PiecewiseControl u =
                    PiecewiseControl::constant(model.controls.uSamples[0]);
                const ArcResult r = integrate_arc(model, x0, 0.0, u, 50.0, io);
                if (r.hit && r.hit->kind == Hit::Kind::A) return r.hit->time;
                return std::nullopt;
            };
            const auto t1 = hitAt(0.02);
            const auto t2 = hitAt(0.01);
            const auto tRef = hitAt(0.0025);
            if (!t1 || !t2 || !tRef) continue;
            const double e1 = std::abs(*t1 - *tRef);
            const double e2 = std::abs(*t2 - *tRef);
            if (e2 < 1e-9) {
                note = "hit time already at tolerance floor";
                break;
            }
            order = std::log2(e1 / e2);
            note = "order = " + std::to_string(order);
            break;
        }
        add(rep, "rk4_hit_order", order >= 3.5, order - 3.5, note);
    }
    return rep;
}

bool comparison_shadow_ordered(const HybridModel& model, const ModelGrid& grid, double dt,
                               ValueField sub, ValueField super, int sweeps,
                               double* worstGap) {
    double gap = std::numeric_limits<double>::infinity();
    for (int s = 0; s <= sweeps; ++s) {
        for (std::size_t ci = 0; ci < sub.values.size(); ++ci)
            for (std::size_t i = 0; i < sub.values[ci].size(); ++i)
                gap = std::min(gap, super.values[ci][i] - sub.values[ci][i]);
        if (gap < -1e-12) break;
        if (s == sweeps) break;
        sub = bellman_sweep(sub, model, grid, dt);
        super = bellman_sweep(super, model, grid, dt);
    }
    if (worstGap) *worstGap = gap;
    return gap >= -1e-12;
}

PropertyReport run_comparison_shadow(const HybridModel& model, const ModelGrid& grid,
                                     const SolveConfig& config, double margin, int sweeps) {
    PropertyReport rep;
    rep.suite = "comparison";
    rep.seed = 0;

    const StationarySolution sol = solve_stationary(model, grid, config);
    const double dt = sol.diag.dt;
    const double lambda = model.constants.lambda;
    const double c = margin / (1.0 - std::exp(-lambda * dt));

    const ValueField sub = shifted(sol.V, -c);
    const ValueField super = shifted(sol.V, c);
    double gap = 0;
    const bool ordered = comparison_shadow_ordered(model, grid, dt, sub, super, sweeps, &gap);
    add(rep, "sub_super_ordered", ordered, gap,
        "min gap over " + std::to_string(sweeps) + " sweeps = " + std::to_string(gap));

    // one sweep keeps the supersolution above its image and the subsolution below
    {
        const ValueField superNext = bellman_sweep(super, model, grid, dt);
        const ValueField subNext = bellman_sweep(sub, model, grid, dt);
        double worstSuper = 0, worstSub = 0;
        for (std::size_t ci = 0; ci < super.values.size(); ++ci)
            for (std::size_t i = 0; i < super.values[ci].size(); ++i) {
                worstSuper = std::max(worstSuper,
                                      superNext.values[ci][i] - super.values[ci][i]);
                worstSub = std::max(worstSub, sub.values[ci][i] - subNext.values[ci][i]);
            }
        // slack: the solve carries a residual of order config.tol at each node
        add(rep, "supersolution_decreases", worstSuper <= config.tol,
            config.tol - worstSuper);
        add(rep, "subsolution_increases", worstSub <= config.tol, config.tol - worstSub);
    }

    // solver diagnostics: contraction, monotone iterates from zero, nonnegativity
    {
        const bool jumpFree = !grid.hasTag(NodeTag::A) && !grid.hasTag(NodeTag::C);
        const double cap = jumpFree ? std::exp(-lambda * dt) * (1.0 + 1e-9) : 1.0 + 1e-9;
        // ratios from sweep differences at the fp noise floor carry no
        // contraction information; only count those above it
        const double floor = 1e-6 * (1.0 + sol.V.maxValue());
        double worstRatio = 0;
        for (std::size_t i = 0; i + 1 < sol.diag.residualHistory.size(); ++i)
            if (sol.diag.residualHistory[i] >= floor)
                worstRatio = std::max(worstRatio, sol.diag.contractionRatios[i]);
        add(rep, "solver.contraction", worstRatio <= cap, cap - worstRatio,
            jumpFree ? "jump-free: ratios vs e^{-lambda dt}" : "ratios vs 1");

        ValueField v = ValueField::zeros(grid);
        double worstDrop = 0;
        for (int s = 0; s < 25; ++s) {
            const ValueField next = bellman_sweep(v, model, grid, dt);
            for (std::size_t ci = 0; ci < v.values.size(); ++ci)
                for (std::size_t i = 0; i < v.values[ci].size(); ++i)
                    worstDrop = std::max(worstDrop,
                                         v.values[ci][i] - next.values[ci][i]);
            v = next;
        }
        add(rep, "solver.monotone_from_zero", worstDrop <= 1e-12, 1e-12 - worstDrop);
        add(rep, "solver.nonnegativity", sol.V.minValue() >= -1e-12,
            sol.V.minValue() + 1e-12);
        const QviResidual res = qvi_residual(sol.V, model, grid, dt);
        add(rep, "solver.qvi_residual", res.max() <= config.tol, config.tol - res.max(),
            "max residual = " + std::to_string(res.max()));
    }
    return rep;
}

nlohmann::json ConvergenceStudy::to_json() const {
    nlohmann::json j;
    j["empirical_order"] = empiricalOrder;
    j["levels"] = nlohmann::json::array();
    for (std::size_t i = 0; i < levels.size(); ++i)
        j["levels"].push_back({{"h", levels[i].h},
                               {"trunc_radius", levels[i].truncRadius},
                               {"dt", dts[i]},
                               {"error", errors[i]}});
    return j;
}

ConvergenceStudy run_convergence(const HybridModel& model, const Oracle& oracle,
                                 std::span<const GridSpec> levels,
                                 const SolveConfig& config) {
    ConvergenceStudy study;
    for (std::size_t lvl = 0; lvl < levels.size(); ++lvl) {
        if (lvl > 0 && !(levels[lvl].h < levels[lvl - 1].h))
            throw ModelError("run_convergence: levels must strictly refine");
        const ModelGrid grid = ModelGrid::build(model, levels[lvl]);
        SolveConfig cfg = config;
        if (cfg.dt <= 0) cfg.dt = default_dt(model, grid);
        const StationarySolution sol = solve_stationary(model, grid, cfg);
        double err = 0;
        for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
            const ChartGrid& g = grid.charts[ci];
            for (std::size_t i = 0; i < g.nodeCount(); ++i) {
                const HybridState s{static_cast<int>(ci), g.node(i)};
                err = std::max(err, std::abs(sol.V.values[ci][i] - oracle(s)));
            }
        }
        study.levels.push_back(levels[lvl]);
        study.dts.push_back(cfg.dt);
        study.errors.push_back(err);
    }
    // fitted slope of log error against log h
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < study.levels.size(); ++i) {
        if (study.errors[i] <= 0) continue;
        const double lx = std::log(study.levels[i].h);
        const double ly = std::log(study.errors[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    study.empiricalOrder =
        n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : std::numeric_limits<double>::infinity();
    return study;
}

PropertyReport run_finite_horizon_properties(const HybridModel& model,
                                             const ModelGrid& grid,
                                             const TimeGrid& timeGrid,
                                             std::uint64_t seed) {
    PropertyReport rep;
    rep.suite = "finite_horizon";
    rep.seed = seed;
    std::mt19937_64 rng(seed);

    const TerminalData terminal = build_terminal_data(model, grid);
    add(rep, "terminal_residual", terminal.residual.max() <= 1e-9,
        1e-9 - terminal.residual.max(),
        "max residual = " + std::to_string(terminal.residual.max()));

    const BackwardResult result = backward_march(model, grid, timeGrid, terminal);
    const double dt = timeGrid.dt();

    // every slice finite and nonnegative
    {
        double minVal = std::numeric_limits<double>::infinity();
        bool finite = true;
        for (const ValueField& slice : result.slices) {
            minVal = std::min(minVal, slice.minValue());
            finite = finite && std::isfinite(slice.minValue()) &&
                     std::isfinite(slice.maxValue());
        }
        add(rep, "slices_nonnegative_finite", finite && minVal >= -1e-12, minVal + 1e-12);
    }

    // horizon monotonicity: V(s,.) nonincreasing in s. This needs a constant
    // terminal field (a nonconstant h couples the endpoint into the
    // comparison); skip as vacuous otherwise.
    {
        const double span = terminal.field.maxValue() - terminal.field.minValue();
        if (span <= 1e-12) {
            double worst = 0;
            for (std::size_t n = 0; n + 1 < result.slices.size(); ++n)
                for (std::size_t ci = 0; ci < result.slices[n].values.size(); ++ci)
                    for (std::size_t i = 0; i < result.slices[n].values[ci].size(); ++i)
                        worst = std::max(worst, result.slices[n + 1].values[ci][i] -
                                                    result.slices[n].values[ci][i]);
            add(rep, "horizon_monotonicity", worst <= 1e-10, 1e-10 - worst);
        } else {
            add(rep, "horizon_monotonicity", true, 0.0,
                "vacuous: terminal data is not constant");
        }
    }

    // one-step DPP consistency at off-node points
    {
        double supV = 0;
        for (const ValueField& s : result.slices) supV = std::max(supV, s.maxValue());
        double hMax = 0;
        for (const auto& g : grid.charts) hMax = std::max(hMax, g.maxSpacing());
        const double tolDpp = 10.0 * (hMax + dt) * (1.0 + supV);
        double worst = 0;
        auto pts = domain_points(model, 20, rng);
        std::uniform_int_distribution<int> slicePick(0, timeGrid.steps - 1);
        for (int trial = 0; trial < 50 && !pts.empty(); ++trial) {
            const int n = slicePick(rng);
            const auto& [ci, x] = pts[rng() % pts.size()];
            const HybridState s{ci, x};
            const double tMid = (n + 0.5) * dt;
            double scheme;
            if (model.onA(s, model.boundaryTol)) {
                scheme = M_op(result.slices[n], s, model).value;
            } else if (model.onC(s, model.boundaryTol)) {
                scheme = std::min(
                    N_op(result.slices[n], s, model, grid.destinations).value,
                    continuation_update_time(result.slices[n + 1], tMid, s, model, dt).value);
            } else {
                scheme =
                    continuation_update_time(result.slices[n + 1], tMid, s, model, dt).value;
            }
            worst = std::max(worst, std::abs(result.slices[n].eval(s) - scheme));
        }
        add(rep, "dpp_one_step", worst <= tolDpp, tolDpp - worst,
            "worst deviation = " + std::to_string(worst));
    }

    // slice-to-slice change bounded by dt sup K plus advection of the next
    // slice plus the sub-iteration tolerance
    {
        double supK = 0;
        auto pts = domain_points(model, 50, rng);
        for (const auto& [ci, x] : pts)
            for (const Vec& u : model.controls.uSamples)
                supK = std::max(supK, model.K(ci, x, 0.5 * timeGrid.T, u));
        const double fhat = std::max(model.dynamicsBound(grid.truncRadius), 1e-12);
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n + 1 < result.slices.size(); ++n) {
            // discrete sup-gradient of the next slice
            double lip = 0;
            for (std::size_t ci = 0; ci < grid.charts.size(); ++ci) {
                const ChartGrid& g = grid.charts[ci];
                const auto& vals = result.slices[n + 1].values[ci];
                std::vector<int> multi(g.dim);
                for (std::size_t i = 0; i < vals.size(); ++i) {
                    g.multiIndex(i, multi);
                    for (int d = 0; d < g.dim; ++d) {
                        if (multi[d] + 1 >= g.n[d]) continue;
                        std::vector<int> nb = multi;
                        nb[d] += 1;
                        lip = std::max(lip, std::abs(vals[g.flatIndex(nb)] - vals[i]) /
                                                g.spacing[d]);
                    }
                }
            }
            const double change = sup_distance(result.slices[n], result.slices[n + 1]);
            const double bound = dt * supK + dt * fhat * lip + 1e-9 +
                                 (n < result.sliceResiduals.size()
                                      ? result.sliceResiduals[n]
                                      : 0.0);
            worst = std::max(worst, change - bound);
        }
        add(rep, "slice_change_bound", worst <= 0, -worst);
    }

    // terminal consistency: diffs decrease toward T and vanish at T
    {
        const auto diffs =
            terminal_consistency_check(result, terminal, model.constants.R * 4, 5);
        bool monotone = true;
        for (std::size_t i = 1; i < diffs.size(); ++i)
            monotone = monotone && diffs[i] <= diffs[i - 1] + 1e-12;
        const bool zeroAtT = !diffs.empty() && diffs.back() == 0.0;
        add(rep, "terminal_consistency", monotone && zeroAtT,
            diffs.empty() ? -1.0 : -diffs.back(),
            "diffs over last slices decrease to 0 at T");
    }
    return rep;
}

}  // namespace hybridqvi
