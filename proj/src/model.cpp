#include "hybridqvi/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hybridqvi {

namespace {

using nlohmann::json;

Vec parse_vec(const json& j, const char* what) {
    if (!j.is_array()) throw ModelError(std::string(what) + ": expected an array");
    Vec v;
    v.reserve(j.size());
    for (const auto& c : j) v.push_back(c.get<double>());
    return v;
}

Primitive parse_primitive(const json& j, int dim) {
    Primitive p;
    const std::string type = j.at("type").get<std::string>();
    if (type == "ball") {
        p.kind = PrimitiveKind::Ball;
        p.center = parse_vec(j.at("center"), "ball.center");
        p.radius = j.at("radius").get<double>();
        if (p.radius <= 0) throw ModelError("ball radius must be positive");
    } else if (type == "box") {
        p.kind = PrimitiveKind::Box;
        const Vec lo = parse_vec(j.at("min"), "box.min");
        const Vec hi = parse_vec(j.at("max"), "box.max");
        if (lo.size() != hi.size()) throw ModelError("box min/max dimension mismatch");
        p.center.resize(lo.size());
        p.halfwidth.resize(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (hi[i] < lo[i]) throw ModelError("box min exceeds max");
            p.center[i] = 0.5 * (lo[i] + hi[i]);
            p.halfwidth[i] = 0.5 * (hi[i] - lo[i]);
        }
    } else if (type == "half_space") {
        p.kind = PrimitiveKind::HalfSpace;
        p.normal = parse_vec(j.at("normal"), "half_space.normal");
        p.offset = j.at("offset").get<double>();
        const double len = norm(p.normal);
        if (len < 1e-300) throw ModelError("half_space normal must be nonzero");
        for (double& c : p.normal) c /= len;
        p.offset /= len;
    } else {
        throw ModelError("unknown primitive type '" + type + "'");
    }
    if (p.dim() != dim) throw ModelError("primitive dimension does not match chart");
    return p;
}

Region parse_region(const json& j, int chart, int dim, const char* what) {
    Region r;
    r.chart = chart;
    if (j.is_null()) return r;
    if (!j.is_array()) throw ModelError(std::string(what) + ": expected an array of primitives");
    for (const auto& prim : j) r.parts.push_back(parse_primitive(prim, dim));
    return r;
}

std::vector<Expr> parse_expr_list(const json& j, int count, const char* what) {
    std::vector<Expr> out;
    if (j.is_string()) {
        out.push_back(Expr::parse(j.get<std::string>()));
    } else if (j.is_array()) {
        for (const auto& s : j) out.push_back(Expr::parse(s.get<std::string>()));
    } else {
        throw ModelError(std::string(what) + ": expected a string or array of strings");
    }
    if (static_cast<int>(out.size()) == 1 && count > 1)
        out.resize(count, out[0]);  // shared across charts
    if (static_cast<int>(out.size()) != count)
        throw ModelError(std::string(what) + ": expected one expression per chart");
    return out;
}

std::vector<Vec> parse_points(const json& j, const char* what) {
    std::vector<Vec> pts;
    if (!j.is_array()) throw ModelError(std::string(what) + ": expected an array");
    for (const auto& p : j) {
        if (p.is_number()) {
            pts.push_back(Vec{p.get<double>()});
        } else {
            pts.push_back(parse_vec(p, what));
        }
    }
    return pts;
}

BBox audit_clip(const HybridModel& model, int chart);

bool sampled_c_intersects_d(const HybridModel& model, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5bd1e995u);
    for (int i = 0; i < model.chartCount(); ++i) {
        const Chart& ch = model.chart(i);
        if (ch.C.empty() || ch.D.empty()) continue;
        const BBox clip = audit_clip(model, i);
        for (const Vec& x : sample_volume(ch.D, clip, 400, rng))
            if (ch.C.signed_distance(x) <= model.boundaryTol) return true;
        for (const Vec& x : sample_boundary(ch.D, clip, 200, rng))
            if (ch.C.signed_distance(x) <= model.boundaryTol) return true;
    }
    return false;
}

}  // namespace

Vec HybridModel::f(int chart, std::span<const double> x, double t,
                   std::span<const double> u) const {
    const auto& comps = dynamics.at(chart);
    EvalContext ctx{x, t, u, {}, {}};
    Vec out(comps.size());
    for (std::size_t j = 0; j < comps.size(); ++j) out[j] = comps[j].eval(ctx);
    return out;
}

double HybridModel::K(int chart, std::span<const double> x, double t,
                      std::span<const double> u) const {
    return runningCost.at(chart).eval(EvalContext{x, t, u, {}, {}});
}

HybridState HybridModel::g(const HybridState& from, int vIndex) const {
    const auto& entries = jumpMap.at(from.chart);
    if (entries.empty())
        throw ModelError("jump map is empty for chart " + std::to_string(from.chart));
    const JumpTarget& target =
        entries[std::min<std::size_t>(vIndex, entries.size() - 1)];
    const Vec& v = controls.vSamples.at(vIndex);
    EvalContext ctx{from.x, 0.0, {}, v, {}};
    HybridState out;
    out.chart = target.targetChart;
    out.x.resize(target.coords.size());
    for (std::size_t j = 0; j < target.coords.size(); ++j) out.x[j] = target.coords[j].eval(ctx);
    return out;
}

double HybridModel::Ca(const HybridState& from, int vIndex) const {
    const Vec& v = controls.vSamples.at(vIndex);
    return autonomousJumpCost.at(from.chart).eval(EvalContext{from.x, 0.0, {}, v, {}});
}

double HybridModel::Cc(const HybridState& from, const HybridState& dest) const {
    return controlledJumpCost.at(from.chart)
        .eval(EvalContext{from.x, 0.0, {}, {}, dest.x});
}

double HybridModel::h(const HybridState& at) const {
    return terminalCost.at(at.chart).eval(EvalContext{at.x, 0.0, {}, {}, {}});
}

double HybridModel::oracleValue(const HybridState& at) const {
    if (!hasOracle()) throw ModelError("model carries no oracle expression");
    return oracle.at(at.chart).eval(EvalContext{at.x, 0.0, {}, {}, {}});
}

bool HybridModel::onA(const HybridState& s, double tol) const {
    const Region& A = chart(s.chart).A;
    return !A.empty() && A.signed_distance(s.x) <= tol;
}

bool HybridModel::onC(const HybridState& s, double tol) const {
    const Region& C = chart(s.chart).C;
    return !C.empty() && C.signed_distance(s.x) <= tol;
}

bool HybridModel::inD(const HybridState& s, double tol) const {
    const Region& D = chart(s.chart).D;
    return !D.empty() && D.signed_distance(s.x) <= tol;
}

HybridModel model_from_json(const nlohmann::json& doc) {
    HybridModel m;
    try {
        m.name = doc.value("name", "unnamed");
        const auto& charts = doc.at("charts");
        if (!charts.is_array() || charts.empty())
            throw ModelError("model needs at least one chart");
        int chartIdx = 0;
        for (const auto& cj : charts) {
            Chart ch;
            ch.dim = cj.at("dim").get<int>();
            if (ch.dim < 1) throw ModelError("chart dimension must be >= 1");
            ch.domain = parse_region(cj.at("domain"), chartIdx, ch.dim, "domain");
            if (ch.domain.empty()) throw ModelError("chart domain may not be empty");
            ch.A = parse_region(cj.value("A", json::array()), chartIdx, ch.dim, "A");
            ch.C = parse_region(cj.value("C", json::array()), chartIdx, ch.dim, "C");
            ch.D = parse_region(cj.value("D", json::array()), chartIdx, ch.dim, "D");
            m.charts.push_back(std::move(ch));
            ++chartIdx;
        }
        const int nc = m.chartCount();

        const auto& dyn = doc.at("dynamics");
        if (!dyn.is_array() || static_cast<int>(dyn.size()) != nc)
            throw ModelError("dynamics: expected one component list per chart");
        for (int i = 0; i < nc; ++i) {
            std::vector<Expr> comps;
            for (const auto& s : dyn[i]) comps.push_back(Expr::parse(s.get<std::string>()));
            if (static_cast<int>(comps.size()) != m.charts[i].dim)
                throw ModelError("dynamics: component count must equal chart dimension");
            m.dynamics.push_back(std::move(comps));
        }

        m.jumpMap.resize(nc);
        if (doc.contains("jump_map")) {
            const auto& jm = doc.at("jump_map");
            if (!jm.is_array() || static_cast<int>(jm.size()) != nc)
                throw ModelError("jump_map: expected one entry list per chart");
            for (int i = 0; i < nc; ++i) {
                json entries = jm[i];
                if (entries.is_object()) entries = json::array({entries});
                for (const auto& e : entries) {
                    JumpTarget t;
                    t.targetChart = e.at("target").get<int>();
                    if (t.targetChart < 0 || t.targetChart >= nc)
                        throw ModelError("jump_map target chart out of range");
                    for (const auto& s : e.at("coords"))
                        t.coords.push_back(Expr::parse(s.get<std::string>()));
                    if (static_cast<int>(t.coords.size()) != m.charts[t.targetChart].dim)
                        throw ModelError("jump_map coords must match target chart dimension");
                    m.jumpMap[i].push_back(std::move(t));
                }
            }
        }

        const auto& costs = doc.at("costs");
        m.runningCost = parse_expr_list(costs.at("K"), nc, "costs.K");
        m.autonomousJumpCost =
            parse_expr_list(costs.value("C_a", json("0")), nc, "costs.C_a");
        m.controlledJumpCost =
            parse_expr_list(costs.value("C_c", json("0")), nc, "costs.C_c");
        m.terminalCost = parse_expr_list(costs.value("h", json("0")), nc, "costs.h");
        if (doc.contains("oracle")) m.oracle = parse_expr_list(doc.at("oracle"), nc, "oracle");

        if (doc.contains("controls")) {
            const auto& ctrl = doc.at("controls");
            if (ctrl.contains("u")) m.controls.uSamples = parse_points(ctrl.at("u"), "controls.u");
            if (ctrl.contains("v")) m.controls.vSamples = parse_points(ctrl.at("v"), "controls.v");
        }
        if (m.controls.uSamples.empty()) m.controls.uSamples = {Vec{0.0}};
        if (m.controls.vSamples.empty()) m.controls.vSamples = {Vec{0.0}};

        const auto& k = doc.at("constants");
        m.constants.lambda = k.at("lambda").get<double>();
        m.constants.F = k.at("F").get<double>();
        m.constants.L = k.at("L").get<double>();
        m.constants.G = k.value("G", 1.0);
        m.constants.beta = k.at("beta").get<double>();
        m.constants.xi0 = k.at("xi0").get<double>();
        m.constants.R = k.at("R").get<double>();
        m.constants.k = k.value("k", 0);
        m.constants.Cprime = k.at("Cprime").get<double>();

        if (doc.contains("flags")) {
            const auto& flags = doc.at("flags");
            m.linearGrowth = flags.value("linear_growth", false);
            if (flags.contains("c_intersects_d")) {
                m.cIntersectsD = flags.at("c_intersects_d").get<bool>();
            } else {
                m.cIntersectsD = sampled_c_intersects_d(m, 0);
            }
        } else {
            m.cIntersectsD = sampled_c_intersects_d(m, 0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("model file parse error: ") + e.what());
    }

    const Constants& c = m.constants;
    if (c.lambda <= 0) throw ModelError("lambda must be positive");
    if (c.F <= 0 || c.L <= 0 || c.beta <= 0 || c.xi0 <= 0 || c.Cprime <= 0)
        throw ModelError("F, L, beta, xi0, Cprime must be positive");
    if (c.R <= 0) throw ModelError("R must be positive");
    if (c.k < 0) throw ModelError("growth degree k must be nonnegative");
    return m;
}

HybridModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError("model file '" + path + "' is not valid JSON: " + e.what());
    }
    return model_from_json(doc);
}

bool ValidationReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const CheckEntry& e) { return e.pass; });
}

const CheckEntry* ValidationReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json out;
    out["seed"] = seed;
    out["sample_density"] = sampleDensity;
    out["all_pass"] = all_pass();
    out["entries"] = nlohmann::json::array();
    for (const auto& e : entries)
        out["entries"].push_back({{"name", e.name},
                                  {"pass", e.pass},
                                  {"margin", e.margin},
                                  {"detail", e.detail}});
    return out;
}

namespace {

// Default audit/truncation radius: 4R plus the diameter reachable in one
// effective horizon 1/lambda.
double audit_radius(const HybridModel& model) {
    const Constants& c = model.constants;
    const double base = 4.0 * c.R;
    return base + model.dynamicsBound(base) / c.lambda;
}

BBox audit_clip(const HybridModel& model, int chart) {
    const Chart& ch = model.chart(chart);
    return ch.domain.bounding_box(BBox::cube(ch.dim, audit_radius(model)));
}

struct ChartSamples {
    std::vector<Vec> domain;
    std::vector<Vec> aAll;        // boundary + volume of A
    std::vector<Vec> aBoundary;
    std::vector<Vec> cAll;
    std::vector<Vec> cBoundary;
    std::vector<Vec> dVolume;
};

ChartSamples draw_samples(const HybridModel& model, int chart, int density,
                          std::mt19937_64& rng) {
    ChartSamples s;
    const Chart& ch = model.chart(chart);
    const BBox clip = audit_clip(model, chart);
    s.domain = sample_volume(ch.domain, clip, density, rng);
    s.aBoundary = sample_boundary(ch.A, clip, density, rng);
    s.aAll = s.aBoundary;
    for (auto& x : sample_volume(ch.A, clip, density / 2, rng)) s.aAll.push_back(std::move(x));
    s.cBoundary = sample_boundary(ch.C, clip, density, rng);
    s.cAll = s.cBoundary;
    for (auto& x : sample_volume(ch.C, clip, density / 2, rng)) s.cAll.push_back(std::move(x));
    s.dVolume = sample_volume(ch.D, clip, density, rng);
    for (auto& x : sample_boundary(ch.D, clip, density / 2, rng)) s.dVolume.push_back(std::move(x));
    return s;
}

// Empirical growth exponent: least-squares slope of log(max value in shell)
// against log(shell radius), over the outer radius range where the asymptotic
// degree is visible. Returns 0 when the data cannot refute (bounded values or
// too little radial span).
double fitted_growth_slope(const std::vector<std::pair<double, double>>& radiusValue) {
    double rmax = 0;
    for (const auto& [r, v] : radiusValue) rmax = std::max(rmax, r);
    if (rmax <= 1e-9) return 0.0;
    constexpr int kShells = 5;
    const double r0 = rmax / 3.0;
    double shellMax[kShells];
    double shellR[kShells];
    bool seen[kShells] = {};
    for (int s = 0; s < kShells; ++s) {
        shellMax[s] = 0;
        shellR[s] = r0 + (s + 1) * (rmax - r0) / kShells;
    }
    for (const auto& [r, v] : radiusValue) {
        if (r < r0) continue;
        int s = static_cast<int>((r - r0) / (rmax - r0) * kShells);
        s = std::min(s, kShells - 1);
        shellMax[s] = std::max(shellMax[s], v);
        seen[s] = true;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int s = 0; s < kShells; ++s) {
        if (!seen[s] || shellMax[s] <= 1e-12) continue;
        const double lx = std::log(shellR[s]);
        const double ly = std::log(shellMax[s]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 3) return 0.0;
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-12) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

}  // namespace

ValidationReport validate_model(const HybridModel& model, int sampleDensity,
                                std::uint64_t seed) {
    ValidationReport report;
    report.seed = seed;
    report.sampleDensity = sampleDensity;
    std::mt19937_64 rng(seed);

    std::vector<ChartSamples> samples;
    samples.reserve(model.chartCount());
    for (int i = 0; i < model.chartCount(); ++i)
        samples.push_back(draw_samples(model, i, sampleDensity, rng));

    const Constants& k = model.constants;
    const double inf = std::numeric_limits<double>::infinity();
    auto add = [&](std::string name, bool pass, double margin, std::string detail) {
        report.entries.push_back({std::move(name), pass, margin, std::move(detail)});
    };

    // (a) separation d(A_i, C_i) >= beta and d(A_i, D_i) >= beta
    {
        double minAC = inf, minAD = inf;
        for (int i = 0; i < model.chartCount(); ++i) {
            const Chart& ch = model.chart(i);
            for (const Vec& a : samples[i].aAll) {
                if (!ch.C.empty()) minAC = std::min(minAC, std::max(ch.C.signed_distance(a), 0.0));
                if (!ch.D.empty()) minAD = std::min(minAD, std::max(ch.D.signed_distance(a), 0.0));
            }
        }
        const bool acPass = !(minAC < k.beta);
        const bool adPass = !(minAD < k.beta);
        add("separation.A_C", acPass, std::isinf(minAC) ? inf : minAC - k.beta,
            std::isinf(minAC) ? "no A/C pair sampled" : "min sampled d(A,C) = " + std::to_string(minAC));
        add("separation.A_D", adPass, std::isinf(minAD) ? inf : minAD - k.beta,
            std::isinf(minAD) ? "no A/D pair sampled" : "min sampled d(A,D) = " + std::to_string(minAD));
    }

    // (b) |x| < R on D
    {
        double maxNorm = -inf;
        for (int i = 0; i < model.chartCount(); ++i)
            for (const Vec& x : samples[i].dVolume) maxNorm = std::max(maxNorm, norm(x));
        const bool pass = std::isinf(maxNorm) ? true : maxNorm < k.R;
        add("destination.radius", pass, std::isinf(maxNorm) ? inf : k.R - maxNorm,
            std::isinf(maxNorm) ? "no D samples" : "max sampled |x| on D = " + std::to_string(maxNorm));
    }

    // (c) transversality f.zeta <= -2 xi0 on boundary samples, all u
    auto transversality = [&](bool onASet, const char* name) {
        double worst = -inf;
        std::string witness = "no boundary samples";
        for (int i = 0; i < model.chartCount(); ++i) {
            const Chart& ch = model.chart(i);
            const Region& region = onASet ? ch.A : ch.C;
            const auto& pts = onASet ? samples[i].aBoundary : samples[i].cBoundary;
            for (const Vec& x : pts) {
                Vec zeta;
                try {
                    zeta = region.outward_normal(x, 1e-6);
                } catch (const ModelError&) {
                    continue;
                }
                for (std::size_t ui = 0; ui < model.controls.uSamples.size(); ++ui) {
                    const Vec fx = model.f(i, x, 0.0, model.controls.uSamples[ui]);
                    const double val = dot(fx, zeta);
                    if (val > worst) {
                        worst = val;
                        std::ostringstream os;
                        os << "worst f.zeta = " << val << " at chart " << i;
                        witness = os.str();
                    }
                }
            }
        }
        const bool pass = std::isinf(worst) ? true : worst <= -2.0 * k.xi0 + 1e-12;
        add(name, pass, std::isinf(worst) ? inf : -2.0 * k.xi0 - worst, witness);
    };
    transversality(true, "transversality.A");
    transversality(false, "transversality.C");

    // (d) dynamics bound and Lipschitz ratio
    {
        double worstBound = -inf;
        double worstRatio = 0.0;
        for (int i = 0; i < model.chartCount(); ++i) {
            const auto& pts = samples[i].domain;
            for (const Vec& x : pts) {
                const double cap = model.dynamicsBound(norm(x));
                for (const Vec& u : model.controls.uSamples)
                    worstBound = std::max(worstBound, norm(model.f(i, x, 0.0, u)) - cap);
            }
            for (std::size_t p = 0; p + 1 < pts.size(); p += 2) {
                const Vec& x = pts[p];
                const Vec& z = pts[p + 1];
                const double d = dist(x, z);
                if (d < 1e-9) continue;
                for (const Vec& u : model.controls.uSamples) {
                    const Vec fx = model.f(i, x, 0.0, u);
                    const Vec fz = model.f(i, z, 0.0, u);
                    worstRatio = std::max(worstRatio, dist(fx, fz) / d);
                }
            }
        }
        add("dynamics.bound", std::isinf(worstBound) ? true : worstBound <= 1e-9,
            std::isinf(worstBound) ? inf : -worstBound,
            model.linearGrowth ? "checked |f| <= F(1+|x|)" : "checked |f| <= F");
        add("dynamics.lipschitz", worstRatio <= k.L * (1.0 + 1e-9),
            k.L - worstRatio, "max sampled ratio = " + std::to_string(worstRatio));
    }

    // (e) g maps A x V into D
    {
        double worstSd = -inf;
        bool evaluable = true;
        std::string witness = "no A samples";
        for (int i = 0; i < model.chartCount(); ++i) {
            for (const Vec& x : samples[i].aAll) {
                for (std::size_t vi = 0; vi < model.controls.vSamples.size(); ++vi) {
                    HybridState dest;
                    try {
                        dest = model.g(HybridState{i, x}, static_cast<int>(vi));
                    } catch (const ModelError& e) {
                        evaluable = false;
                        witness = e.what();
                        continue;
                    }
                    const Region& D = model.chart(dest.chart).D;
                    const double sd = D.empty() ? inf : D.signed_distance(dest.x);
                    if (sd > worstSd) {
                        worstSd = sd;
                        std::ostringstream os;
                        os << "worst sd(D, g(x,v)) = " << sd;
                        witness = os.str();
                    }
                }
            }
        }
        const bool vacuous = worstSd == -inf;
        const bool pass = evaluable && (vacuous || worstSd <= model.boundaryTol);
        add("jump.lands_in_D", pass, vacuous ? inf : model.boundaryTol - worstSd, witness);
    }

    // (f) jump costs bounded below by Cprime
    {
        double minCost = inf;
        for (int i = 0; i < model.chartCount(); ++i) {
            for (const Vec& x : samples[i].aAll)
                for (std::size_t vi = 0; vi < model.controls.vSamples.size(); ++vi)
                    minCost = std::min(minCost, model.Ca(HybridState{i, x}, static_cast<int>(vi)));
            for (const Vec& x : samples[i].cAll)
                for (int j = 0; j < model.chartCount(); ++j)
                    for (const Vec& y : samples[j].dVolume)
                        minCost = std::min(minCost,
                                           model.Cc(HybridState{i, x}, HybridState{j, y}));
        }
        const bool pass = std::isinf(minCost) ? true : minCost >= k.Cprime - 1e-12;
        add("jump.cost_lower_bound", pass, std::isinf(minCost) ? inf : minCost - k.Cprime,
            std::isinf(minCost) ? "no jump-cost samples" : "min sampled jump cost = " + std::to_string(minCost));
    }

    // (g) cost growth consistent with degree k, and lambda > kL
    {
        std::vector<std::pair<double, double>> kCurve, caCurve, ccCurve;
        for (int i = 0; i < model.chartCount(); ++i) {
            for (const Vec& x : samples[i].domain) {
                double worst = 0.0;
                for (const Vec& u : model.controls.uSamples)
                    worst = std::max(worst, model.K(i, x, 0.0, u));
                kCurve.emplace_back(norm(x), worst);
            }
            for (const Vec& x : samples[i].aAll) {
                double worst = 0.0;
                for (std::size_t vi = 0; vi < model.controls.vSamples.size(); ++vi)
                    worst = std::max(worst, model.Ca(HybridState{i, x}, static_cast<int>(vi)));
                caCurve.emplace_back(norm(x), worst);
            }
            for (const Vec& x : samples[i].cAll) {
                double worst = 0.0;
                for (int j = 0; j < model.chartCount(); ++j)
                    for (const Vec& y : samples[j].dVolume)
                        worst = std::max(worst, model.Cc(HybridState{i, x}, HybridState{j, y}));
                ccCurve.emplace_back(norm(x), worst);
            }
        }
        auto growthEntry = [&](const char* name, const std::vector<std::pair<double, double>>& curve) {
            const double slope = fitted_growth_slope(curve);
            const double limit = k.k + 0.5;  // tolerance on the fitted exponent
            add(name, slope <= limit, limit - slope,
                "fitted growth exponent = " + std::to_string(slope));
        };
        growthEntry("growth.K", kCurve);
        growthEntry("growth.Ca", caCurve);
        growthEntry("growth.Cc", ccCurve);
        add("growth.lambda_kL", k.lambda > k.k * k.L, k.lambda - k.k * k.L,
            "lambda = " + std::to_string(k.lambda) + ", kL = " + std::to_string(k.k * k.L));
    }

    return report;
}

}  // namespace hybridqvi
