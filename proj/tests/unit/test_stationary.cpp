#include <doctest.h>

#include <cmath>

#include "hybridqvi/stationary.hpp"
#include "hybridqvi/trajectory.hpp"
#include "test_models.hpp"

using namespace hybridqvi;
using namespace hybridqvi::testing;

TEST_CASE("sweep of the zero field with K=1 and no jump sets gives dt everywhere") {
    const HybridModel m = constant_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.1, 0});
    const double dt = 0.05;
    const ValueField out = bellman_sweep(ValueField::zeros(grid), m, grid, dt);
    for (double v : out.values[0]) CHECK(v == doctest::Approx(dt));
}

TEST_CASE("sweep preserves nodewise order") {
    const HybridModel m = conveyor_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.05, 0});
    const double dt = default_dt(m, grid);
    ValueField v1 = ValueField::zeros(grid);
    ValueField v2 = ValueField::constant(grid, 0.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> base(0.0, 1.0), bump(0.0, 0.5);
    for (std::size_t i = 0; i < v1.values[0].size(); ++i) {
        v1.values[0][i] = base(rng);
        v2.values[0][i] = v1.values[0][i] + bump(rng);
    }
    const ValueField s1 = bellman_sweep(v1, m, grid, dt);
    const ValueField s2 = bellman_sweep(v2, m, grid, dt);
    for (std::size_t i = 0; i < s1.values[0].size(); ++i)
        CHECK(s1.values[0][i] <= s2.values[0][i] + 1e-12);
}

TEST_CASE("constant-cost solve hits the discrete fixed point to 1e-12") {
    const HybridModel m = constant_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.1, 0});
    SolveConfig cfg;
    cfg.dt = 0.05;
    cfg.tol = 1e-13;
    const StationarySolution sol = solve_stationary(m, grid, cfg);
    REQUIRE(sol.diag.converged);
    const double vStar = cfg.dt / (1.0 - std::exp(-cfg.dt));
    for (double v : sol.V.values[0]) CHECK(std::abs(v - vStar) <= 1e-12);
    // and within 5 dt of the continuous value 1/lambda
    CHECK(std::abs(sol.V.values[0][0] - 1.0) <= 5 * cfg.dt);
}

TEST_CASE("conveyor solve matches the geometric-series oracle at x = 0.5") {
    const HybridModel m = conveyor_model();
    const GridSpec spec{0.01, 0};
    const ModelGrid grid = ModelGrid::build(m, spec);
    SolveConfig cfg;
    cfg.tol = 1e-8;
    const StationarySolution sol = solve_stationary(m, grid, cfg);
    REQUIRE(sol.diag.converged);
    const double oracle = std::exp(-1.5) / (1.0 - std::exp(-1.5));
    const double got = sol.V.eval(HybridState{0, {0.5}});
    CHECK(std::abs(got - oracle) <= std::max(2 * spec.h, 2 * sol.diag.dt));
    // the whole field against the closed form
    for (std::size_t i = 0; i < grid.charts[0].nodeCount(); ++i) {
        const HybridState s{0, grid.charts[0].node(i)};
        CHECK(std::abs(sol.V.values[0][i] - m.oracleValue(s)) <= 0.05);
    }
}

TEST_CASE("policy on the conveyor jumps at A nodes with the only v sample") {
    const HybridModel m = conveyor_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.02, 0});
    const StationarySolution sol = solve_stationary(m, grid, {});
    for (std::size_t i = 0; i < grid.charts[0].nodeCount(); ++i) {
        const PolicyEntry& e = sol.policy.at(0, i);
        if (grid.tags[0][i] == NodeTag::A) {
            CHECK(e.vIndex == 0);
        } else {
            CHECK(e.uIndex == 0);
        }
    }
}

TEST_CASE("prohibitive controlled-jump cost reproduces the jump-free solve") {
    json expensive = controlled_json();
    expensive["costs"]["C_c"] = "1000000";
    json free = controlled_json();
    free["charts"][0]["C"] = json::array();

    const HybridModel mExp = model_from_json(expensive);
    const HybridModel mFree = model_from_json(free);
    const GridSpec spec{0.02, 0};
    const ModelGrid gridExp = ModelGrid::build(mExp, spec);
    const ModelGrid gridFree = ModelGrid::build(mFree, spec);
    SolveConfig cfg;
    cfg.tol = 1e-8;
    const StationarySolution a = solve_stationary(mExp, gridExp, cfg);
    const StationarySolution b = solve_stationary(mFree, gridFree, cfg);
    CHECK(sup_distance(a.V, b.V) <= 1e-6);
    for (std::size_t i = 0; i < gridExp.charts[0].nodeCount(); ++i)
        if (gridExp.tags[0][i] == NodeTag::C)
            CHECK(a.policy.at(0, i).cAction == CAction::Decline);
}

TEST_CASE("controlled model jumps where continuation is dearer") {
    const HybridModel m = controlled_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.02, 0});
    SolveConfig cfg;
    cfg.tol = 1e-8;
    const StationarySolution sol = solve_stationary(m, grid, cfg);
    REQUIRE(sol.diag.converged);
    bool anyJump = false;
    for (std::size_t i = 0; i < grid.charts[0].nodeCount(); ++i)
        if (grid.tags[0][i] == NodeTag::C && sol.policy.at(0, i).cAction == CAction::Jump)
            anyJump = true;
    CHECK(anyJump);
}

TEST_CASE("qvi_residual is below tolerance after a converged solve") {
    for (const HybridModel& m : {conveyor_model(), controlled_model()}) {
        const ModelGrid grid = ModelGrid::build(m, GridSpec{0.02, 0});
        SolveConfig cfg;
        cfg.tol = 1e-6;
        const StationarySolution sol = solve_stationary(m, grid, cfg);
        REQUIRE(sol.diag.converged);
        const QviResidual res = qvi_residual(sol.V, m, grid, sol.diag.dt);
        CHECK(res.onA <= cfg.tol);
        CHECK(res.onC <= cfg.tol);
        CHECK(res.onFree <= cfg.tol);
    }
}

TEST_CASE("free residual of the zero field with K=1 equals dt") {
    const HybridModel m = constant_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.1, 0});
    const double dt = 0.05;
    const QviResidual res = qvi_residual(ValueField::zeros(grid), m, grid, dt);
    CHECK(res.onFree == doctest::Approx(dt));
}

TEST_CASE("a point perturbation shows up in the free residual") {
    const HybridModel m = constant_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.1, 0});
    SolveConfig cfg;
    cfg.dt = 0.05;
    cfg.tol = 1e-10;
    StationarySolution sol = solve_stationary(m, grid, cfg);
    const double eps = 0.01;
    sol.V.values[0][3] += eps;
    const QviResidual res = qvi_residual(sol.V, m, grid, cfg.dt);
    CHECK(res.onFree >= eps * (1.0 - std::exp(-cfg.dt)) - 1e-9);
}

TEST_CASE("contraction: jump-free residual ratios stay below e^{-lambda dt}") {
    const HybridModel m = constant_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.1, 0});
    SolveConfig cfg;
    cfg.dt = 0.05;
    cfg.tol = 1e-10;
    const StationarySolution sol = solve_stationary(m, grid, cfg);
    const double cap = std::exp(-cfg.dt) * (1.0 + 1e-9);
    // ratios of sweep differences at the fp noise floor are uninformative
    const double floor = 1e-6 * (1.0 + sol.V.maxValue());
    for (std::size_t i = 0; i + 1 < sol.diag.residualHistory.size(); ++i)
        if (sol.diag.residualHistory[i] >= floor)
            CHECK(sol.diag.contractionRatios[i] <= cap);
}

TEST_CASE("iterates from zero are nodewise nondecreasing with jumps present") {
    const HybridModel m = conveyor_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.05, 0});
    const double dt = default_dt(m, grid);
    ValueField v = ValueField::zeros(grid);
    for (int sweep = 0; sweep < 60; ++sweep) {
        const ValueField next = bellman_sweep(v, m, grid, dt);
        for (std::size_t i = 0; i < v.values[0].size(); ++i)
            CHECK(next.values[0][i] >= v.values[0][i] - 1e-12);
        v = next;
        CHECK(v.minValue() >= -1e-12);
    }
}

TEST_CASE("with jumps the ratios never exceed one") {
    const HybridModel m = conveyor_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.02, 0});
    const StationarySolution sol = solve_stationary(m, grid, {});
    for (double r : sol.diag.contractionRatios) CHECK(r <= 1.0 + 1e-9);
}

TEST_CASE("non-convergence is reported, not thrown") {
    const HybridModel m = conveyor_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.05, 0});
    SolveConfig cfg;
    cfg.maxIter = 3;
    const StationarySolution sol = solve_stationary(m, grid, cfg);
    CHECK_FALSE(sol.diag.converged);
    CHECK(sol.diag.iterations == 3);
    CHECK(sol.diag.residualHistory.size() == 3);
}

TEST_CASE("two-chart solve matches the cross-chart closed form") {
    const HybridModel m = two_chart_model();
    const GridSpec spec{0.01, 0};
    const ModelGrid grid = ModelGrid::build(m, spec);
    SolveConfig cfg;
    cfg.tol = 1e-8;
    const StationarySolution sol = solve_stationary(m, grid, cfg);
    REQUIRE(sol.diag.converged);
    // chart 1: K = 1 forever -> V = dt/(1-e^{-dt}) ~ 1; chart 0 from x:
    // e^{-(2-x)} (C_a + V1(0.5))
    const double v1 = sol.V.eval(HybridState{1, {0.5}});
    CHECK(std::abs(v1 - 1.0) <= 5 * sol.diag.dt + 1e-6);
    const double v0 = sol.V.eval(HybridState{0, {0.5}});
    const double oracle = std::exp(-1.5) * (1.0 + v1);
    CHECK(std::abs(v0 - oracle) <= std::max(2 * spec.h, 2 * sol.diag.dt));
}

TEST_CASE("policy simulation cost stays within the scheme tolerance of V") {
    const HybridModel m = conveyor_model();
    const GridSpec spec{0.01, 0};
    const ModelGrid grid = ModelGrid::build(m, spec);
    SolveConfig cfg;
    cfg.tol = 1e-8;
    const StationarySolution sol = solve_stationary(m, grid, cfg);
    for (double x0 : {0.1, 0.5, 0.9, 1.4, 1.9, 2.3}) {
        const HybridState s{0, {x0}};
        const TrajectoryRecord rec =
            simulate(m, s, sol.policy, grid, StationaryHorizon{1e-7});
        CHECK(rec.totalCost <= sol.V.eval(s) + std::max(5 * spec.h, 5 * sol.diag.dt) + 1e-7);
    }
}
