#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "hybridqvi/verification.hpp"
#include "test_models.hpp"

using namespace hybridqvi;
using namespace hybridqvi::testing;

TEST_CASE("assumption audit passes on the conveyor and fails negative controls") {
    const PropertyReport ok = run_assumption_audit(conveyor_model(), 200, 0);
    for (const PropertyCheck& c : ok.checks) {
        INFO(c.name, " ", c.witness);
        CHECK(c.pass);
    }

    json reversed = conveyor_json();
    reversed["dynamics"] = {{"-1"}};
    const PropertyReport bad = run_assumption_audit(model_from_json(reversed), 200, 0);
    REQUIRE(bad.find("transversality.A") != nullptr);
    CHECK_FALSE(bad.find("transversality.A")->pass);
    CHECK_FALSE(bad.all_pass());

    json farD = conveyor_json();
    farD["charts"][0]["D"] = {{{"type", "ball"}, {"center", {2.0}}, {"radius", 0.1}}};
    farD["jump_map"][0][0]["coords"] = {"2.0"};
    const PropertyReport r = run_assumption_audit(model_from_json(farD), 200, 0);
    REQUIRE(r.find("destination.radius") != nullptr);
    CHECK_FALSE(r.find("destination.radius")->pass);
}

TEST_CASE("ODE estimate suite passes on fixtures and on random Lipschitz fields") {
    for (const json& doc : {conveyor_json(), controlled_json(), linear_field_json(0.5)}) {
        const PropertyReport rep = run_ode_estimates(model_from_json(doc), 40, 3);
        for (const PropertyCheck& c : rep.checks) {
            INFO(doc.at("name").get<std::string>(), ": ", c.name, " margin=", c.margin);
            CHECK(c.pass);
        }
    }
    // randomized fields f = a sin(bx + c) + d with |ab| below the declared L
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> as(0.1, 0.5), bs(0.5, 1.5), cs(0.0, 6.28),
        ds(-0.3, 0.3);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = as(rng), b = bs(rng), c = cs(rng), d = ds(rng);
        json doc = linear_field_json(1.0);
        std::ostringstream f;
        f << a << "*sin(" << b << "*x1 + " << c << ") + " << d;
        doc["dynamics"] = {{f.str()}};
        doc["constants"]["L"] = 1.0;  // true Lipschitz constant is |ab| <= 0.75
        doc["constants"]["F"] = 1.0;
        const PropertyReport rep = run_ode_estimates(model_from_json(doc), 20, trial);
        for (const PropertyCheck& ch : rep.checks) {
            INFO("field ", f.str(), ": ", ch.name);
            CHECK(ch.pass);
        }
    }
}

TEST_CASE("trajectory property suite passes on the conveyor") {
    const HybridModel m = conveyor_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.01, 0});
    SolveConfig cfg;
    cfg.tol = 1e-8;
    const PropertyReport rep = run_trajectory_properties(m, grid, cfg, 6, 5);
    for (const PropertyCheck& c : rep.checks) {
        INFO(c.name, " margin=", c.margin, " ", c.witness);
        CHECK(c.pass);
    }
}

TEST_CASE("convergence study on the conveyor reaches first order against the oracle") {
    const HybridModel m = conveyor_model();
    auto oracle = [&](const HybridState& s) { return m.oracleValue(s); };
    const std::vector<GridSpec> levels{{0.04, 0}, {0.02, 0}, {0.01, 0}, {0.005, 0}};
    SolveConfig cfg;
    cfg.tol = 1e-8;
    const ConvergenceStudy study = run_convergence(m, oracle, levels, cfg);
    REQUIRE(study.errors.size() == 4);
    for (double e : study.errors) CHECK(e > 0);
    CHECK(study.errors.back() < study.errors.front());
    CHECK(study.empiricalOrder >= 0.8);
}

TEST_CASE("convergence error of the no-jump constant model is the fixed-point gap") {
    const HybridModel m = constant_model();
    auto oracle = [](const HybridState&) { return 1.0; };  // 1 / lambda
    const std::vector<GridSpec> levels{{0.2, 0}, {0.1, 0}};
    SolveConfig cfg;
    cfg.tol = 1e-12;
    const ConvergenceStudy study = run_convergence(m, oracle, levels, cfg);
    for (std::size_t i = 0; i < study.levels.size(); ++i) {
        const double dt = study.dts[i];
        const double expected = std::abs(dt / (1.0 - std::exp(-dt)) - 1.0);
        CHECK(std::abs(study.errors[i] - expected) <= 1e-9);
    }
}

TEST_CASE("refinement must be strict") {
    const HybridModel m = constant_model();
    auto oracle = [](const HybridState&) { return 1.0; };
    const std::vector<GridSpec> levels{{0.1, 0}, {0.1, 0}};
    CHECK_THROWS_AS(run_convergence(m, oracle, levels, {}), ModelError);
}

TEST_CASE("comparison shadow holds on the fixture models and catches swaps") {
    for (const HybridModel& m : {constant_model(), conveyor_model()}) {
        const ModelGrid grid = ModelGrid::build(m, GridSpec{0.05, 0});
        const PropertyReport rep = run_comparison_shadow(m, grid, {}, 0.1, 100);
        for (const PropertyCheck& c : rep.checks) {
            INFO(m.name, ": ", c.name, " margin=", c.margin, " ", c.witness);
            CHECK(c.pass);
        }
    }
    // adversarial input: sub above super must be rejected
    const HybridModel m = conveyor_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.05, 0});
    const StationarySolution sol = solve_stationary(m, grid, {});
    CHECK_FALSE(comparison_shadow_ordered(m, grid, sol.diag.dt, shifted(sol.V, 1.0),
                                          shifted(sol.V, -1.0), 10));
}

TEST_CASE("finite-horizon property suite passes on fixtures") {
    {
        const HybridModel m = constant_model();
        const ModelGrid grid = ModelGrid::build(m, GridSpec{0.05, 0});
        const PropertyReport rep =
            run_finite_horizon_properties(m, grid, TimeGrid{2.0, 100}, 7);
        for (const PropertyCheck& c : rep.checks) {
            INFO("constant: ", c.name, " margin=", c.margin, " ", c.witness);
            CHECK(c.pass);
        }
    }
    {
        const HybridModel m = conveyor_model();
        const ModelGrid grid = ModelGrid::build(m, GridSpec{0.02, 0});
        const PropertyReport rep =
            run_finite_horizon_properties(m, grid, TimeGrid{0.6, 60}, 7);
        for (const PropertyCheck& c : rep.checks) {
            INFO("conveyor: ", c.name, " margin=", c.margin, " ", c.witness);
            CHECK(c.pass);
        }
    }
}

TEST_CASE("suites are deterministic under a fixed seed") {
    const HybridModel m = conveyor_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.05, 0});
    CHECK(run_assumption_audit(m, 100, 9).to_json() ==
          run_assumption_audit(m, 100, 9).to_json());
    CHECK(run_operator_properties(m, grid, 20, 9).to_json() ==
          run_operator_properties(m, grid, 20, 9).to_json());
    CHECK(run_ode_estimates(m, 20, 9).to_json() == run_ode_estimates(m, 20, 9).to_json());
}

TEST_CASE("every module invariant has exactly one home across the suites") {
    const HybridModel m = conveyor_model();
    const ModelGrid grid = ModelGrid::build(m, GridSpec{0.02, 0});
    SolveConfig cfg;
    cfg.tol = 1e-7;

    std::vector<PropertyReport> reports;
    reports.push_back(run_assumption_audit(m, 100, 0));
    reports.push_back(run_operator_properties(m, grid, 20, 0));
    reports.push_back(run_ode_estimates(m, 20, 0));
    reports.push_back(run_trajectory_properties(m, grid, cfg, 4, 0));
    reports.push_back(run_comparison_shadow(m, grid, cfg, 0.1, 20));
    reports.push_back(run_finite_horizon_properties(m, grid, TimeGrid{0.6, 60}, 0));

    std::multiset<std::string> names;
    for (const PropertyReport& rep : reports)
        for (const PropertyCheck& c : rep.checks) names.insert(rep.suite + "." + c.name);

    const std::vector<std::string> expected = {
        // hybrid_model invariants
        "audit.sdf_lipschitz", "audit.normal_gradient", "audit.deterministic",
        // trajectory invariants
        "ode.eq7_separation_bound", "ode.eq8_time_bound",
        "trajectory.jump_separation", "trajectory.ledger_additivity",
        "trajectory.rk4_hit_order",
        // qvi_operators invariants
        "operators.monotonicity.M", "operators.monotonicity.N",
        "operators.monotonicity.continuation", "operators.shift.M",
        "operators.shift.continuation", "operators.M_insensitive_outside_D",
        "operators.hamiltonian_convexity",
        // stationary_solver invariants
        "comparison.solver.contraction", "comparison.solver.monotone_from_zero",
        "comparison.solver.nonnegativity", "comparison.sub_super_ordered",
        "trajectory.policy_consistency",
        // finite_horizon invariants
        "finite_horizon.slices_nonnegative_finite",
        "finite_horizon.horizon_monotonicity", "finite_horizon.dpp_one_step",
        "finite_horizon.slice_change_bound",
    };
    for (const std::string& name : expected) {
        INFO(name);
        CHECK(names.count(name) == 1);
    }
}
