#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hybridqvi/trajectory.hpp"
#include "test_models.hpp"

using namespace hybridqvi;
using namespace hybridqvi::testing;

namespace {

PiecewiseControl zero_control() { return PiecewiseControl::constant(Vec{0.0}); }

}  // namespace

TEST_CASE("zero drift gives a constant arc with no hit") {
    const HybridModel m = constant_model();
    const ArcResult r = integrate_arc(m, HybridState{0, {0.3}}, 0.0, zero_control(), 1.0);
    CHECK_FALSE(r.hit.has_value());
    CHECK(r.arc.t1 == doctest::Approx(1.0));
    for (const Vec& s : r.arc.states) CHECK(s[0] == doctest::Approx(0.3));
}

TEST_CASE("unit drift hits A = {x >= 2} at t = 2") {
    const HybridModel m = conveyor_model();
    const ArcResult r = integrate_arc(m, HybridState{0, {0.0}}, 0.0, zero_control(), 10.0);
    REQUIRE(r.hit.has_value());
    CHECK(r.hit->kind == Hit::Kind::A);
    CHECK(std::abs(r.hit->time - 2.0) <= 1e-9);
    CHECK(std::abs(r.hit->state.x[0] - 2.0) <= 1e-9);
}

TEST_CASE("exponential field hits {x >= e} at t = 1 (oracle: ln(e/1))") {
    const HybridModel m = model_from_json(expgrow_json());
    const ArcResult r = integrate_arc(m, HybridState{0, {1.0}}, 0.0, zero_control(), 10.0);
    REQUIRE(r.hit.has_value());
    CHECK(std::abs(r.hit->time - 1.0) <= 1e-6);
}

TEST_CASE("a start inside A is an immediate hit") {
    const HybridModel m = conveyor_model();
    const ArcResult r = integrate_arc(m, HybridState{0, {2.5}}, 0.0, zero_control(), 1.0);
    REQUIRE(r.hit.has_value());
    CHECK(r.hit->time == doctest::Approx(0.0));
}

TEST_CASE("leaving the domain away from A is a model fault") {
    json doc = constant_json();  // domain [-1,1], no A
    doc["dynamics"] = {{"1"}};
    doc["constants"]["F"] = 1.0;
    const HybridModel m = model_from_json(doc);
    CHECK_THROWS_AS(
        integrate_arc(m, HybridState{0, {0.9}}, 0.0, zero_control(), 5.0),
        ModelError);
}

TEST_CASE("apply_autonomous_jump lands in D and changes chart when g does") {
    const HybridModel conveyor = conveyor_model();
    const HybridState post =
        apply_autonomous_jump(conveyor, HybridState{0, {2.0}}, 0);
    CHECK(post.x[0] == doctest::Approx(0.5));

    const HybridModel two = two_chart_model();
    const HybridState cross = apply_autonomous_jump(two, HybridState{0, {2.0}}, 0);
    CHECK(cross.chart == 1);
    CHECK(cross.x[0] == doctest::Approx(0.5));

    CHECK_THROWS_AS(apply_autonomous_jump(conveyor, HybridState{0, {1.0}}, 0),
                    ModelError);
    CHECK_THROWS_AS(apply_autonomous_jump(conveyor, HybridState{0, {2.0}}, 5),
                    ModelError);
}

TEST_CASE("stationary cost of K=1, f=0, lambda=1 is 1 up to the tail tolerance") {
    const HybridModel m = constant_model();
    ExplicitStrategy theta;
    theta.u = zero_control();
    const TrajectoryRecord rec =
        simulate(m, HybridState{0, {0.0}}, theta, StationaryHorizon{1e-6});
    CHECK(rec.truncated);
    CHECK(std::abs(rec.totalCost - 1.0) <= 1e-6 + 1e-9);
    CHECK(rec.truncationBound <= 1e-6);
}

TEST_CASE("finite horizon with K=1, h=0 and no jumps integrates to T - s") {
    const HybridModel m = constant_model();
    ExplicitStrategy theta;
    theta.u = zero_control();
    const TrajectoryRecord rec =
        simulate(m, HybridState{0, {0.0}}, theta, FiniteHorizon{0.0, 2.0});
    CHECK(rec.totalCost == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(rec.events.empty());
}

TEST_CASE("conveyor loop cost matches the geometric series oracle") {
    const HybridModel m = conveyor_model();
    ExplicitStrategy theta;
    theta.u = zero_control();
    const TrajectoryRecord rec =
        simulate(m, HybridState{0, {0.5}}, theta, StationaryHorizon{1e-6});
    // c * sum_n e^{-1.5 n lambda} with c = 1 (cost paid at each hit of x = 2)
    const double oracle = std::exp(-1.5) / (1.0 - std::exp(-1.5));
    CHECK(std::abs(rec.totalCost - oracle) <= 1e-4);
    CHECK(rec.events.size() >= 5);
    for (const JumpEvent& e : rec.events) {
        CHECK(e.kind == JumpEvent::Kind::Autonomous);
        CHECK(std::abs(e.pre.x[0] - 2.0) <= 1e-8);
        CHECK(e.post.x[0] == doctest::Approx(0.5));
        CHECK(e.cost >= m.constants.Cprime - 1e-12);
    }
}

TEST_CASE("jump separation respects beta over the dynamics bound") {
    const HybridModel m = conveyor_model();
    ExplicitStrategy theta;
    theta.u = zero_control();
    const TrajectoryRecord rec =
        simulate(m, HybridState{0, {0.5}}, theta, StationaryHorizon{1e-6});
    const double gap = m.constants.beta / m.constants.F;
    for (std::size_t i = 1; i < rec.events.size(); ++i)
        CHECK(rec.events[i].time - rec.events[i - 1].time >= gap - 1e-9);
}

TEST_CASE("cost ledger recomputes from parts to 1e-10") {
    const HybridModel m = conveyor_model();
    ExplicitStrategy theta;
    theta.u = zero_control();
    const TrajectoryRecord rec =
        simulate(m, HybridState{0, {0.5}}, theta, StationaryHorizon{1e-7});
    CHECK(std::abs(rec.totalCost - rec.ledger_recompute()) <= 1e-10);

    const HybridModel c = constant_model();
    const TrajectoryRecord fin =
        simulate(c, HybridState{0, {0.2}}, theta, FiniteHorizon{0.5, 2.0});
    CHECK(std::abs(fin.totalCost - fin.ledger_recompute()) <= 1e-10);
}

TEST_CASE("ODE estimate (7): linear field attains the bound with equality") {
    const double L = 0.5;
    const HybridModel m = model_from_json(linear_field_json(L));
    const HybridState x0{0, {1.0}};
    const HybridState z0{0, {1.1}};
    const ArcResult rx = integrate_arc(m, x0, 0.0, zero_control(), 1.0);
    const ArcResult rz = integrate_arc(m, z0, 0.0, zero_control(), 1.0);
    REQUIRE(rx.arc.times.size() == rz.arc.times.size());
    for (std::size_t i = 0; i < rx.arc.times.size(); ++i) {
        const double sep = dist(rx.arc.states[i], rz.arc.states[i]);
        const double bound = std::exp(L * rx.arc.times[i]) * 0.1;
        CHECK(std::abs(sep - bound) <= 1e-8);
    }
}

TEST_CASE("ODE estimate (8): arc displacement is bounded by Fhat times elapsed time") {
    const HybridModel m = conveyor_model();
    const ArcResult r = integrate_arc(m, HybridState{0, {0.0}}, 0.0, zero_control(), 1.5);
    for (std::size_t a = 0; a < r.arc.times.size(); ++a)
        for (std::size_t b = a + 1; b < r.arc.times.size(); ++b) {
            const double lhs = dist(r.arc.states[a], r.arc.states[b]);
            const double rhs = m.constants.F * (r.arc.times[b] - r.arc.times[a]);
            CHECK(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
        }
}

TEST_CASE("halving the step improves hit times at RK4 order on a smooth field") {
    const HybridModel m = model_from_json(expgrow_json());
    auto hit = [&](double step) {
        IntegrateOptions opt;
        opt.step = step;
        return integrate_arc(m, HybridState{0, {1.0}}, 0.0, zero_control(), 10.0, opt)
            .hit->time;
    };
    const double ref = hit(0.00125);
    const double e1 = std::abs(hit(0.02) - ref);
    const double e2 = std::abs(hit(0.01) - ref);
    REQUIRE(e2 > 1e-12);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 3.5);
}

TEST_CASE("explicit controlled jumps execute at their scheduled times") {
    const HybridModel m = controlled_model();
    // drift from 0.5 toward 2.25 enters C = [2, 2.5] at t* = ln(1.75/0.25)/1
    const double tStar = std::log(1.75 / 0.25);
    ExplicitStrategy theta;
    theta.u = zero_control();
    theta.controlledJumps = {{tStar + 0.05, HybridState{0, {0.5}}}};
    const TrajectoryRecord rec =
        simulate(m, HybridState{0, {0.5}}, theta, FiniteHorizon{0.0, tStar + 0.1});
    REQUIRE(rec.events.size() == 1);
    CHECK(rec.events[0].kind == JumpEvent::Kind::Controlled);
    CHECK(rec.events[0].cost == doctest::Approx(0.5));
    CHECK(rec.events[0].post.x[0] == doctest::Approx(0.5));

    // scheduling a jump while outside C is an error
    ExplicitStrategy bad;
    bad.u = zero_control();
    bad.controlledJumps = {{0.1, HybridState{0, {0.5}}}};
    CHECK_THROWS_AS(
        simulate(m, HybridState{0, {0.5}}, bad, FiniteHorizon{0.0, 1.0}),
        ModelError);
}

TEST_CASE("trajectory serialization emits samples, events and a summary") {
    const HybridModel m = conveyor_model();
    ExplicitStrategy theta;
    theta.u = zero_control();
    const TrajectoryRecord rec =
        simulate(m, HybridState{0, {1.9}}, theta, StationaryHorizon{1e-4});
    std::ostringstream jsonl;
    rec.write_jsonl(jsonl);
    std::size_t lines = 0, events = 0;
    std::istringstream in(jsonl.str());
    std::string line;
    while (std::getline(in, line)) {
        const auto doc = nlohmann::json::parse(line);
        ++lines;
        const std::string type = doc.at("type");
        if (type.rfind("jump", 0) == 0) ++events;
        if (type == "summary")
            CHECK(doc.at("total_cost").get<double>() == doctest::Approx(rec.totalCost));
    }
    CHECK(lines > 10);
    CHECK(events == rec.events.size());

    std::ostringstream csv;
    rec.write_summary_csv(csv);
    CHECK(csv.str().rfind("t,chart,x1,event_kind,cost_increment,discounted_increment\n", 0) == 0);
}
