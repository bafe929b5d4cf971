#include <doctest.h>

#include "hybridqvi/model.hpp"
#include "test_models.hpp"

using namespace hybridqvi;
using namespace hybridqvi::testing;

TEST_CASE("conveyor model loads and evaluates") {
    const HybridModel m = conveyor_model();
    CHECK(m.chartCount() == 1);
    CHECK(m.charts[0].dim == 1);
    CHECK(m.f(0, Vec{1.0}, 0.0, m.controls.uSamples[0])[0] == doctest::Approx(1.0));
    CHECK(m.K(0, Vec{1.0}, 0.0, m.controls.uSamples[0]) == doctest::Approx(0.0));
    const HybridState post = m.g(HybridState{0, {2.0}}, 0);
    CHECK(post.chart == 0);
    CHECK(post.x[0] == doctest::Approx(0.5));
    CHECK(m.Ca(HybridState{0, {2.0}}, 0) == doctest::Approx(1.0));
    CHECK_FALSE(m.cIntersectsD);
    CHECK(m.onA(HybridState{0, {2.5}}, 1e-9));
    CHECK_FALSE(m.onA(HybridState{0, {1.0}}, 1e-9));
    CHECK(m.inD(HybridState{0, {0.5}}, 1e-9));
}

TEST_CASE("conveyor model passes the full assumption audit") {
    const HybridModel m = conveyor_model();
    const ValidationReport rep = validate_model(m, 200, 0);
    for (const CheckEntry& e : rep.entries) {
        INFO(e.name, ": ", e.detail);
        CHECK(e.pass);
    }
    CHECK(rep.all_pass());
}

TEST_CASE("reversed drift at the A boundary fails transversality") {
    json doc = conveyor_json();
    doc["dynamics"] = {{"-1"}};
    const HybridModel m = model_from_json(doc);
    const ValidationReport rep = validate_model(m, 200, 0);
    REQUIRE(rep.find("transversality.A") != nullptr);
    CHECK_FALSE(rep.find("transversality.A")->pass);
    CHECK_FALSE(rep.all_pass());
}

TEST_CASE("a destination point beyond R fails the radius check") {
    json doc = conveyor_json();
    // move D out to |x| around R + 1
    doc["charts"][0]["D"] = {{{"type", "ball"}, {"center", {2.0}}, {"radius", 0.1}}};
    doc["jump_map"][0][0]["coords"] = {"2.0"};
    const HybridModel m = model_from_json(doc);
    const ValidationReport rep = validate_model(m, 200, 0);
    REQUIRE(rep.find("destination.radius") != nullptr);
    CHECK_FALSE(rep.find("destination.radius")->pass);
}

TEST_CASE("validation is deterministic under a fixed seed") {
    const HybridModel m = conveyor_model();
    const ValidationReport a = validate_model(m, 150, 42);
    const ValidationReport b = validate_model(m, 150, 42);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].pass == b.entries[i].pass);
        CHECK(a.entries[i].margin == b.entries[i].margin);
    }
}

TEST_CASE("structural errors are rejected at load") {
    json doc = conveyor_json();
    doc["constants"]["lambda"] = 0.0;
    CHECK_THROWS_AS(model_from_json(doc), ModelError);

    doc = conveyor_json();
    doc["constants"]["beta"] = -1.0;
    CHECK_THROWS_AS(model_from_json(doc), ModelError);

    doc = conveyor_json();
    doc["dynamics"] = {{"1", "1"}};  // wrong component count
    CHECK_THROWS_AS(model_from_json(doc), ModelError);

    doc = conveyor_json();
    doc.erase("charts");
    CHECK_THROWS_AS(model_from_json(doc), ModelError);

    doc = conveyor_json();
    doc["jump_map"][0][0]["target"] = 3;  // chart out of range
    CHECK_THROWS_AS(model_from_json(doc), ModelError);
}

TEST_CASE("C intersecting D is detected by sampling") {
    CHECK_FALSE(controlled_model().cIntersectsD);  // C=[2,2.5], D around 0.5
    CHECK(model_from_json(overlap_json("0.2 + abs(x1-y1)")).cIntersectsD);
}

TEST_CASE("the declared flag overrides the sampled C∩D detection") {
    json doc = overlap_json("0.2 + abs(x1-y1)");
    doc["flags"] = {{"c_intersects_d", false}};
    CHECK_FALSE(model_from_json(doc).cIntersectsD);
}

TEST_CASE("growth audit flags a cost growing faster than the declared degree") {
    json doc = controlled_json();
    doc["costs"]["K"] = "x1^3";  // degree 3 against declared k = 1
    const HybridModel m = model_from_json(doc);
    const ValidationReport rep = validate_model(m, 300, 0);
    REQUIRE(rep.find("growth.K") != nullptr);
    CHECK_FALSE(rep.find("growth.K")->pass);
}

TEST_CASE("lambda > kL is checked exactly") {
    json doc = controlled_json();
    doc["constants"]["lambda"] = 0.5;  // k = 1, L = 1 -> 0.5 < 1
    const HybridModel m = model_from_json(doc);
    const ValidationReport rep = validate_model(m, 100, 0);
    REQUIRE(rep.find("growth.lambda_kL") != nullptr);
    CHECK_FALSE(rep.find("growth.lambda_kL")->pass);
}

TEST_CASE("two-chart model validates and jumps across charts") {
    const HybridModel m = two_chart_model();
    const ValidationReport rep = validate_model(m, 200, 0);
    for (const CheckEntry& e : rep.entries) {
        INFO(e.name, ": ", e.detail);
        CHECK(e.pass);
    }
    const HybridState post = m.g(HybridState{0, {2.0}}, 0);
    CHECK(post.chart == 1);
    CHECK(post.x[0] == doctest::Approx(0.5));
}
