#include <doctest.h>

#include <cmath>

#include "hybridqvi/expr.hpp"
#include "hybridqvi/numeric.hpp"

using namespace hybridqvi;

namespace {

double ev(const std::string& src, const EvalContext& ctx = {}) {
    return Expr::parse(src).eval(ctx);
}

}  // namespace

TEST_CASE("arithmetic and precedence") {
    CHECK(ev("1 + 2*3") == doctest::Approx(7.0));
    CHECK(ev("(1+2)*3") == doctest::Approx(9.0));
    CHECK(ev("2^3^2") == doctest::Approx(512.0));  // right associative
    CHECK(ev("-2^2") == doctest::Approx(-4.0));    // unary binds outside pow
    CHECK(ev("10/4") == doctest::Approx(2.5));
    CHECK(ev("1 - 2 - 3") == doctest::Approx(-4.0));
}

TEST_CASE("variables bind to the context") {
    const Vec x{1.5, -2.0};
    const Vec u{0.25};
    const Vec v{3.0};
    const Vec y{7.0};
    EvalContext ctx{x, 0.5, u, v, y};
    CHECK(ev("x1 + x2", ctx) == doctest::Approx(-0.5));
    CHECK(ev("t", ctx) == doctest::Approx(0.5));
    CHECK(ev("u1*4", ctx) == doctest::Approx(1.0));
    CHECK(ev("v1 + y1", ctx) == doctest::Approx(10.0));
    CHECK_THROWS_AS(ev("x3", ctx), ExprError);
    CHECK_THROWS_AS(ev("u2", ctx), ExprError);
}

TEST_CASE("builtins") {
    CHECK(ev("min(3, 1, 2)") == doctest::Approx(1.0));
    CHECK(ev("max(3, 1, 2)") == doctest::Approx(3.0));
    CHECK(ev("exp(1)") == doctest::Approx(M_E));
    CHECK(ev("abs(-4)") == doctest::Approx(4.0));
    CHECK(ev("sqrt(9)") == doctest::Approx(3.0));
    CHECK(ev("pow(2, 10)") == doctest::Approx(1024.0));
    CHECK(ev("sign(-0.5)") == doctest::Approx(-1.0));
    CHECK(ev("if(2 > 1, 10, 20)") == doctest::Approx(10.0));
    CHECK(ev("if(2 < 1, 10, 20)") == doctest::Approx(20.0));
    CHECK(ev("piecewise(0, 1, 1, 2, 3)") == doctest::Approx(2.0));
    CHECK(ev("piecewise(0, 1, 0, 2, 3)") == doctest::Approx(3.0));
    CHECK(ev("pi") == doctest::Approx(M_PI));
}

TEST_CASE("comparisons evaluate to 0/1") {
    CHECK(ev("1 <= 1") == doctest::Approx(1.0));
    CHECK(ev("1 >= 2") == doctest::Approx(0.0));
    CHECK(ev("2 == 2") == doctest::Approx(1.0));
    CHECK(ev("2 != 2") == doctest::Approx(0.0));
}

TEST_CASE("parse errors carry position info") {
    CHECK_THROWS_AS(Expr::parse(""), ExprError);
    CHECK_THROWS_AS(Expr::parse("1 +"), ExprError);
    CHECK_THROWS_AS(Expr::parse("foo(1)"), ExprError);
    CHECK_THROWS_AS(Expr::parse("x0"), ExprError);
    CHECK_THROWS_AS(Expr::parse("min(1)"), ExprError);
    CHECK_THROWS_AS(Expr::parse("(1"), ExprError);
    CHECK_THROWS_AS(Expr::parse("1 2"), ExprError);
    CHECK_THROWS_AS(Expr::parse("piecewise(1, 2)"), ExprError);
}
