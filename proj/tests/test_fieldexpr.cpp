#include <doctest.h>

#include "fgeo/fieldexpr.hpp"
#include "fgeo/numerics.hpp"

#include <cmath>

using namespace fgeo;

namespace {
double ev(const std::string& s, const Vec& x = Vec(), const Vec& t = Vec()) {
    return parse_field(s, static_cast<int>(x.size()), static_cast<int>(t.size())).eval(x, t);
}
} // namespace

TEST_CASE("grammar examples") {
    const FieldExpression g = parse_field("exp(-(x1^2+x2^2)/2)", 2, 0);
    CHECK(g.eval(vec({1.0, 2.0}), Vec()) == doctest::Approx(std::exp(-2.5)));
    const FieldExpression z = parse_field("erfc(t1/sqrt(2))", 0, 1);
    CHECK(z.eval(Vec(), vec({1.0})) == doctest::Approx(std::erfc(1.0 / std::sqrt(2.0))));
    CHECK_THROWS_AS(parse_field("x3", 2, 0), ParseError);
    CHECK_THROWS_AS(parse_field("t2", 2, 1), ParseError);
}

TEST_CASE("syntax errors carry a position") {
    try {
        parse_field("1 +\n  * x1", 1, 0);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 3);
    }
    CHECK_THROWS_AS(parse_field("", 1, 0), ParseError);
    CHECK_THROWS_AS(parse_field("max(x1)", 1, 0), ParseError);
    CHECK_THROWS_AS(parse_field("exp(1, 2)", 1, 0), ParseError);
    CHECK_THROWS_AS(parse_field("foo(x1)", 1, 0), ParseError);
    CHECK_THROWS_AS(parse_field("(x1", 1, 0), ParseError);
}

TEST_CASE("precedence and associativity") {
    CHECK(ev("2^3^2") == 512.0);
    CHECK(ev("-2^2") == -4.0);
    CHECK(ev("2*-3") == -6.0);
    CHECK(ev("8/4/2") == 1.0);
    CHECK(ev("1-2-3") == -4.0);
    CHECK(ev("2+3*4^2") == 50.0);
    CHECK(ev("min(3, max(1, 2))") == 2.0);
    CHECK(ev("abs(-pi)") == doctest::Approx(kPi));
    CHECK(ev("log(e)") == doctest::Approx(1.0));
    CHECK(ev("1.5e-3*2") == doctest::Approx(3e-3));
}

TEST_CASE("error-function values") {
    CHECK(ev("erf(0)") == 0.0);
    CHECK(ev("erfc(0)") == 1.0);
    for (double s = -6.0; s <= 6.0; s += 0.25) {
        const double v = ev("erf(x1) + erfc(x1)", vec({s}));
        CHECK(std::abs(v - 1.0) <= 1e-14);
    }
}

TEST_CASE("sqrt(pi) forms agree with the gaussian integral") {
    const double integral = integrate([](double x) { return std::exp(-x * x); }, -kInf, kInf).value;
    CHECK(ev("sqrt(pi)") == doctest::Approx(integral).epsilon(1e-12));
    CHECK(ev("exp(0.5*log(pi))") == doctest::Approx(integral).epsilon(1e-12));
    CHECK(ev("pi^0.5") == doctest::Approx(integral).epsilon(1e-12));
}

TEST_CASE("domain errors carry the subexpression") {
    try {
        ev("1 + log(x1 - 2)", vec({1.0}));
        FAIL("expected an evaluation error");
    } catch (const EvalError& e) {
        CHECK(e.subexpression.find("log") != std::string::npos);
    }
    CHECK_THROWS_AS(ev("sqrt(-1)"), EvalError);
    CHECK_THROWS_AS(ev("(-2)^0.5"), EvalError);
    CHECK(ev("(-2)^3") == -8.0);
}

TEST_CASE("evaluation context checks dimensions") {
    const FieldExpression e = parse_field("x1*t1", 1, 1);
    EvalContext ctx{Point("x", vec({2.0})), ControlParams{3.0}};
    CHECK(eval_field(e, ctx) == 6.0);
    ctx.x = Point("x", vec({2.0, 1.0}));
    CHECK_THROWS_AS(eval_field(e, ctx), DimensionError);
}

TEST_CASE("print-parse fixpoint") {
    for (const char* s : {"exp(-(x1^2+x2^2)/2)", "erfc(t1/sqrt(2))", "-x1^-2*3-(x2-t1)/t1", "2^3^2",
                          "max(min(x1,x2),abs(-x1))+e*pi", "sin(x1)*cos(x2)/tan(1+x1)", "1e-300+x2"}) {
        const FieldExpression a = parse_field(s, 2, 1);
        const FieldExpression b = parse_field(a.print(), 2, 1);
        CHECK(same_tree(a.root(), b.root()));
        CHECK(b.print() == a.print());
        const Vec x = vec({0.3, 0.7}), t = vec({1.1});
        CHECK(a.eval(x, t) == b.eval(x, t));
    }
}

TEST_CASE("numerical gradient is self-consistent") {
    const FieldExpression e = parse_field("exp(-x1^2/2)*log(2+x2) + x1*x2^3", 2, 0);
    const Vec x = vec({0.4, 1.3}), t;
    const Vec g = field_gradient(e, x, t);
    auto f = [&](const Vec& y) { return e.eval(y, t); };
    for (int k = 0; k < 2; ++k) CHECK(g(k) == doctest::Approx(diff1_o4(f, x, k, 1e-3)).epsilon(1e-6));
}
