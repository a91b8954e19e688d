#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "arsgeo/expr.hpp"

using namespace arsgeo;

namespace {

// Random well-conditioned expression trees: log/sqrt/div arguments are kept
// positive and bounded so central differences stay meaningful.
ScalarExpr random_tree(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> leaf(0, 2);
    std::uniform_real_distribution<double> cval(0.6, 2.4);
    if (depth <= 0) {
        switch (leaf(rng)) {
            case 0: return ScalarExpr::variable(Var::X);
            case 1: return ScalarExpr::variable(Var::Y);
            default: return ScalarExpr::constant(cval(rng));
        }
    }
    std::uniform_int_distribution<int> op(0, 10);
    ScalarExpr a = random_tree(rng, depth - 1);
    ScalarExpr b = random_tree(rng, depth - 1);
    switch (op(rng)) {
        case 0: return a + b;
        case 1: return a - b;
        case 2: return a * b;
        case 3: return a / (b * b + ScalarExpr::constant(1.3));
        case 4: return sin(a);
        case 5: return cos(a);
        case 6: return tan(ScalarExpr::constant(0.3) * a);
        case 7: return exp(ScalarExpr::constant(0.4) * a);
        case 8: return log(a * a + ScalarExpr::constant(1.1));
        case 9: return sqrt(a * a + ScalarExpr::constant(1.1));
        default: return pow(a, ScalarExpr::constant(op(rng) % 2 ? 2.0 : 3.0));
    }
}

} // namespace

TEST_CASE("parse and print round-trip on handpicked forms") {
    for (const char* text : {
             "1 - cos(x)",
             "x*-2",
             "-x^2",
             "x^y^2",
             "1 - (2 - x)",
             "sqrt(x*x + 1.1000000000000001)",
             "(x + y)*(x - y)",
             "-(x*y)",
             "sin(x)^2",
             "x/y/2",
             "x^(y + 1)",
             "exp(0.29999999999999999*cos(y))*sin(x)",
         }) {
        ScalarExpr e = parse_expr(text);
        ScalarExpr back = parse_expr(e.to_string());
        INFO(text << "  ->  " << e.to_string());
        CHECK(back == e);
    }
}

TEST_CASE("precedence: pow binds tighter than unary minus") {
    CHECK(parse_expr("-x^2").eval(3, 0) == -9.0);
    CHECK(parse_expr("(-x)^2").eval(3, 0) == 9.0);
    CHECK(parse_expr("2^3^2").eval(0, 0) == 512.0);
    CHECK(parse_expr("x^-2").eval(2, 0) == 0.25);
    CHECK(parse_expr("-x*y").eval(2, 5) == -10.0);
    CHECK(parse_expr("2 - 3 - 4").eval(0, 0) == -5.0);
    CHECK(parse_expr("12/2/3").eval(0, 0) == 2.0);
}

TEST_CASE("parse errors carry byte offsets") {
    auto offset_of = [](const char* text) -> std::string {
        try {
            parse_expr(text);
        } catch (const input_error& e) {
            return e.what();
        }
        return "";
    };
    CHECK(offset_of("x + ") .find("byte") != std::string::npos);
    CHECK(offset_of("x + foo(y)").find("unknown identifier 'foo'") != std::string::npos);
    CHECK(offset_of("x + foo(y)").find("byte 4") != std::string::npos);
    CHECK(offset_of("(x + y").find("expected ')'") != std::string::npos);
    CHECK(offset_of("x $ y").find("byte 2") != std::string::npos);
    CHECK(offset_of("x y").find("trailing") != std::string::npos);
}

TEST_CASE("eval raises on domain violations instead of returning NaN") {
    CHECK_THROWS_AS(parse_expr("log(x)").eval(0.0, 0), expr_domain_error);
    CHECK_THROWS_AS(parse_expr("log(x)").eval(-1.0, 0), expr_domain_error);
    CHECK_THROWS_AS(parse_expr("sqrt(x)").eval(-0.5, 0), expr_domain_error);
    CHECK_THROWS_AS(parse_expr("1/x").eval(0.0, 0), expr_domain_error);
    CHECK_THROWS_AS(parse_expr("x^0.5").eval(-2.0, 0), expr_domain_error);
    CHECK(parse_expr("x^3").eval(-2.0, 0) == -8.0);
    CHECK(parse_expr("x^2").eval(-2.0, 0) == 4.0);
}

TEST_CASE("construction applies only the trivial rewrites") {
    ScalarExpr x = ScalarExpr::variable(Var::X);
    CHECK((x * ScalarExpr::constant(0)).is_constant(0.0));
    CHECK((ScalarExpr::constant(1) * x) == x);
    CHECK((x + ScalarExpr::constant(0)) == x);
    CHECK((x - ScalarExpr::constant(0)) == x);
    CHECK(pow(x, ScalarExpr::constant(1)) == x);
    // No deep rewriting: x - x stays a Sub node.
    CHECK((x - x).kind() == ExprKind::Sub);
}

TEST_CASE("exact derivatives of reference expressions") {
    ScalarExpr e = parse_expr("1 - cos(x)");
    CHECK(e.diff(Var::X) == parse_expr("sin(x)"));
    CHECK(e.diff(Var::X).diff(Var::X) == parse_expr("cos(x)"));
    CHECK(e.diff(Var::Y).is_constant(0.0));

    ScalarExpr g = parse_expr("x*y + sin(x)");
    CHECK(g.diff(Var::X) == parse_expr("y + cos(x)"));
    CHECK(g.diff(Var::Y) == parse_expr("x"));

    // d/dx x^3 = 3 x^2
    CHECK(parse_expr("x^3").diff(Var::X) == parse_expr("3*x^2"));
}

TEST_CASE("derivatives match central finite differences on random trees") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    const double h = 1e-5;
    int checked = 0;
    for (int tree = 0; tree < 40; ++tree) {
        ScalarExpr e = random_tree(rng, 6);
        ScalarExpr dx = e.diff(Var::X);
        ScalarExpr dy = e.diff(Var::Y);
        for (int pt = 0; pt < 100; ++pt) {
            double x = coord(rng), y = coord(rng);
            double fdx, fdy, fdx2, fdy2, ex, ey;
            try {
                fdx = (e.eval(x + h, y) - e.eval(x - h, y)) / (2 * h);
                fdy = (e.eval(x, y + h) - e.eval(x, y - h)) / (2 * h);
                fdx2 = (e.eval(x + 2 * h, y) - e.eval(x - 2 * h, y)) / (4 * h);
                fdy2 = (e.eval(x, y + 2 * h) - e.eval(x, y - 2 * h)) / (4 * h);
                ex = dx.eval(x, y);
                ey = dy.eval(x, y);
            } catch (const expr_domain_error&) {
                continue;
            }
            // The difference oracle must itself be converged at this point;
            // otherwise the comparison measures truncation, not correctness.
            if (std::fabs(fdx - fdx2) > 0.25e-6 * (1.0 + std::fabs(fdx))) continue;
            if (std::fabs(fdy - fdy2) > 0.25e-6 * (1.0 + std::fabs(fdy))) continue;
            INFO("tree " << tree << " at (" << x << ", " << y << "): " << e.to_string());
            REQUIRE(std::fabs(ex - fdx) <= 1e-6 * (1.0 + std::fabs(fdx)));
            REQUIRE(std::fabs(ey - fdy) <= 1e-6 * (1.0 + std::fabs(fdy)));
            ++checked;
        }
        ScalarExpr back = parse_expr(e.to_string());
        REQUIRE(back == e);
    }
    CHECK(checked > 2000);
}
