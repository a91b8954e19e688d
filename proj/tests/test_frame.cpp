#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "arsgeo/atlas.hpp"
#include "arsgeo/classify.hpp"
#include "arsgeo/frame.hpp"
#include "arsgeo/singular_locus.hpp"

using namespace arsgeo;

namespace {

Chart box(double x0, double x1, double y0, double y1,
          AxisIdent ix = AxisIdent::None, AxisIdent iy = AxisIdent::None) {
    Chart c;
    c.x0 = x0; c.x1 = x1; c.y0 = y0; c.y1 = y1;
    c.ident_x = ix; c.ident_y = iy;
    return c;
}

Frame2 make_frame(const Chart& ch, const char* xu, const char* xv,
                  const char* yu, const char* yv) {
    return Frame2(ch, VectorField2::parse(xu, xv), VectorField2::parse(yu, yv));
}

Frame2 grushin(double half = 3) {
    return make_frame(box(-half, half, -half, half), "1", "0", "0", "x");
}

Frame2 davydov() {
    return make_frame(box(-2, 2, -2, 2), "1", "0", "0", "y - x^2");
}

Frame2 euclid() {
    return make_frame(box(-2, 2, -2, 2), "1", "0", "0", "1");
}

// Bracket by central differences of the fields' Jacobians, h = 1e-5.
Vec2 fd_bracket(const VectorField2& V, const VectorField2& W, Vec2 q) {
    const double h = 1e-5;
    auto jac = [&](const VectorField2& F) {
        Vec2 fx = (F.value({q.x + h, q.y}) - F.value({q.x - h, q.y})) / (2 * h);
        Vec2 fy = (F.value({q.x, q.y + h}) - F.value({q.x, q.y - h})) / (2 * h);
        return Mat2{fx.x, fy.x, fx.y, fy.y};
    };
    return jac(W) * V.value(q) - jac(V) * W.value(q);
}

} // namespace

TEST_CASE("frame determinant and bracket on reference frames") {
    Frame2 g = grushin();
    CHECK(frame_det(g, {2, 5}) == 2.0);
    CHECK(frame_det(g, {0, 7}) == 0.0);
    CHECK(frame_det(davydov(), {1, 1}) == 0.0);

    Vec2 b = lie_bracket(g, {0.3, -1.7});
    CHECK(b.x == 0.0);
    CHECK(b.y == 1.0);

    Vec2 bd = lie_bracket(davydov(), {0, 0});
    CHECK(bd.x == 0.0);
    CHECK(bd.y == 0.0);

    VectorField2 V = VectorField2::parse("sin(x)*y", "exp(0.2*x)");
    Vec2 vv = lie_bracket(V, V, {0.4, 1.2});
    CHECK(vv.x == 0.0);
    CHECK(vv.y == 0.0);
}

TEST_CASE("symbolic bracket matches finite differences on varied frames") {
    struct Case { const char *xu, *xv, *yu, *yv; };
    const Case cases[] = {
        {"1", "0", "0", "x"},
        {"1", "0", "0", "y - x^2"},
        {"1", "0", "0", "sin(x)"},
        {"cos(y)", "sin(x*y)", "x*y", "exp(0.3*x)"},
        {"1", "0", "0", "x*exp(0.2*x*cos(y))"},
    };
    std::mt19937 rng(7233);
    std::uniform_real_distribution<double> unif(-1.5, 1.5);
    for (const Case& c : cases) {
        VectorField2 X = VectorField2::parse(c.xu, c.xv);
        VectorField2 Y = VectorField2::parse(c.yu, c.yv);
        for (int k = 0; k < 100; ++k) {
            Vec2 q{unif(rng), unif(rng)};
            Vec2 exact = lie_bracket(X, Y, q);
            Vec2 fd = fd_bracket(X, Y, q);
            CHECK(std::fabs(exact.x - fd.x) < 1e-6);
            CHECK(std::fabs(exact.y - fd.y) < 1e-6);
        }
    }
}

TEST_CASE("point classification on the reference frames") {
    Frame2 g = grushin();
    PointClass pc = classify_point(g, {0, 0});
    CHECK(pc.kind == PointKind::Grushin);
    CHECK(pc.dims[0] == 1);
    CHECK(pc.dims[1] == 2);
    CHECK(pc.dims[2] == 2);

    CHECK(classify_point(g, {1, 0}).kind == PointKind::Ordinary);
    CHECK(classify_point(g, {-0.5, 2}).kind == PointKind::Ordinary);

    PointClass td = classify_point(davydov(), {0, 0});
    CHECK(td.kind == PointKind::Tangency);
    CHECK(td.dims[0] == 1);
    CHECK(td.dims[1] == 1);
    CHECK(td.dims[2] == 2);

    // Non-tangency Z points of the parabola are Grushin.
    CHECK(classify_point(davydov(), {1, 1}).kind == PointKind::Grushin);

    // X = (1,0), Y = (0,0): bracket vanishes identically, flag never fills.
    Frame2 degenerate = make_frame(box(-1, 1, -1, 1), "1", "0", "0", "0");
    CHECK(classify_point(degenerate, {0, 0}).kind == PointKind::NonGeneric);
}

TEST_CASE("classification is invariant under frame swaps and sign flips") {
    std::mt19937 rng(915);
    std::uniform_real_distribution<double> unif(-1.8, 1.8);
    Chart ch = box(-2, 2, -2, 2);
    VectorField2 X = VectorField2::parse("1", "0");
    VectorField2 Y = VectorField2::parse("0", "y - x^2");
    VectorField2 Xn = VectorField2::parse("-1", "0");
    VectorField2 Yn = VectorField2::parse("0", "x^2 - y");

    Frame2 base(ch, X, Y), swapped(ch, Y, X), flipped(ch, Xn, Yn);
    for (int k = 0; k < 60; ++k) {
        Vec2 q{unif(rng), unif(rng)};
        PointClass a = classify_point(base, q);
        PointClass b = classify_point(swapped, q);
        PointClass c = classify_point(flipped, q);
        CHECK(a.kind == b.kind);
        CHECK(a.kind == c.kind);
        for (int i = 0; i < 3; ++i) {
            CHECK(a.dims[i] == b.dims[i]);
            CHECK(a.dims[i] == c.dims[i]);
        }
    }
}

TEST_CASE("singular locus of the Grushin frame is the vertical axis") {
    Frame2 g = make_frame(box(-2, 2, -2, 2), "1", "0", "0", "x");
    auto locus = trace_singular_locus(g, 64);
    REQUIRE(locus.size() == 1);
    const Polyline& pl = locus[0];
    CHECK_FALSE(pl.closed);
    CHECK(pl.pts.size() >= 60);
    double ymin = 1e300, ymax = -1e300;
    for (const Vec2& p : pl.pts) {
        CHECK(std::fabs(p.x) < 1e-10);
        CHECK(std::fabs(g.det(p)) < 1e-10);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    CHECK(ymin == -2.0);
    CHECK(ymax == 2.0);
}

TEST_CASE("singular locus of the Davydov frame is the parabola") {
    Frame2 d = davydov();
    auto locus = trace_singular_locus(d, 96);
    REQUIRE(locus.size() == 1);
    for (const Vec2& p : locus[0].pts) {
        CHECK(std::fabs(p.y - p.x * p.x) < 1e-8);
        CHECK(std::fabs(d.det(p)) < 1e-10);
    }
    CHECK_FALSE(locus[0].closed);
}

TEST_CASE("singular locus respects torus identifications") {
    Chart torus = box(-M_PI, M_PI, -M_PI, M_PI, AxisIdent::Periodic, AxisIdent::Periodic);
    Frame2 f = make_frame(torus, "1", "0", "0", "sin(x)");
    auto locus = trace_singular_locus(f, 60);
    REQUIRE(locus.size() == 2);
    for (const Polyline& pl : locus) {
        CHECK(pl.closed);
        double x = pl.pts.front().x;
        bool at_zero = std::fabs(x) < 1e-9;
        bool at_pi = std::fabs(std::fabs(x) - M_PI) < 1e-9;
        CHECK((at_zero || at_pi));
        for (const Vec2& p : pl.pts) CHECK(std::fabs(f.det(p)) < 1e-10);
    }
}

TEST_CASE("singular locus catches zeros without sign change") {
    Chart torus = box(-M_PI, M_PI, -M_PI, M_PI, AxisIdent::Periodic, AxisIdent::Periodic);
    Frame2 f = make_frame(torus, "1", "0", "0", "1 - cos(x)");
    auto locus = trace_singular_locus(f, 60);
    REQUIRE(locus.size() == 1);
    CHECK(locus[0].closed);
    for (const Vec2& p : locus[0].pts) {
        CHECK(std::fabs(p.x) < 1e-9);
        CHECK(std::fabs(f.det(p)) < 1e-10);
    }
}

TEST_CASE("singular locus of a Riemannian frame is empty") {
    CHECK(trace_singular_locus(euclid(), 32).empty());
}

TEST_CASE("genericity report for the reference frames") {
    GenericityReport g = genericity_check(grushin(), 64);
    CHECK(g.nondegenerate_locus);
    CHECK(g.isolated_tangencies);
    CHECK(g.full_flag);
    CHECK(g.generic());
    CHECK(g.tangency_points.empty());

    GenericityReport d = genericity_check(davydov(), 96);
    CHECK(d.generic());
    REQUIRE(d.tangency_points.size() == 1);
    CHECK(std::fabs(d.tangency_points[0].x) < 1e-9);
    CHECK(std::fabs(d.tangency_points[0].y) < 1e-9);

    // det = 1 - cos x never changes sign; the whole locus is tangency points.
    Chart torus = box(-M_PI, M_PI, -M_PI, M_PI, AxisIdent::Periodic, AxisIdent::Periodic);
    GenericityReport c = genericity_check(make_frame(torus, "1", "0", "0", "1 - cos(x)"), 60);
    CHECK_FALSE(c.isolated_tangencies);
    CHECK_FALSE(c.generic());
}

TEST_CASE("atlas validation accepts consistent structures") {
    Chart torus = box(-M_PI, M_PI, -M_PI, M_PI, AxisIdent::Periodic, AxisIdent::Periodic);
    Frame2 f = make_frame(torus, "1", "0", "0", "sin(x)");
    AtlasMetadata meta;
    ARS2 single({f}, {}, meta);
    CHECK(single.frames().size() == 1);
    CHECK(orientability_check(single));
}

TEST_CASE("atlas validation rejects frames that break identifications") {
    Chart torus = box(-M_PI, M_PI, -M_PI, M_PI, AxisIdent::Periodic, AxisIdent::Periodic);
    Frame2 bad = make_frame(torus, "1", "0", "0", "x");
    CHECK_THROWS_AS(ARS2({bad}, {}, AtlasMetadata{}), input_error);
}

TEST_CASE("atlas validation rejects out-of-domain overlap samples") {
    Frame2 a = grushin(1);
    Frame2 b = grushin(1);
    Overlap ov;
    ov.chart_i = 0;
    ov.chart_j = 1;
    ov.components.push_back({{Vec2{5, 0}}});
    CHECK_THROWS_AS(ARS2({a, b}, {ov}, AtlasMetadata{}), input_error);
}

TEST_CASE("atlas validation enforces orthogonal transitions unless distribution-only") {
    Chart ch = box(-1, 1, -1, 1);
    Frame2 a = make_frame(ch, "1", "0", "0", "1");
    Frame2 b = make_frame(ch, "2", "0", "0", "1"); // scale 2: not orthogonal
    Overlap ov;
    ov.chart_i = 0;
    ov.chart_j = 1;
    ov.components.push_back({{Vec2{0.5, 0.5}}});
    CHECK_THROWS_AS(ARS2({a, b}, {ov}, AtlasMetadata{}), input_error);

    AtlasMetadata dist;
    dist.distribution_only = true;
    ARS2 ok({a, b}, {ov}, dist);
    CHECK(orientability_check(ok));
}

TEST_CASE("two-chart torus distribution with sign-split overlap is non-orientable") {
    // Chart 1 carries Y = (0, sin x), chart 2 the constant (0, 1). The two
    // overlap components see opposite signs of sin x, which forces an odd
    // sign cycle between the charts.
    Chart torus = box(-M_PI, M_PI, -M_PI, M_PI, AxisIdent::Periodic, AxisIdent::Periodic);
    Frame2 f1 = make_frame(torus, "1", "0", "0", "sin(x)");
    Chart plain = box(-M_PI, M_PI, -M_PI, M_PI);
    Frame2 f2 = make_frame(plain, "1", "0", "0", "1");

    Overlap ov;
    ov.chart_i = 0;
    ov.chart_j = 1;
    ov.components.push_back({{Vec2{M_PI / 2, 0}, Vec2{M_PI / 2, 1}}});  // sin > 0
    ov.components.push_back({{Vec2{-M_PI / 2, 0}, Vec2{-M_PI / 2, 1}}}); // sin < 0

    AtlasMetadata meta;
    meta.distribution_only = true;
    ARS2 atlas({f1, f2}, {ov}, meta);
    CHECK_FALSE(orientability_check(atlas));

    // Relabeling the charts does not change the verdict.
    Overlap swapped;
    swapped.chart_i = 1;
    swapped.chart_j = 0;
    swapped.components = ov.components;
    ARS2 relabeled({f2, f1}, {swapped}, meta);
    CHECK_FALSE(orientability_check(relabeled));
}

TEST_CASE("Klein-bottle frame as a single identified chart is orientable") {
    Chart klein = box(-M_PI, M_PI, -M_PI, M_PI, AxisIdent::Flip, AxisIdent::Periodic);
    Frame2 f = make_frame(klein, "1", "0", "0", "sin(2*x)");
    ARS2 atlas({f}, {}, AtlasMetadata{});
    CHECK(orientability_check(atlas));
}

TEST_CASE("orientability requires rank-2 overlap samples") {
    Chart torus = box(-M_PI, M_PI, -M_PI, M_PI, AxisIdent::Periodic, AxisIdent::Periodic);
    Frame2 f1 = make_frame(torus, "1", "0", "0", "sin(x)");
    Chart plain = box(-M_PI, M_PI, -M_PI, M_PI);
    Frame2 f2 = make_frame(plain, "1", "0", "0", "1");
    Overlap ov;
    ov.chart_i = 0;
    ov.chart_j = 1;
    ov.components.push_back({{Vec2{0, 0}}}); // on Z of chart 1
    AtlasMetadata meta;
    meta.distribution_only = true;
    ARS2 atlas({f1, f2}, {ov}, meta);
    CHECK_THROWS_AS(orientability_check(atlas), input_error);
}
