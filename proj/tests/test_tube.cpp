#include <catch2/catch_amalgamated.hpp>

#include <arsgeo/tube.hpp>

using namespace arsgeo;

namespace {

Chart box(double half) {
    Chart ch;
    ch.name = "box";
    ch.x0 = -half;
    ch.x1 = half;
    ch.y0 = -half;
    ch.y1 = half;
    return ch;
}

Chart torus() {
    Chart ch = box(M_PI);
    ch.name = "torus";
    ch.ident_x = AxisIdent::Periodic;
    ch.ident_y = AxisIdent::Periodic;
    return ch;
}

Frame2 grushin(double half = 8) {
    return Frame2(box(half), VectorField2::parse("1", "0"), VectorField2::parse("0", "x"));
}

} // namespace

TEST_CASE("grushin tube is the identity map (t, y) on each side") {
    Frame2 f = grushin();
    auto locus = trace_singular_locus(f, 32);
    REQUIRE(locus.size() == 1);
    TubeMap tube = build_tube(f, locus, 0.5, 64, 8);
    REQUIRE(tube.components.size() == 1);

    const TubeComponent& c = tube.components[0];
    REQUIRE_FALSE(c.closed);
    CHECK(c.length == Catch::Approx(16.0).margin(1e-6));
    // One side launches into x > 0, the other into x < 0.
    REQUIRE(c.region[0] * c.region[1] == -1);
    int plus = c.region[0] == 1 ? 0 : 1;

    for (size_t k = 0; k < c.rays.size(); k += 7) {
        const TubeRay& r = c.rays[k];
        CHECK(std::fabs(r.q0.x) <= 1e-12);
        for (double t : {0.1, 0.25, 0.5}) {
            Vec2 p = r.point(plus, t);
            CHECK(p.x == Catch::Approx(t).margin(1e-9));
            CHECK(p.y == Catch::Approx(r.q0.y).margin(1e-9));
            Vec2 m = r.point(1 - plus, t);
            CHECK(m.x == Catch::Approx(-t).margin(1e-9));
        }
    }
}

TEST_CASE("grushin distance to the singular locus is |x|") {
    Frame2 f = grushin();
    auto locus = trace_singular_locus(f, 32);
    TubeMap tube = build_tube(f, locus, 0.5, 64, 8);

    auto d = distance_to_Z(f, tube, {0.3, 5.0});
    REQUIRE(d.has_value());
    CHECK(*d == Catch::Approx(0.3).margin(1e-8));

    d = distance_to_Z(f, tube, {-0.45, -7.2});
    REQUIRE(d.has_value());
    CHECK(*d == Catch::Approx(0.45).margin(1e-8));

    TubeMap wide = build_tube(f, locus, 1.0, 64, 8);
    CHECK_FALSE(distance_to_Z(f, wide, {2.0, 0.0}).has_value());
}

TEST_CASE("torus_sin tube covers both singular circles") {
    Frame2 f(torus(), VectorField2::parse("1", "0"), VectorField2::parse("0", "sin(x)"));
    auto locus = trace_singular_locus(f, 48);
    REQUIRE(locus.size() == 2);
    TubeMap tube = build_tube(f, locus, 0.5, 96, 8);
    REQUIRE(tube.components.size() == 2);
    for (const TubeComponent& c : tube.components) {
        CHECK(c.closed);
        CHECK(c.length == Catch::Approx(2 * M_PI).margin(1e-6));
        CHECK(c.region[0] * c.region[1] == -1);
    }

    auto d = distance_to_Z(f, tube, {-0.05, 1.0});
    REQUIRE(d.has_value());
    CHECK(*d == Catch::Approx(0.05).margin(1e-8));

    // Near the seam circle, reachable only through the periodic wrap.
    d = distance_to_Z(f, tube, {3.0, 0.4});
    REQUIRE(d.has_value());
    CHECK(*d == Catch::Approx(M_PI - 3.0).margin(1e-8));

    CHECK_FALSE(distance_to_Z(f, tube, {1.5, 0.0}).has_value());
}

TEST_CASE("tube consistency: distance of grid points recovers t") {
    Frame2 fg = grushin();
    Frame2 ft(torus(), VectorField2::parse("1", "0"), VectorField2::parse("0", "sin(x)"));
    for (const Frame2* fp : {&fg, &ft}) {
        const Frame2& f = *fp;
        auto locus = trace_singular_locus(f, f.chart().periodic_x() ? 48 : 32);
        TubeMap tube = build_tube(f, locus, 0.4, 64, 8);
        int checked = 0;
        const size_t stride = std::max<size_t>(1, tube.samples.size() / 140);
        for (size_t i = 0; i < tube.samples.size() && checked < 150; i += stride) {
            const auto& sr = tube.samples[i];
            auto d = distance_to_Z(f, tube, sr.p);
            REQUIRE(d.has_value());
            CHECK(*d == Catch::Approx(sr.t).margin(1e-6));
            ++checked;
        }
        REQUIRE(checked >= 100);
    }
}

TEST_CASE("non-generic locus still builds a tube (touching determinant)") {
    Frame2 f(torus(), VectorField2::parse("1", "0"), VectorField2::parse("0", "1-cos(x)"));
    auto locus = trace_singular_locus(f, 48);
    REQUIRE(locus.size() == 1);
    TubeMap tube = build_tube(f, locus, 0.5, 64, 8);
    const TubeComponent& c = tube.components[0];
    // Both sides land in the det > 0 region.
    CHECK(c.region[0] == 1);
    CHECK(c.region[1] == 1);
    for (size_t k = 0; k < c.rays.size(); k += 11) {
        const TubeRay& r = c.rays[k];
        CHECK(std::fabs(r.point(0, 0.5).x) == Catch::Approx(0.5).margin(1e-9));
        CHECK(std::fabs(r.point(1, 0.5).x) == Catch::Approx(0.5).margin(1e-9));
    }
}

TEST_CASE("tangency aborts the tube") {
    Frame2 f(box(2), VectorField2::parse("1", "0"), VectorField2::parse("0", "y-x*x"));
    auto locus = trace_singular_locus(f, 48);
    REQUIRE_FALSE(locus.empty());
    CHECK_THROWS_AS(build_tube(f, locus, 0.5, 64, 8), tube_error);
}

TEST_CASE("choose_tube halves eps0 until the build succeeds") {
    Frame2 f = grushin();
    auto locus = trace_singular_locus(f, 32);
    TubeMap tube = choose_tube(f, locus, 0.5, 64, 8);
    CHECK(tube.eps0 == Catch::Approx(0.5));
}
