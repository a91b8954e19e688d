#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <arsgeo/classify.hpp>
#include <arsgeo/scenarios.hpp>
#include <arsgeo/singular_locus.hpp>

using namespace arsgeo;

TEST_CASE("registry builds every scenario under its own name") {
    for (const std::string& name : scenario_names()) {
        Scenario s = get_scenario(name);
        CHECK(s.name == name);
        CHECK_FALSE(s.structure.frames().empty());
    }
    CHECK_THROWS_AS(get_scenario("grushin2"), input_error);
}

TEST_CASE("sphere chart frame pushes forward to the ambient rotations") {
    Scenario s = get_scenario("sphere_quantum");
    const Frame2& f = s.frame();
    const Chart& ch = f.chart();
    REQUIRE(ch.embedding.has_value());
    const auto& e = *ch.embedding;

    std::array<ScalarExpr, 3> eu{e[0].diff(Var::X), e[1].diff(Var::X), e[2].diff(Var::X)};
    std::array<ScalarExpr, 3> ev{e[0].diff(Var::Y), e[1].diff(Var::Y), e[2].diff(Var::Y)};

    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> du(ch.x0, ch.x1), dv(ch.y0, ch.y1);
    for (int i = 0; i < 200; ++i) {
        Vec2 q{du(rng), dv(rng)};
        double p1 = e[0].eval(q.x, q.y), p2 = e[1].eval(q.x, q.y), p3 = e[2].eval(q.x, q.y);
        std::array<double, 3> xa{p2, -p1, 0.0}, ya{0.0, p3, -p2};
        Vec2 xc = f.X().value(q), yc = f.Y().value(q);
        for (int c = 0; c < 3; ++c) {
            double ju = eu[c].eval(q.x, q.y), jv = ev[c].eval(q.x, q.y);
            CHECK(std::fabs(ju * xc.x + jv * xc.y - xa[c]) <= 1e-10);
            CHECK(std::fabs(ju * yc.x + jv * yc.y - ya[c]) <= 1e-10);
        }
    }
}

TEST_CASE("sphere singular locus is the equator and is Grushin everywhere") {
    Scenario s = get_scenario("sphere_quantum");
    const Frame2& f = s.frame();

    auto locus = trace_singular_locus(f, 32);
    REQUIRE(locus.size() == 1);
    CHECK(locus[0].closed);
    for (const Vec2& p : locus[0].pts) CHECK(p.x == Catch::Approx(M_PI / 2).margin(1e-9));

    for (int k = 0; k < 16; ++k) {
        Vec2 q{M_PI / 2, -M_PI + 2 * M_PI * k / 16};
        CHECK(classify_point(f, q).kind == PointKind::Grushin);
    }
    CHECK(s.cap_delta == 1e-3);
}

TEST_CASE("orientability matches stored metadata") {
    for (const std::string& name : scenario_names()) {
        Scenario s = get_scenario(name);
        REQUIRE(s.structure.metadata().orientable.has_value());
        INFO(name);
        CHECK(orientability_check(s.structure) == *s.structure.metadata().orientable);
        CHECK(*s.structure.metadata().trivializable ==
              (s.structure.frames().size() == 1));
    }
}

TEST_CASE("genericity reports match stored tangency flags") {
    for (const std::string& name : scenario_names()) {
        Scenario s = get_scenario(name);
        if (s.structure.metadata().distribution_only) continue;
        INFO(name);
        GenericityReport rep = genericity_check(s.frame(), 32);
        bool found_tangency = !rep.tangency_points.empty() || !rep.isolated_tangencies;
        CHECK(found_tangency == s.structure.metadata().has_tangency);
        if (name == "torus_cos") {
            CHECK_FALSE(rep.isolated_tangencies);
            CHECK_FALSE(rep.generic());
        } else {
            CHECK(rep.generic());
        }
        if (name == "davydov") {
            REQUIRE(rep.tangency_points.size() == 1);
            CHECK(rep.tangency_points[0].norm() <= 1e-6);
        }
    }
}

TEST_CASE("expected curvature outcomes are stored with the scenarios") {
    auto expected = [](const std::string& n) {
        return get_scenario(n).structure.metadata().expected_gauss_bonnet;
    };
    for (const char* n : {"torus_sin", "torus_sin_warped", "sphere_quantum", "flat_torus"}) {
        REQUIRE(expected(n).has_value());
        CHECK(*expected(n) == 0.0);
    }
    CHECK_FALSE(expected("torus_cos").has_value());

    Scenario cos_case = get_scenario("torus_cos");
    REQUIRE(cos_case.divergence_exponent.has_value());
    CHECK(*cos_case.divergence_exponent == -3.0);
    CHECK_FALSE(get_scenario("torus_sin").divergence_exponent.has_value());
}
