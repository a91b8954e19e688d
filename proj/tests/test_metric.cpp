#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "arsgeo/frame.hpp"
#include "arsgeo/metric.hpp"

using namespace arsgeo;

namespace {

Chart box(double x0, double x1, double y0, double y1) {
    Chart c;
    c.x0 = x0; c.x1 = x1; c.y0 = y0; c.y1 = y1;
    return c;
}

Frame2 normal_form(const char* f, double half = 3) {
    return Frame2(box(-half, half, -half, half),
                  VectorField2::parse("1", "0"), VectorField2::parse("0", f));
}

} // namespace

TEST_CASE("metric data on the Grushin plane") {
    Frame2 g = normal_form("x");
    MetricData m = metric_at(g, {2, 0});
    CHECK(m.g.a11 == Catch::Approx(1.0).margin(1e-14));
    CHECK(m.g.a22 == Catch::Approx(0.25).margin(1e-14));
    CHECK(m.g.a12 == Catch::Approx(0.0).margin(1e-14));
    CHECK(m.dA_coeff == Catch::Approx(0.5).margin(1e-14));
    CHECK(m.dAs_coeff == Catch::Approx(0.5).margin(1e-14));

    MetricData mm = metric_at(g, {-2, 0});
    CHECK(mm.dA_coeff == Catch::Approx(0.5).margin(1e-14));
    CHECK(mm.dAs_coeff == Catch::Approx(-0.5).margin(1e-14));

    CHECK_THROWS_AS(metric_at(g, {0, 1}), singular_point_error);

    MetricData e = metric_at(normal_form("1"), {0.7, -0.3});
    CHECK(e.g.a11 == 1.0);
    CHECK(e.g.a22 == 1.0);
    CHECK(e.dA_coeff == 1.0);
    CHECK(e.dAs_coeff == 1.0);
}

TEST_CASE("metric tensor is symmetric positive definite off Z") {
    Frame2 f(box(-2, 2, -2, 2), VectorField2::parse("cos(y)", "0.2*sin(x*y)"),
             VectorField2::parse("0.1*x", "1 + 0.3*x^2"));
    std::mt19937 rng(4111);
    std::uniform_real_distribution<double> unif(-1.9, 1.9);
    int tested = 0;
    for (int k = 0; k < 300; ++k) {
        Vec2 q{unif(rng), unif(rng)};
        if (std::fabs(f.det(q)) < 1e-3) continue;
        MetricData m = metric_at(f, q);
        CHECK(m.g.a12 == Catch::Approx(m.g.a21).margin(1e-12));
        double tr = m.g.a11 + m.g.a22, det = m.g.det();
        double disc = std::sqrt(std::max(0.0, tr * tr - 4 * det));
        CHECK(0.5 * (tr - disc) > 0.0); // smaller eigenvalue
        CHECK(m.dA_coeff == std::fabs(m.dAs_coeff));
        ++tested;
    }
    CHECK(tested > 250);
}

TEST_CASE("Gaussian curvature of the Grushin plane is -2/x^2") {
    Frame2 g = normal_form("x");
    CHECK(gauss_curvature(g, {1, 3}) == Catch::Approx(-2.0).margin(1e-8));
    for (double x : {0.5, -0.7, 2.0, -2.5})
        CHECK(gauss_curvature(g, {x, 0.4}) == Catch::Approx(-2.0 / (x * x)).margin(1e-7));
}

TEST_CASE("Gaussian curvature at a tangency frame and the flat frame") {
    Frame2 d = normal_form("y - x^2", 2);
    double expected = -2.0 * (3 * 1 + 0) / ((1 - 0) * (1 - 0));
    CHECK(gauss_curvature(d, {1, 0}) == Catch::Approx(expected).margin(1e-7));
    CHECK(gauss_curvature(d, {1, 0}) == Catch::Approx(-6.0).margin(1e-7));

    CHECK(gauss_curvature(normal_form("1"), {0.3, -1.1}) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("curvature where the determinant never changes sign") {
    Frame2 c = normal_form("1 - cos(x)", 3);
    // -(2 + cos x) / (2 sin^2(x/2)) evaluated at x = pi.
    CHECK(gauss_curvature(c, {M_PI, 0.2}) == Catch::Approx(-0.5).margin(1e-8));
    CHECK(curvature_normal_form(parse_expr("1 - cos(x)"), {M_PI, 0.2}) ==
          Catch::Approx(-0.5).margin(1e-12));
}

TEST_CASE("normal-form curvature formula") {
    CHECK(curvature_normal_form(parse_expr("x"), {1, 5}) == Catch::Approx(-2.0).margin(1e-14));
    CHECK(curvature_normal_form(parse_expr("x"), {-3, 0}) ==
          Catch::Approx(-2.0 / 9.0).margin(1e-14));
    CHECK(curvature_normal_form(parse_expr("y - x^2"), {1, 0}) ==
          Catch::Approx(-6.0).margin(1e-12));
    CHECK_THROWS_AS(curvature_normal_form(parse_expr("x"), {0, 1}), singular_point_error);
}

TEST_CASE("frame-route curvature matches the normal-form formula") {
    const char* forms[] = {"x", "y - x^2", "sin(x)", "x*exp(0.2*x*cos(y))", "1 - cos(x)"};
    std::mt19937 rng(20905);
    std::uniform_real_distribution<double> unif(-2.5, 2.5);
    int tested = 0;
    for (const char* form : forms) {
        Frame2 f = normal_form(form);
        ScalarExpr fe = parse_expr(form);
        for (int k = 0; k < 200; ++k) {
            Vec2 q{unif(rng), unif(rng)};
            if (std::fabs(fe.eval(q.x, q.y)) <= 1e-3) continue;
            double k_frame = gauss_curvature(f, q);
            double k_nf = curvature_normal_form(fe, q);
            CHECK(std::fabs(k_frame - k_nf) < 1e-6 * (1.0 + std::fabs(k_nf)));
            ++tested;
        }
    }
    CHECK(tested > 800);
}

TEST_CASE("signed area form") {
    Frame2 g = normal_form("x");
    Vec2 q{2, 0};
    CHECK(signed_area_form(g, q, g.X().value(q), g.Y().value(q)) ==
          Catch::Approx(1.0).margin(1e-14));
    CHECK(signed_area_form(g, {2, 0}, {1, 0}, {0, 1}) == Catch::Approx(0.5).margin(1e-14));
    CHECK(signed_area_form(g, {-2, 0}, {1, 0}, {0, 1}) == Catch::Approx(-0.5).margin(1e-14));

    std::mt19937 rng(88);
    std::uniform_real_distribution<double> unif(-2, 2);
    for (int k = 0; k < 50; ++k) {
        Vec2 p{unif(rng), unif(rng)};
        if (std::fabs(g.det(p)) < 1e-6) continue;
        Vec2 v{unif(rng), unif(rng)}, w{unif(rng), unif(rng)};
        CHECK(signed_area_form(g, p, v, w) == -signed_area_form(g, p, w, v));
    }
}

TEST_CASE("region sign splits the chart along Z") {
    Frame2 g = normal_form("x");
    CHECK(region_sign(g, {1, 0}) == 1);
    CHECK(region_sign(g, {-1, 0}) == -1);
    CHECK_THROWS_AS(region_sign(g, {0, 0}), singular_point_error);

    Frame2 ts = normal_form("sin(x)");
    CHECK(region_sign(ts, {M_PI / 2, 1.0}) == 1);

    Frame2 e = normal_form("1");
    CHECK(region_sign(e, {-2.7, 2.9}) == 1);

    std::mt19937 rng(5150);
    std::uniform_real_distribution<double> unif(-2.8, 2.8);
    for (int k = 0; k < 100; ++k) {
        Vec2 q{unif(rng), unif(rng)};
        if (std::fabs(ts.det(q)) < 1e-6) continue;
        MetricData m = metric_at(ts, q);
        CHECK(region_sign(ts, q) * m.dA_coeff == Catch::Approx(m.dAs_coeff).margin(1e-15));
    }
}

TEST_CASE("Christoffel symbols of the Grushin metric") {
    Frame2 g = normal_form("x");
    Christoffel ch = christoffel(g, {2, 1});
    // g = dx^2 + dy^2/x^2: nonzero symbols are G^x_yy = 1/x^3, G^y_xy = -1/x.
    CHECK(ch.sym[0][1][1] == Catch::Approx(1.0 / 8.0).margin(1e-12));
    CHECK(ch.sym[1][0][1] == Catch::Approx(-0.5).margin(1e-12));
    CHECK(ch.sym[1][1][0] == Catch::Approx(-0.5).margin(1e-12));
    CHECK(std::fabs(ch.sym[0][0][0]) < 1e-12);
    CHECK(std::fabs(ch.sym[0][0][1]) < 1e-12);
    CHECK(std::fabs(ch.sym[1][0][0]) < 1e-12);
    CHECK(std::fabs(ch.sym[1][1][1]) < 1e-12);
}

TEST_CASE("Christoffel symbols match finite differences of the metric") {
    Frame2 f = normal_form("x*exp(0.2*x*cos(y))", 3);
    std::mt19937 rng(60601);
    std::uniform_real_distribution<double> unif(-2, 2);
    const double h = 1e-6;
    auto metric_mat = [&](Vec2 q) {
        Mat2 F = f.frame_matrix(q);
        return (F * F.transpose()).inverse();
    };
    int tested = 0;
    for (int k = 0; k < 100; ++k) {
        Vec2 q{unif(rng), unif(rng)};
        if (std::fabs(f.det(q)) < 0.05) continue;
        Mat2 gq = metric_mat(q);
        Mat2 Ginv = gq.inverse();
        Mat2 dg[2] = {
            (metric_mat({q.x + h, q.y}) - metric_mat({q.x - h, q.y})) * (0.5 / h),
            (metric_mat({q.x, q.y + h}) - metric_mat({q.x, q.y - h})) * (0.5 / h)};
        auto gm = [&](const Mat2& m, int r, int c) {
            return r == 0 ? (c == 0 ? m.a11 : m.a12) : (c == 0 ? m.a21 : m.a22);
        };
        Christoffel exact = christoffel(f, q);
        for (int kk = 0; kk < 2; ++kk)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double s = 0;
                    for (int l = 0; l < 2; ++l)
                        s += gm(Ginv, kk, l) *
                             (gm(dg[i], j, l) + gm(dg[j], i, l) - gm(dg[l], i, j));
                    double fd = 0.5 * s;
                    CHECK(std::fabs(exact.sym[kk][i][j] - fd) <
                          1e-6 * (1.0 + std::fabs(fd)));
                }
        ++tested;
    }
    CHECK(tested > 60);
}

TEST_CASE("geodesic curvature of a Euclidean circle") {
    Frame2 e = normal_form("1");
    const double R = 1.3;
    SampledCurve c;
    for (int k = 0; k <= 600; ++k) {
        double s = 2 * M_PI * R * k / 600.0;
        c.s.push_back(s);
        c.p.push_back({R * std::cos(s / R), R * std::sin(s / R)});
    }
    for (double s : {0.4, 2.0, 5.5})
        CHECK(geodesic_curvature(e, c, s, 1) == Catch::Approx(1.0 / R).margin(1e-7));

    // Flipping the orientation flips the sign.
    CHECK(geodesic_curvature(e, c, 1.0, -1) == Catch::Approx(-1.0 / R).margin(1e-7));

    // Closing the loop: integral of k_g equals 2 pi for a flat disk.
    double total = 0;
    size_t n = c.s.size();
    for (size_t k = 0; k + 1 < n; ++k) {
        double s0 = c.s[k], s1 = c.s[k + 1];
        total += 0.5 * (geodesic_curvature(e, c, s0, 1) + geodesic_curvature(e, c, s1, 1)) *
                 (s1 - s0);
    }
    CHECK(total == Catch::Approx(2 * M_PI).margin(1e-6));
}

TEST_CASE("geodesic curvature of vertical lines beside the Grushin axis") {
    Frame2 g = normal_form("x");
    for (double eps : {0.5, 0.1}) {
        SampledCurve c;
        for (int k = 0; k <= 200; ++k) {
            double s = -1.0 + 2.0 * k / 200.0;
            c.s.push_back(s);
            c.p.push_back({eps, -eps * s}); // downward, unit speed for g
        }
        for (double s : {-0.6, 0.0, 0.7})
            CHECK(geodesic_curvature(g, c, s, 1) == Catch::Approx(1.0 / eps).margin(1e-9));
    }
}

TEST_CASE("geodesic curvature picks up the conformal correction") {
    // Frame (1,0), (0, x e^{xy}); along x = eps the arclength line is
    // y(s) = -(1/eps) log(eps^2 s + e^{-eps y0}) and k_g = 1/eps + y(s).
    const double eps = 0.3, y0 = 0.7;
    Frame2 f = normal_form("x*exp(x*y)", 4);
    const double b = std::exp(-eps * y0);
    auto height = [&](double s) { return -std::log(eps * eps * s + b) / eps; };
    SampledCurve c;
    for (int k = 0; k <= 400; ++k) {
        double s = 2.0 * k / 400.0;
        c.s.push_back(s);
        c.p.push_back({eps, height(s)});
    }
    for (double s : {0.1, 0.9, 1.8})
        CHECK(geodesic_curvature(f, c, s, 1) ==
              Catch::Approx(1.0 / eps + height(s)).margin(1e-6));
}

TEST_CASE("geodesic curvature rejects bad input") {
    Frame2 e = normal_form("1");
    SampledCurve c;
    for (int k = 0; k <= 10; ++k) {
        double s = k / 10.0;
        c.s.push_back(s);
        c.p.push_back({2 * s, 0}); // speed 2, not arclength
    }
    CHECK_THROWS_AS(geodesic_curvature(e, c, 0.5, 1), input_error);

    SampledCurve tiny;
    tiny.s = {0, 1};
    tiny.p = {{0, 0}, {1, 0}};
    CHECK_THROWS_AS(geodesic_curvature(e, tiny, 0.5, 1), input_error);
}
