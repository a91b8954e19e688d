#pragma once

// Riemannian data induced on the complement of Z: metric tensor, Gaussian
// curvature (frame route and normal-form route), area densities, region sign,
// Christoffel symbols, and geodesic curvature of sampled curves.

#include <array>
#include <cmath>
#include <vector>

#include "frame.hpp"
#include "geometry.hpp"

namespace arsgeo {

constexpr double kSingularTol = 1e-12;

struct MetricData {
    Mat2 g;
    double K = 0;
    double dA_coeff = 0;  // density w.r.t. dx dy, always > 0
    double dAs_coeff = 0; // signed: carries the sign of det F
};

// Coefficients (alpha, beta) with [X,Y] = alpha X + beta Y at q.
inline Vec2 structure_coefficients(const Frame2& f, const Vec2& q) {
    Mat2 F = f.frame_matrix(q);
    if (std::fabs(F.det()) < kSingularTol)
        throw singular_point_error("structure coefficients undefined on Z");
    return solve2(F, f.bracket().value(q));
}

inline double gauss_curvature(const Frame2& f, const Vec2& q) {
    Vec2 ab = structure_coefficients(f, q);

    // Lie derivatives X(beta), Y(alpha) as 4th-order directional central
    // differences; only the direction at q matters for a scalar derivation.
    const double h = 1e-5;
    auto dir_deriv = [&](const Vec2& dir, bool take_beta) {
        auto val = [&](double s) {
            Vec2 p = q + dir * s;
            Vec2 c = structure_coefficients(f, p);
            return take_beta ? c.y : c.x;
        };
        return (-val(2 * h) + 8 * val(h) - 8 * val(-h) + val(-2 * h)) / (12 * h);
    };
    double Xbeta = dir_deriv(f.X().value(q), true);
    double Yalpha = dir_deriv(f.Y().value(q), false);
    return -ab.x * ab.x - ab.y * ab.y + Xbeta - Yalpha;
}

inline MetricData metric_at(const Frame2& f, const Vec2& q) {
    Mat2 F = f.frame_matrix(q);
    double d = F.det();
    if (std::fabs(d) < kSingularTol)
        throw singular_point_error("metric undefined on Z");
    MetricData m;
    Mat2 G = F * F.transpose();
    m.g = G.inverse();
    if ((m.g * G - Mat2::identity()).max_abs() > 1e-10)
        throw numeric_error("metric inversion lost precision");
    m.K = gauss_curvature(f, q);
    m.dA_coeff = 1.0 / std::fabs(d);
    m.dAs_coeff = 1.0 / d;
    return m;
}

// Curvature for a frame X=(1,0), Y=(0,f) straight from the scalar f.
inline double curvature_normal_form(const ScalarExpr& fexpr, const Vec2& q) {
    double fv = fexpr.eval(q.x, q.y);
    if (std::fabs(fv) < 1e-15)
        throw singular_point_error("normal-form curvature undefined where f = 0");
    ScalarExpr fx = fexpr.diff(Var::X);
    double fxv = fx.eval(q.x, q.y);
    double fxxv = fx.diff(Var::X).eval(q.x, q.y);
    return (-2.0 * fxv * fxv + fv * fxxv) / (fv * fv);
}

// dA_s(v, w): determinant of the coefficients of v, w in the basis (X, Y).
inline double signed_area_form(const Frame2& f, const Vec2& q, const Vec2& v, const Vec2& w) {
    double d = f.det(q);
    if (std::fabs(d) < kSingularTol)
        throw singular_point_error("signed area form undefined on Z");
    return cross(v, w) / d;
}

inline int region_sign(const Frame2& f, const Vec2& q) {
    double d = f.det(q);
    if (std::fabs(d) < kSingularTol)
        throw singular_point_error("region sign undefined on Z");
    return d > 0 ? 1 : -1;
}

struct Christoffel {
    // sym[k][i][j] = Gamma^k_{ij}, symmetric in (i, j)
    std::array<std::array<std::array<double, 2>, 2>, 2> sym{};
};

// Exact Christoffel symbols from symbolic derivatives of F: with G = F F^T,
// g = G^{-1}, one has d_i g = -g (d_i G) g and d_i G = (d_i F) F^T + F (d_i F)^T.
inline Christoffel christoffel(const Frame2& f, const Vec2& q) {
    Mat2 F = f.frame_matrix(q);
    if (std::fabs(F.det()) < kSingularTol)
        throw singular_point_error("Christoffel symbols undefined on Z");
    Mat2 JX = f.X().jacobian(q), JY = f.Y().jacobian(q);
    // d_x F and d_y F; columns stay (X, Y).
    Mat2 dF[2] = {Mat2{JX.a11, JY.a11, JX.a21, JY.a21},
                  Mat2{JX.a12, JY.a12, JX.a22, JY.a22}};
    Mat2 G = F * F.transpose();
    Mat2 g = G.inverse();
    Mat2 dg[2];
    for (int i = 0; i < 2; ++i) {
        Mat2 dG = dF[i] * F.transpose() + F * dF[i].transpose();
        dg[i] = (g * dG * g) * -1.0;
    }
    auto gm = [&](const Mat2& m, int r, int c) {
        return r == 0 ? (c == 0 ? m.a11 : m.a12) : (c == 0 ? m.a21 : m.a22);
    };
    Christoffel ch;
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double s = 0;
                for (int l = 0; l < 2; ++l)
                    s += gm(G, k, l) *
                         (gm(dg[i], j, l) + gm(dg[j], i, l) - gm(dg[l], i, j));
                ch.sym[k][i][j] = 0.5 * s;
            }
    return ch;
}

// Geodesic curvature from exact derivatives of a curve at one point. vel must
// be g-unit; orientation flips the normal. The normal is the g-unit vector
// with det[vel, N] > 0 in chart coordinates before the orientation factor.
inline double geodesic_curvature_raw(const Frame2& f, const Vec2& p, const Vec2& vel,
                                     const Vec2& acc, int orientation) {
    Mat2 F = f.frame_matrix(p);
    double d = F.det();
    if (std::fabs(d) < kSingularTol)
        throw singular_point_error("geodesic curvature undefined on Z");
    Vec2 c = solve2(F, vel); // frame coefficients of the tangent
    double speed2 = c.x * c.x + c.y * c.y;
    if (std::fabs(speed2 - 1.0) > 1e-8)
        throw input_error("curve is not parameterized by arclength");
    Vec2 cperp{-c.y, c.x};
    if (d < 0) cperp = cperp * -1.0;
    Vec2 N = (F * cperp) * double(orientation);

    Christoffel ch = christoffel(f, p);
    Vec2 cov{acc.x, acc.y};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double vi = i == 0 ? vel.x : vel.y;
            double vj = j == 0 ? vel.x : vel.y;
            cov.x += ch.sym[0][i][j] * vi * vj;
            cov.y += ch.sym[1][i][j] * vi * vj;
        }
    Mat2 g = (F * F.transpose()).inverse();
    Vec2 gN = g * N;
    return cov.x * gN.x + cov.y * gN.y;
}

struct SampledCurve {
    std::vector<double> s; // strictly increasing arclength parameters
    std::vector<Vec2> p;
};

// Derivatives at parameter s from a 5-point Lagrange polynomial through the
// nearest samples; spacing may be non-uniform.
inline double geodesic_curvature(const Frame2& f, const SampledCurve& curve, double s,
                                 int orientation = 1) {
    const size_t n = curve.s.size();
    if (n < 5 || curve.p.size() != n)
        throw input_error("sampled curve needs at least 5 samples");
    size_t idx = 0;
    while (idx + 1 < n && curve.s[idx + 1] < s) ++idx;
    size_t lo = idx >= 2 ? idx - 2 : 0;
    if (lo + 5 > n) lo = n - 5;

    double t[5];
    Vec2 pts[5];
    for (int k = 0; k < 5; ++k) { t[k] = curve.s[lo + k]; pts[k] = curve.p[lo + k]; }

    Vec2 pos{0, 0}, vel{0, 0}, acc{0, 0};
    for (int k = 0; k < 5; ++k) {
        // Lagrange basis L_k and its first two derivatives at s.
        double L = 1, dL = 0, ddL = 0;
        for (int a = 0; a < 5; ++a) {
            if (a == k) continue;
            double da = 1.0 / (t[k] - t[a]);
            double va = (s - t[a]) * da;
            ddL = ddL * va + 2 * dL * da;
            dL = dL * va + L * da;
            L *= va;
        }
        pos = pos + pts[k] * L;
        vel = vel + pts[k] * dL;
        acc = acc + pts[k] * ddL;
    }
    return geodesic_curvature_raw(f, pos, vel, acc, orientation);
}

} // namespace arsgeo
