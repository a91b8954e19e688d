#pragma once

// PMP Hamiltonian flow for normal geodesics: H = ((lam.X)^2 + (lam.Y)^2)/2,
// integrated with the adaptive RK pair. The variational flow co-integrates
// the 4x4 Jacobian of the flow map using exact second frame derivatives.

#include <array>
#include <cmath>
#include <vector>

#include "classify.hpp"
#include "frame.hpp"
#include "ode.hpp"

namespace arsgeo {

struct CotangentState {
    Vec2 q;
    Vec2 lam;
};

inline double hamiltonian(const Frame2& f, const CotangentState& s) {
    double a1 = s.lam.dot(f.X().value(s.q));
    double a2 = s.lam.dot(f.Y().value(s.q));
    return 0.5 * (a1 * a1 + a2 * a2);
}

// State layout [x, y, lx, ly].
inline void hamiltonian_rhs(const Frame2& f, const OdeVec<4>& s, OdeVec<4>& out) {
    Vec2 q{s[0], s[1]}, lam{s[2], s[3]};
    Vec2 Xv = f.X().value(q), Yv = f.Y().value(q);
    Mat2 JX = f.X().jacobian(q), JY = f.Y().jacobian(q);
    double a1 = lam.dot(Xv), a2 = lam.dot(Yv);
    Vec2 qdot = Xv * a1 + Yv * a2;
    double b1x = lam.dot(JX.col(0)), b1y = lam.dot(JX.col(1));
    double b2x = lam.dot(JY.col(0)), b2y = lam.dot(JY.col(1));
    out[0] = qdot.x;
    out[1] = qdot.y;
    out[2] = -(a1 * b1x + a2 * b2x);
    out[3] = -(a1 * b1y + a2 * b2y);
}

// Jacobian A = d(sdot)/ds of the Hamiltonian vector field, row-major 4x4.
inline void hamiltonian_flow_jacobian(const Frame2& f, const OdeVec<4>& s, double A[4][4]) {
    Vec2 q{s[0], s[1]}, lam{s[2], s[3]};
    Vec2 Xv = f.X().value(q), Yv = f.Y().value(q);
    Mat2 JX = f.X().jacobian(q), JY = f.Y().jacobian(q);
    Mat2 HXu = f.X().hessian_u(q), HXv = f.X().hessian_v(q);
    Mat2 HYu = f.Y().hessian_u(q), HYv = f.Y().hessian_v(q);
    double a1 = lam.dot(Xv), a2 = lam.dot(Yv);
    double b1[2] = {lam.dot(JX.col(0)), lam.dot(JX.col(1))};
    double b2[2] = {lam.dot(JY.col(0)), lam.dot(JY.col(1))};
    auto mat = [](const Mat2& m, int r, int c) {
        return r == 0 ? (c == 0 ? m.a11 : m.a12) : (c == 0 ? m.a21 : m.a22);
    };
    // <lam, d_i d_j X> and same for Y.
    auto c1 = [&](int i, int j) { return lam.x * mat(HXu, i, j) + lam.y * mat(HXv, i, j); };
    auto c2 = [&](int i, int j) { return lam.x * mat(HYu, i, j) + lam.y * mat(HYv, i, j); };

    for (int j = 0; j < 2; ++j) {
        Vec2 djX = JX.col(j), djY = JY.col(j);
        Vec2 col = Xv * b1[j] + djX * a1 + Yv * b2[j] + djY * a2;
        A[0][j] = col.x;
        A[1][j] = col.y;
    }
    double Xc[2] = {Xv.x, Xv.y}, Yc[2] = {Yv.x, Yv.y};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            A[i][2 + j] = Xc[i] * Xc[j] + Yc[i] * Yc[j];
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            A[2 + i][j] = -(b1[j] * b1[i] + a1 * c1(i, j) + b2[j] * b2[i] + a2 * c2(i, j));
            // (d_i X)_j is row j, column i of the Jacobian.
            A[2 + i][2 + j] = -(Xc[j] * b1[i] + a1 * mat(JX, j, i) + Yc[j] * b2[i] +
                                a2 * mat(JY, j, i));
        }
    }
}

// qdot of the Hamiltonian flow: <lam,X> X + <lam,Y> Y.
inline Vec2 hamiltonian_velocity(const Frame2& f, const CotangentState& s) {
    Vec2 Xv = f.X().value(s.q), Yv = f.Y().value(s.q);
    return Xv * s.lam.dot(Xv) + Yv * s.lam.dot(Yv);
}

struct InitialCovector {
    CotangentState state;
    Vec2 dlam; // derivative of lam w.r.t. the family parameter (theta or a)
};

// Covector on the Z-point line: lam = side * e / sqrt(|X|^2 + |Y|^2) + a * n,
// e the unit direction of the rank-1 distribution, n its +pi/2 rotation.
inline InitialCovector initial_covector_z(const Frame2& f, const Vec2& q, int side, double a) {
    PointClass pc = classify_point(f, q);
    if (pc.kind == PointKind::Ordinary)
        throw input_error("point is not on the singular locus");
    if (pc.kind != PointKind::Grushin)
        throw input_error("covector lines are undefined at tangency or non-generic points");
    Vec2 Xv = f.X().value(q), Yv = f.Y().value(q);
    Vec2 v = Xv.norm() >= Yv.norm() ? Xv : Yv;
    Vec2 e = v / v.norm();
    double scale = std::sqrt(Xv.dot(Xv) + Yv.dot(Yv));
    InitialCovector ic;
    ic.state.q = q;
    ic.state.lam = e * (double(side >= 0 ? 1 : -1) / scale) + e.perp() * a;
    ic.dlam = e.perp();
    return ic;
}

// Unit-energy covector: <lam, X> = cos theta, <lam, Y> = sin theta away from
// Z; on Z (Grushin points) theta is the transverse line coordinate on the
// side=+1 line.
inline InitialCovector initial_covector(const Frame2& f, const Vec2& q, double theta) {
    Vec2 Xv = f.X().value(q), Yv = f.Y().value(q);
    if (rank_2xn({Xv, Yv}) == 2) {
        Mat2 Ft = Mat2::from_columns(Xv, Yv).transpose();
        InitialCovector ic;
        ic.state.q = q;
        ic.state.lam = solve2(Ft, {std::cos(theta), std::sin(theta)});
        ic.dlam = solve2(Ft, {-std::sin(theta), std::cos(theta)});
        return ic;
    }
    return initial_covector_z(f, q, +1, theta);
}

struct Geodesic {
    OdeSolution<4> sol;
    double H0 = 0;

    CotangentState state_at(double t) const {
        OdeVec<4> s = sol.eval(t);
        return {{s[0], s[1]}, {s[2], s[3]}};
    }
    Vec2 point_at(double t) const {
        OdeVec<4> s = sol.eval(t);
        return {s[0], s[1]};
    }
    double tmax() const { return sol.t1(); }
};

namespace flow_detail {

template <std::size_t N>
void throw_chart_exit(const Chart& ch, const OdeSolution<N>& sol) {
    const auto& stp = sol.steps.back();
    double lo = stp.t0, hi = stp.t0 + stp.h;
    for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        OdeVec<N> s = stp.eval(mid);
        if (ch.contains({s[0], s[1]})) lo = mid;
        else hi = mid;
    }
    throw chart_exit_error("trajectory left the chart", 0.5 * (lo + hi));
}

} // namespace flow_detail

inline Geodesic integrate_geodesic(const Frame2& f, const CotangentState& s0, double tmax,
                                   double tol = 1e-10) {
    const Chart& ch = f.chart();
    if (!ch.contains(s0.q)) throw input_error("geodesic starts outside the chart");
    OdeVec<4> y0{s0.q.x, s0.q.y, s0.lam.x, s0.lam.y};
    bool exited = false;
    auto sol = integrate_dopri5<4>(
        [&f](double, const OdeVec<4>& y, OdeVec<4>& out) { hamiltonian_rhs(f, y, out); },
        y0, 0.0, tmax, tol,
        [&ch, &exited](double, const OdeVec<4>& y) {
            exited = !ch.contains({y[0], y[1]});
            return !exited;
        });
    if (exited) flow_detail::throw_chart_exit(ch, sol);
    Geodesic g;
    g.sol = std::move(sol);
    g.H0 = hamiltonian(f, s0);
    return g;
}

inline Vec2 exp_map(const Frame2& f, const Vec2& q, double theta, double t,
                    double tol = 1e-10) {
    if (t < 0) throw input_error("exponential map needs t >= 0");
    if (t == 0) return q;
    InitialCovector ic = initial_covector(f, q, theta);
    return integrate_geodesic(f, ic.state, t, tol).point_at(t);
}

// Geodesic plus the 4x4 flow Jacobian M(t), stored as state rows 4..19
// (row-major), M(0) = identity.
struct VariationalFlow {
    OdeSolution<20> sol;
    double H0 = 0;

    CotangentState state_at(double t) const {
        OdeVec<20> s = sol.eval(t);
        return {{s[0], s[1]}, {s[2], s[3]}};
    }
    std::array<double, 16> M_at(double t) const {
        OdeVec<20> s = sol.eval(t);
        std::array<double, 16> m;
        for (int i = 0; i < 16; ++i) m[i] = s[4 + i];
        return m;
    }
    // dE/dparam: position rows of M applied to (0, 0, dlam).
    Vec2 dq_dparam(double t, const Vec2& dlam) const {
        OdeVec<20> s = sol.eval(t);
        return {s[4 + 2] * dlam.x + s[4 + 3] * dlam.y,
                s[4 + 6] * dlam.x + s[4 + 7] * dlam.y};
    }
    double tmax() const { return sol.t1(); }
};

inline VariationalFlow flow_with_variations(const Frame2& f, const CotangentState& s0,
                                            double tmax, double tol = 1e-10) {
    const Chart& ch = f.chart();
    if (!ch.contains(s0.q)) throw input_error("geodesic starts outside the chart");
    OdeVec<20> y0{};
    y0[0] = s0.q.x;
    y0[1] = s0.q.y;
    y0[2] = s0.lam.x;
    y0[3] = s0.lam.y;
    for (int i = 0; i < 4; ++i) y0[4 + 5 * i] = 1.0;

    auto rhs = [&f](double, const OdeVec<20>& y, OdeVec<20>& out) {
        OdeVec<4> s{y[0], y[1], y[2], y[3]};
        OdeVec<4> sd;
        hamiltonian_rhs(f, s, sd);
        double A[4][4];
        hamiltonian_flow_jacobian(f, s, A);
        for (int i = 0; i < 4; ++i) out[i] = sd[i];
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                double acc = 0;
                for (int k = 0; k < 4; ++k) acc += A[r][k] * y[4 + 4 * k + c];
                out[4 + 4 * r + c] = acc;
            }
    };
    bool exited = false;
    auto sol = integrate_dopri5<20>(rhs, y0, 0.0, tmax, tol,
                                    [&ch, &exited](double, const OdeVec<20>& y) {
                                        exited = !ch.contains({y[0], y[1]});
                                        return !exited;
                                    });
    if (exited) flow_detail::throw_chart_exit(ch, sol);
    VariationalFlow vf;
    vf.sol = std::move(sol);
    vf.H0 = hamiltonian(f, {{y0[0], y0[1]}, {y0[2], y0[3]}});
    return vf;
}

// Minimum-time front sample at time t. Off Z: n points over the theta
// ellipse, ordered by theta. On Z: both covector lines, |a| <= a_max; the +
// line is traversed with a descending, the - line ascending, so the samples
// chain into one boundary sweep.
inline std::vector<Vec2> front(const Frame2& f, const Vec2& q, double t, int n,
                               double a_max = 50.0, double tol = 1e-10) {
    if (n < 8) throw input_error("front needs at least 8 samples");
    std::vector<Vec2> pts;
    Vec2 Xv = f.X().value(q), Yv = f.Y().value(q);
    if (rank_2xn({Xv, Yv}) == 2) {
        pts.resize(n);
        for (int k = 0; k < n; ++k)
            pts[k] = exp_map(f, q, 2 * M_PI * k / n, t, tol);
        return pts;
    }
    pts.reserve(2 * n);
    for (int k = 0; k < n; ++k) {
        double a = a_max - 2 * a_max * k / (n - 1);
        InitialCovector ic = initial_covector_z(f, q, +1, a);
        pts.push_back(integrate_geodesic(f, ic.state, t, tol).point_at(t));
    }
    for (int k = 0; k < n; ++k) {
        double a = -a_max + 2 * a_max * k / (n - 1);
        InitialCovector ic = initial_covector_z(f, q, -1, a);
        pts.push_back(integrate_geodesic(f, ic.state, t, tol).point_at(t));
    }
    return pts;
}

} // namespace arsgeo
