#pragma once

// Dormand-Prince 5(4) with PI step control and the standard quartic dense
// output. The whole adaptive mesh is kept so solutions can be evaluated at
// arbitrary times afterwards.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "errors.hpp"

namespace arsgeo {

template <std::size_t N>
using OdeVec = std::array<double, N>;

namespace ode_detail {

template <std::size_t N>
OdeVec<N> lincomb(const OdeVec<N>& base, double h,
                  std::initializer_list<std::pair<double, const OdeVec<N>*>> terms) {
    OdeVec<N> out = base;
    for (const auto& [c, k] : terms)
        for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
    return out;
}

} // namespace ode_detail

// One accepted step's interpolation data: y(t0 + th*h) for th in [0,1] is
// c1 + th*(c2 + (1-th)*(c3 + th*(c4 + (1-th)*c5))).
template <std::size_t N>
struct DenseStep {
    double t0 = 0, h = 0;
    OdeVec<N> c1{}, c2{}, c3{}, c4{}, c5{};

    OdeVec<N> eval(double t) const {
        double th = (t - t0) / h, th1 = 1 - th;
        OdeVec<N> out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = c1[i] + th * (c2[i] + th1 * (c3[i] + th * (c4[i] + th1 * c5[i])));
        return out;
    }
};

template <std::size_t N>
struct OdeSolution {
    std::vector<double> times;      // mesh, times.front() = t0
    std::vector<OdeVec<N>> states;  // states on the mesh
    std::vector<DenseStep<N>> steps;

    double t0() const { return times.front(); }
    double t1() const { return times.back(); }

    OdeVec<N> eval(double t) const {
        if (steps.empty()) return states.front();
        if (t <= times.front()) return states.front();
        if (t >= times.back()) return states.back();
        std::size_t lo = 0, hi = steps.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (steps[mid].t0 <= t) lo = mid;
            else hi = mid;
        }
        return steps[lo].eval(t);
    }
};

// Called after each accepted step; returning false stops the integration.
template <std::size_t N>
using StepObserver = std::function<bool(double t, const OdeVec<N>& y)>;

template <std::size_t N, class RHS>
OdeSolution<N> integrate_dopri5(RHS&& rhs, const OdeVec<N>& y0, double t0, double t1,
                                double tol, StepObserver<N> observer = {}) {
    if (!(t1 > t0)) throw input_error("integration horizon must be positive");
    const double atol = tol, rtol = tol;

    // Dormand-Prince coefficients.
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    using V = OdeVec<N>;
    auto scaled_norm = [&](const V& err, const V& ya, const V& yb) {
        double s = 0;
        for (std::size_t i = 0; i < N; ++i) {
            double sc = atol + rtol * std::max(std::fabs(ya[i]), std::fabs(yb[i]));
            double r = err[i] / sc;
            s += r * r;
        }
        return std::sqrt(s / N);
    };

    OdeSolution<N> sol;
    sol.times.push_back(t0);
    sol.states.push_back(y0);

    V y = y0;
    V k1;
    rhs(t0, y, k1);

    // Initial step from the local derivative scale, then one Euler probe.
    double h;
    {
        double d0 = scaled_norm(y, y, y), dd1 = scaled_norm(k1, y, y);
        double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
        h0 = std::min(h0, t1 - t0);
        V y1e;
        for (std::size_t i = 0; i < N; ++i) y1e[i] = y[i] + h0 * k1[i];
        V f1;
        rhs(t0 + h0, y1e, f1);
        V df;
        for (std::size_t i = 0; i < N; ++i) df[i] = f1[i] - k1[i];
        double d2 = scaled_norm(df, y, y) / h0;
        double h1 = (std::max(dd1, d2) <= 1e-15)
                        ? std::max(1e-6, h0 * 1e-3)
                        : std::pow(0.01 / std::max(dd1, d2), 0.2);
        h = std::min({100 * h0, h1, t1 - t0});
    }

    double t = t0;
    double err_prev = 1e-4;
    const int max_steps = 2000000;
    for (int step = 0; step < max_steps; ++step) {
        if (t1 - t < 1e-14 * (std::fabs(t) + 1.0)) return sol;
        if (h < 1e-14 * (std::fabs(t) + 1.0))
            throw numeric_error("step size underflow in integrator");
        bool last = false;
        if (t + h >= t1) {
            h = t1 - t;
            last = true;
        }

        using ode_detail::lincomb;
        V k2, k3, k4, k5, k6, k7;
        rhs(t + h / 5, lincomb<N>(y, h, {{a21, &k1}}), k2);
        rhs(t + 3 * h / 10, lincomb<N>(y, h, {{a31, &k1}, {a32, &k2}}), k3);
        rhs(t + 4 * h / 5, lincomb<N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}), k4);
        rhs(t + 8 * h / 9,
            lincomb<N>(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), k5);
        rhs(t + h,
            lincomb<N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}),
            k6);
        V ynew = lincomb<N>(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        rhs(t + h, ynew, k7);

        V errv;
        for (std::size_t i = 0; i < N; ++i)
            errv[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                           e7 * k7[i]);
        double err = scaled_norm(errv, y, ynew);

        if (err <= 1.0) {
            DenseStep<N> ds;
            ds.t0 = t;
            ds.h = h;
            for (std::size_t i = 0; i < N; ++i) {
                double ydiff = ynew[i] - y[i];
                double bspl = h * k1[i] - ydiff;
                ds.c1[i] = y[i];
                ds.c2[i] = ydiff;
                ds.c3[i] = bspl;
                ds.c4[i] = ydiff - h * k7[i] - bspl;
                ds.c5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                d6 * k6[i] + d7 * k7[i]);
            }
            t += h;
            y = ynew;
            k1 = k7; // first-same-as-last
            sol.times.push_back(t);
            sol.states.push_back(y);
            sol.steps.push_back(ds);
            if (observer && !observer(t, y)) return sol;
            if (last) return sol;

            double fac = 0.9 * std::pow(err, -0.7 / 5) * std::pow(err_prev, 0.4 / 5);
            fac = std::min(5.0, std::max(0.2, fac));
            err_prev = std::max(err, 1e-10);
            h *= fac;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    throw numeric_error("integrator exceeded the step budget");
}

} // namespace arsgeo
