#pragma once

// Tubular neighborhood of the singular locus: from each arclength node of a
// traced Z component, normal geodesic rays E_sigma(t, alpha) leave to both
// sides with H = 1/2, so t is the metric distance from Z. Provides the grid
// (rays, velocities, alpha derivatives), injectivity checks, and inversion
// of the tube map (distance_to_Z).

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "hamiltonian.hpp"
#include "parallel.hpp"
#include "singular_locus.hpp"

namespace arsgeo {

// Tube construction failure: tangency on Z or a fold inside [0, eps0].
struct tube_error : numeric_error {
    using numeric_error::numeric_error;
};

namespace tube_detail {

// Newton projection onto {det = 0} along the determinant gradient.
inline Vec2 project_to_locus(const Frame2& f, Vec2 q) {
    for (int it = 0; it < 5; ++it) {
        double d = f.det(q);
        Vec2 g = f.det_gradient(q);
        double g2 = g.dot(g);
        if (g2 < 1e-20 || std::fabs(d) < 1e-14) break;
        q = q - g * (d / g2);
    }
    return q;
}

// Covector normal to Z with H = 1/2: lam = sigma * n / sqrt(<n,X>^2+<n,Y>^2).
// Well-defined wherever Z is transversal to the distribution, including
// non-generic loci where the Grushin covector-line parameterization is not.
inline Vec2 normal_covector(const Frame2& f, const Vec2& q, const Vec2& unit_tangent,
                            int sigma) {
    Vec2 n = unit_tangent.perp();
    double c1 = n.dot(f.X().value(q)), c2 = n.dot(f.Y().value(q));
    double denom = std::sqrt(c1 * c1 + c2 * c2);
    if (denom < 1e-8)
        throw tube_error("singular locus is tangent to the distribution; no normal ray");
    return n * (double(sigma) / denom);
}

} // namespace tube_detail

struct TubeRay {
    double alpha = 0; // arclength along the component
    Vec2 q0;          // ray origin on Z
    Vec2 normal;      // Euclidean unit normal, the sigma=+1 launch side
    std::array<CotangentState, 2> lam0; // index 0: sigma=+1, 1: sigma=-1
    std::array<Geodesic, 2> geo;

    Vec2 point(int side, double t) const { return t == 0 ? q0 : geo[side].point_at(t); }
    Vec2 velocity(const Frame2& f, int side, double t) const {
        return hamiltonian_velocity(f, t == 0 ? lam0[side] : geo[side].state_at(t));
    }
};

struct TubeComponent {
    bool closed = false;
    double length = 0;
    // Coordinate translation from the last ray back to the first: loops that
    // traverse a periodic axis close up only modulo this offset, and
    // E(t, alpha + length) = E(t, alpha) + closure in chart coordinates.
    Vec2 closure{0, 0};
    std::vector<TubeRay> rays;   // ascending alpha; closed: no duplicate end ray
    std::array<int, 2> region{}; // sign of det just off Z on each side

    // dE/dalpha at ray k by central difference across neighbor rays.
    Vec2 dE_dalpha(int k, int side, double t) const {
        int n = int(rays.size());
        int lo = k - 1, hi = k + 1;
        double span;
        if (closed) {
            lo = (k + n - 1) % n;
            hi = (k + 1) % n;
            span = rays[hi].alpha - rays[lo].alpha;
            if (span <= 0) span += length;
        } else {
            lo = std::max(lo, 0);
            hi = std::min(hi, n - 1);
            span = rays[hi].alpha - rays[lo].alpha;
        }
        Vec2 plo = rays[lo].point(side, t), phi = rays[hi].point(side, t);
        if (closed && k == 0) plo = plo - closure;
        if (closed && k == n - 1) phi = phi + closure;
        return (phi - plo) / span;
    }

    // Trapezoid weight of ray k for integration in alpha.
    double weight(int k) const {
        int n = int(rays.size());
        if (closed) {
            double span = rays[(k + 1) % n].alpha - rays[(k + n - 1) % n].alpha;
            if (span <= 0) span += length;
            return 0.5 * span;
        }
        if (k == 0) return 0.5 * (rays[1].alpha - rays[0].alpha);
        if (k == n - 1) return 0.5 * (rays[n - 1].alpha - rays[n - 2].alpha);
        return 0.5 * (rays[k + 1].alpha - rays[k - 1].alpha);
    }
};

struct TubeMap {
    double eps0 = 0;
    int nt = 0;
    std::vector<TubeComponent> components;
    std::vector<Vec2> offsets; // chart cover translations for distance queries
    double max_spacing = 0;    // largest Euclid gap between adjacent grid samples

    struct SampleRef {
        int comp = 0, ray = 0, side = 0;
        double t = 0;
        Vec2 p;
    };
    std::vector<SampleRef> samples; // every grid node incl. t=0 origins

    bool empty() const { return components.empty(); }
};

namespace tube_detail {

inline std::vector<Vec2> cover_offsets(const Chart& ch) {
    std::vector<double> xs{0}, ys{0};
    if (ch.ident_x == AxisIdent::Periodic) { xs.push_back(ch.width()); xs.push_back(-ch.width()); }
    if (ch.ident_y == AxisIdent::Periodic) { ys.push_back(ch.height()); ys.push_back(-ch.height()); }
    std::vector<Vec2> out;
    for (double dy : ys)
        for (double dx : xs) out.push_back({dx, dy});
    return out;
}

} // namespace tube_detail

// Builds the two-sided tube over every component of the traced locus.
// nalpha rays per component (closed: around the loop; open: including both
// ends), nt distance samples per ray. Throws tube_error on tangency, on a
// sign change of cross(dE/dt, dE/dalpha) anywhere on the grid (fold), and
// when distinct components' tubes come within one grid spacing.
inline TubeMap build_tube(const Frame2& f, const std::vector<Polyline>& locus, double eps0,
                          int nalpha = 256, int nt = 16) {
    if (eps0 <= 0) throw input_error("tube needs eps0 > 0");
    if (nalpha < 8 || nt < 2) throw input_error("tube grid too coarse");

    TubeMap tube;
    tube.eps0 = eps0;
    tube.nt = nt;
    tube.offsets = tube_detail::cover_offsets(f.chart());

    for (const Polyline& pl : locus) {
        if (pl.pts.size() < 2) continue;
        // Cumulative Euclidean arclength of the traced polyline.
        std::vector<double> s(pl.pts.size(), 0.0);
        for (size_t i = 1; i < pl.pts.size(); ++i)
            s[i] = s[i - 1] + (pl.pts[i] - pl.pts[i - 1]).norm();
        double total = s.back();
        if (total <= 0) continue;

        auto point_at = [&](double a) {
            a = std::clamp(a, 0.0, total);
            size_t i = size_t(std::lower_bound(s.begin() + 1, s.end(), a) - s.begin());
            i = std::min(i, pl.pts.size() - 1);
            double w = (a - s[i - 1]) / (s[i] - s[i - 1]);
            return pl.pts[i - 1] + (pl.pts[i] - pl.pts[i - 1]) * w;
        };

        TubeComponent comp;
        comp.closed = pl.closed;
        // Closed polylines duplicate the first vertex at the end; skip the
        // duplicate so rays are unique around the loop.
        int nrays = pl.closed ? nalpha : nalpha + 1;
        std::vector<Vec2> origins(nrays);
        for (int k = 0; k < nrays; ++k)
            origins[k] = tube_detail::project_to_locus(f, point_at(total * k / nalpha));

        // Arclength and tangents of the projected origin sequence. A closed
        // loop along a periodic axis re-enters at origins[0] + closure.
        std::vector<double> alpha(nrays, 0.0);
        for (int k = 1; k < nrays; ++k)
            alpha[k] = alpha[k - 1] + (origins[k] - origins[k - 1]).norm();
        comp.length = alpha.back();
        if (pl.closed) {
            double best = 1e300;
            for (const Vec2& off : tube.offsets) {
                double d = (origins[0] + off - origins.back()).norm();
                if (d < best) { best = d; comp.closure = off; }
            }
            comp.length += best;
        }

        auto tangent_at = [&](int k) {
            int n = nrays;
            Vec2 d;
            if (pl.closed) {
                Vec2 nxt = origins[(k + 1) % n], prv = origins[(k + n - 1) % n];
                if (k == n - 1) nxt = nxt + comp.closure;
                if (k == 0) prv = prv - comp.closure;
                d = nxt - prv;
            } else if (k == 0) {
                d = origins[1] - origins[0];
            } else if (k == n - 1) {
                d = origins[n - 1] - origins[n - 2];
            } else {
                d = origins[k + 1] - origins[k - 1];
            }
            double nn = d.norm();
            if (nn < 1e-15) throw tube_error("degenerate locus polyline");
            return d / nn;
        };

        comp.rays.resize(nrays);
        std::vector<std::string> fail(nrays);
        parallel_for(nrays, [&](int k) {
            try {
                TubeRay& r = comp.rays[k];
                r.alpha = alpha[k];
                r.q0 = origins[k];
                Vec2 tan = tangent_at(k);
                r.normal = tan.perp();
                for (int side = 0; side < 2; ++side) {
                    int sigma = side == 0 ? +1 : -1;
                    r.lam0[side] = {r.q0, tube_detail::normal_covector(f, r.q0, tan, sigma)};
                    r.geo[side] = integrate_geodesic(f, r.lam0[side], eps0);
                }
            } catch (const std::exception& e) {
                fail[k] = e.what();
            }
        });
        for (const std::string& msg : fail)
            if (!msg.empty()) throw tube_error("tube ray failed: " + msg);

        // Region signs just off Z; both sides may land in the same region
        // (touching zero of det).
        double tprobe = eps0 / nt;
        for (int side = 0; side < 2; ++side) {
            double d = f.det(comp.rays[0].point(side, tprobe));
            comp.region[side] = d > 0 ? 1 : (d < 0 ? -1 : 0);
            if (comp.region[side] == 0)
                throw tube_error("determinant vanishes off the singular locus");
        }

        tube.components.push_back(std::move(comp));
    }

    // Grid samples, fold check, spacing.
    for (size_t ci = 0; ci < tube.components.size(); ++ci) {
        TubeComponent& comp = tube.components[ci];
        int nrays = int(comp.rays.size());
        for (int side = 0; side < 2; ++side) {
            double ref_sign = 0;
            for (int k = 0; k < nrays; ++k) {
                tube.samples.push_back({int(ci), k, side, 0.0, comp.rays[k].q0});
                for (int j = 1; j <= tube.nt; ++j) {
                    double t = tube.eps0 * j / tube.nt;
                    Vec2 p = comp.rays[k].point(side, t);
                    tube.samples.push_back({int(ci), k, side, t, p});
                    Vec2 Et = comp.rays[k].velocity(f, side, t);
                    Vec2 Ea = comp.dE_dalpha(k, side, t);
                    double cr = cross(Et, Ea);
                    if (ref_sign == 0) ref_sign = cr;
                    if (cr == 0 || (cr > 0) != (ref_sign > 0))
                        throw tube_error("tube fold: pullback density changes sign; reduce eps0");
                }
            }
        }
        for (int k = 0; k < nrays; ++k) {
            int next = comp.closed ? (k + 1) % nrays : std::min(k + 1, nrays - 1);
            // The closing segment of a loop can cross a periodic seam.
            double gap = 1e300;
            for (const Vec2& off : tube.offsets)
                gap = std::min(gap, (comp.rays[next].q0 + off - comp.rays[k].q0).norm());
            tube.max_spacing = std::max(tube.max_spacing, gap);
        }
        double vmax = 0;
        for (const TubeRay& r : comp.rays)
            for (int side = 0; side < 2; ++side)
                vmax = std::max(vmax, r.velocity(f, side, tube.eps0).norm());
        tube.max_spacing = std::max(tube.max_spacing, vmax * tube.eps0 / tube.nt);
    }

    // Distinct components must keep their tubes apart.
    if (tube.components.size() > 1) {
        std::vector<std::vector<Vec2>> pts(tube.components.size());
        for (const auto& sr : tube.samples) pts[sr.comp].push_back(sr.p);
        for (auto& v : pts) {
            size_t stride = std::max<size_t>(1, v.size() / 300);
            std::vector<Vec2> sub;
            for (size_t i = 0; i < v.size(); i += stride) sub.push_back(v[i]);
            v = std::move(sub);
        }
        for (size_t a = 0; a + 1 < pts.size(); ++a)
            for (size_t b = a + 1; b < pts.size(); ++b) {
                double dmin = 1e300;
                for (const Vec2& pa : pts[a])
                    for (const Vec2& pb : pts[b])
                        for (const Vec2& off : tube.offsets)
                            dmin = std::min(dmin, (pa + off - pb).norm());
                if (dmin < tube.max_spacing)
                    throw tube_error("tubes of distinct locus components overlap; reduce eps0");
            }
    }

    return tube;
}

namespace tube_detail {

// Fresh normal ray at arbitrary arclength: origin and tangent interpolated
// from the stored rays, origin re-projected onto {det = 0}.
inline TubeRay make_ray(const Frame2& f, const TubeComponent& comp, double eps0, double a) {
    int n = int(comp.rays.size());
    if (comp.closed) {
        a = std::fmod(a, comp.length);
        if (a < 0) a += comp.length;
    } else {
        a = std::clamp(a, 0.0, comp.rays.back().alpha);
    }
    int hi = 0;
    while (hi < n && comp.rays[hi].alpha < a) ++hi;
    int lo = std::max(hi - 1, 0);
    double w = 0, span = 0;
    if (hi == n) {
        // Past the last stored ray: only reachable on closed loops.
        lo = n - 1;
        hi = comp.closed ? 0 : n - 1;
        span = comp.closed ? comp.length - comp.rays[n - 1].alpha : 0;
    } else if (hi > 0) {
        span = comp.rays[hi].alpha - comp.rays[lo].alpha;
    }
    if (span > 0) w = (a - comp.rays[lo].alpha) / span;

    Vec2 q_hi = comp.rays[hi].q0;
    if (comp.closed && hi == 0 && lo == n - 1) q_hi = q_hi + comp.closure;
    TubeRay r;
    r.alpha = a;
    r.q0 = project_to_locus(f, comp.rays[lo].q0 + (q_hi - comp.rays[lo].q0) * w);
    // normal = tan.perp() rotates +pi/2; recover tan as -normal.perp().
    Vec2 tan = comp.rays[lo].normal.perp() * (w - 1.0) - comp.rays[hi].normal.perp() * w;
    double nn = tan.norm();
    if (nn < 1e-15) throw tube_error("degenerate tangent interpolation");
    tan = tan / nn;
    for (int side = 0; side < 2; ++side) {
        int sigma = side == 0 ? +1 : -1;
        r.lam0[side] = {r.q0, normal_covector(f, r.q0, tan, sigma)};
        r.geo[side] = integrate_geodesic(f, r.lam0[side], eps0);
    }
    r.normal = tan.perp();
    return r;
}

// Parameter of the closest point on a dense ray to q, and that distance.
inline std::pair<double, double> closest_t(const TubeRay& ray, int side, double eps0,
                                           const Vec2& q) {
    // Golden-section on [0, eps0]; the ray is near-straight at tube scale.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0, hi = eps0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = (ray.point(side, x1) - q).norm(), f2 = (ray.point(side, x2) - q).norm();
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        if (f1 <= f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = (ray.point(side, x1) - q).norm();
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = (ray.point(side, x2) - q).norm();
        }
    }
    double t = 0.5 * (lo + hi);
    // Endpoints can win.
    double dm = (ray.point(side, t) - q).norm();
    if ((ray.q0 - q).norm() < dm) { t = 0; dm = (ray.q0 - q).norm(); }
    if ((ray.point(side, eps0) - q).norm() < dm) { t = eps0; dm = (ray.point(side, eps0) - q).norm(); }
    return {t, dm};
}

// Signed lateral offset of q from the ray: positive when q lies on the
// advancing-alpha side. Root in alpha locates the ray through q.
inline double lateral(const Frame2& f, const TubeRay& ray, int side, double eps0,
                      const Vec2& q) {
    auto [t, d] = closest_t(ray, side, eps0, q);
    Vec2 et = ray.velocity(f, side, t);
    double nn = et.norm();
    if (nn < 1e-15) return 0;
    return cross(q - ray.point(side, t), et / nn) * -1.0;
}

} // namespace tube_detail

// Metric distance from q to Z when it is at most eps0 (i.e. q lies in the
// tube); nullopt otherwise. Inverts the tube map: brackets the ray through q
// in alpha between stored rays, then Illinois iteration on the lateral
// offset with fresh rays. Queries far from every grid sample short-circuit
// to nullopt. Distances beyond an open component's end rays are not
// resolved (no end-cap geometry); such queries return nullopt.
inline std::optional<double> distance_to_Z(const Frame2& f, const TubeMap& tube,
                                           const Vec2& q_in) {
    if (tube.empty()) return std::nullopt;

    const TubeMap::SampleRef* best = nullptr;
    Vec2 q = q_in;
    double dbest = 1e300;
    for (const Vec2& off : tube.offsets) {
        Vec2 qo = q_in + off;
        for (const auto& sr : tube.samples) {
            double d = (sr.p - qo).norm();
            if (d < dbest) { dbest = d; best = &sr; q = qo; }
        }
    }
    if (!best || dbest > 2 * tube.max_spacing) return std::nullopt;

    const TubeComponent& comp = tube.components[best->comp];
    const int n = int(comp.rays.size());
    const int side = best->side;
    const double eps0 = tube.eps0;

    // Exact grid hits (and near-hits) resolve without iteration.
    {
        auto [t, d] = tube_detail::closest_t(comp.rays[best->ray], side, eps0, q);
        if (d < 1e-9 * (1 + eps0)) return t;
    }

    auto ray_at = [&](double a) { return tube_detail::make_ray(f, comp, eps0, a); };
    auto psi_stored = [&](int k) {
        return tube_detail::lateral(f, comp.rays[k], side, eps0, q);
    };

    // Bracket in alpha around the nearest ray.
    int k0 = best->ray;
    double a_lo, a_hi, psi_lo, psi_hi;
    {
        int prev = comp.closed ? (k0 + n - 1) % n : std::max(k0 - 1, 0);
        int next = comp.closed ? (k0 + 1) % n : std::min(k0 + 1, n - 1);
        double pk = psi_stored(k0);
        double pprev = prev == k0 ? pk : psi_stored(prev);
        double pnext = next == k0 ? pk : psi_stored(next);
        double ap = comp.rays[prev].alpha, ak = comp.rays[k0].alpha,
               an = comp.rays[next].alpha;
        if (comp.closed && prev == n - 1 && k0 == 0) ap -= comp.length;
        if (comp.closed && next == 0 && k0 == n - 1) an += comp.length;
        if ((pprev < 0) != (pk < 0)) {
            a_lo = ap; a_hi = ak; psi_lo = pprev; psi_hi = pk;
        } else if ((pk < 0) != (pnext < 0)) {
            a_lo = ak; a_hi = an; psi_lo = pk; psi_hi = pnext;
        } else {
            // No sign change: q sits off the end of an open component or
            // beyond grid resolution; fall back to the best stored ray.
            auto [t, d] = tube_detail::closest_t(comp.rays[k0], side, eps0, q);
            return d < 1e-6 * (1 + eps0) && t <= eps0 ? std::optional<double>(t)
                                                      : std::nullopt;
        }
    }

    // Illinois on psi(alpha).
    double a_sol = a_lo;
    for (int it = 0; it < 40; ++it) {
        if (std::fabs(a_hi - a_lo) < 1e-12 * (1 + comp.length)) break;
        double am = (a_lo * psi_hi - a_hi * psi_lo) / (psi_hi - psi_lo);
        if (!(am > std::min(a_lo, a_hi) && am < std::max(a_lo, a_hi)))
            am = 0.5 * (a_lo + a_hi);
        TubeRay rm = ray_at(am);
        double pm = tube_detail::lateral(f, rm, side, eps0, q);
        auto [t, d] = tube_detail::closest_t(rm, side, eps0, q);
        a_sol = am;
        if (d < 1e-10 * (1 + eps0)) {
            return t <= eps0 * (1 + 1e-9) && d < 1e-8 ? std::optional<double>(t)
                                                      : std::nullopt;
        }
        if ((pm < 0) == (psi_lo < 0)) {
            a_lo = am; psi_lo = pm;
            psi_hi *= 0.5;
        } else {
            a_hi = am; psi_hi = pm;
            psi_lo *= 0.5;
        }
    }
    TubeRay rs = tube_detail::make_ray(f, comp, eps0, a_sol);
    auto [t, d] = tube_detail::closest_t(rs, side, eps0, q);
    if (d > 1e-6 * (1 + eps0)) return std::nullopt;
    return t <= eps0 * (1 + 1e-9) ? std::optional<double>(t) : std::nullopt;
}

// Largest eps0 <= cap for which the tube builds fold-free on the grid.
inline TubeMap choose_tube(const Frame2& f, const std::vector<Polyline>& locus,
                           double cap = 0.5, int nalpha = 256, int nt = 16) {
    double eps0 = cap;
    for (int it = 0; it < 12; ++it) {
        try {
            return build_tube(f, locus, eps0, nalpha, nt);
        } catch (const tube_error&) {
            eps0 *= 0.5;
        } catch (const chart_exit_error&) {
            eps0 *= 0.5;
        }
    }
    throw tube_error("no fold-free tube width found down to cap/4096");
}

} // namespace arsgeo
