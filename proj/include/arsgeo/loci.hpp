#pragma once
// Conjugate loci from Jacobi determinant sign changes, cut loci from front
// self-intersection, plus the closed-form Grushin reference geodesics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "arsgeo/hamiltonian.hpp"
#include "arsgeo/parallel.hpp"

namespace arsgeo {

enum class LocusKind { Conjugate, Cut };

struct LocusPoint {
    double theta = 0; // ellipse angle, or the covector line coordinate on Z
    double t = 0;
    Vec2 q;
    LocusKind kind = LocusKind::Conjugate;
};

// Geodesics from the origin of the Grushin plane. a = 0 gives the horizontal
// rays (+-t, 0).
inline Vec2 grushin_geodesic_origin(int sign, double a, double t) {
    double s = sign >= 0 ? 1.0 : -1.0;
    if (a == 0) return {s * t, 0};
    return {s * std::sin(a * t) / a, t / (2 * a) - std::sin(2 * a * t) / (4 * a * a)};
}

enum class GrushinFamily { G1, G2, G3, G4 };

// Geodesics from (-1, 0) in the Grushin plane, the four families covering
// a in (0, 1]. G1/G2 fill {y >= 0}, G3/G4 are their lower mirrors.
inline Vec2 grushin_geodesic_m10(GrushinFamily family, double a, double t) {
    if (!(a > 0 && a <= 1)) throw input_error("family parameter must lie in (0, 1]");
    double r = std::sqrt(1 - a * a);
    double xp = (-a * std::cos(a * t) + r * std::sin(a * t)) / a;
    double xm = (-a * std::cos(a * t) - r * std::sin(a * t)) / a;
    double c = std::cos(a * t);
    double yp = (-4 * a * r + 2 * a * t + 4 * a * r * c * c - std::sin(2 * a * t) +
                 2 * a * a * std::sin(2 * a * t)) /
                (4 * a * a);
    double ym = (4 * a * r + 2 * a * t - 4 * a * r * c * c - std::sin(2 * a * t) +
                 2 * a * a * std::sin(2 * a * t)) /
                (4 * a * a);
    switch (family) {
    case GrushinFamily::G1: return {xp, yp};
    case GrushinFamily::G2: return {xm, ym};
    case GrushinFamily::G3: return {xp, -yp};
    default: return {xm, -yp};
    }
}

namespace loci_detail {

// Integrates a ray, shrinking the horizon when it leaves the chart.
struct CappedRay {
    Geodesic geo;
    double tcap = 0;
};

inline CappedRay capped_ray(const Frame2& f, const CotangentState& s0, double tmax,
                            double tol) {
    double t = tmax;
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            Geodesic g = integrate_geodesic(f, s0, t, tol);
            return {std::move(g), t};
        } catch (const chart_exit_error& e) {
            t = e.exit_time - 1e-9 * (std::fabs(e.exit_time) + 1.0);
            if (t <= 0) break;
        }
    }
    throw numeric_error("ray leaves the chart immediately");
}

struct CappedVariations {
    VariationalFlow vf;
    double tcap = 0;
};

inline CappedVariations capped_variations(const Frame2& f, const CotangentState& s0,
                                          double tmax, double tol) {
    double t = tmax;
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            VariationalFlow vf = flow_with_variations(f, s0, t, tol);
            return {std::move(vf), t};
        } catch (const chart_exit_error& e) {
            t = e.exit_time - 1e-9 * (std::fabs(e.exit_time) + 1.0);
            if (t <= 0) break;
        }
    }
    throw numeric_error("ray leaves the chart immediately");
}

// J(t) = det[dE/dtheta, dE/dt] in chart coordinates.
inline double jacobi_det(const Frame2& f, const VariationalFlow& vf, const Vec2& dlam,
                         double t) {
    Vec2 dq = vf.dq_dparam(t, dlam);
    CotangentState s = vf.state_at(t);
    OdeVec<4> y{s.q.x, s.q.y, s.lam.x, s.lam.y}, d;
    hamiltonian_rhs(f, y, d);
    return dq.x * d[1] - dq.y * d[0];
}

struct ConjugateScan {
    std::optional<double> t;
    Vec2 q;
    bool grazing = false; // |J| < 1e-12 past the startup ramp, no sign change
};

inline ConjugateScan conjugate_scan(const Frame2& f, const Vec2& base, double theta,
                                    double tmax, double tol) {
    if (tmax <= 0) throw input_error("conjugate search needs tmax > 0");
    InitialCovector ic = initial_covector(f, base, theta);
    CappedVariations cv = capped_variations(f, ic.state, tmax, tol);
    ConjugateScan out;
    double prev_t = 0, prev_J = 0, peak = 0;
    bool have_sign = false;
    for (double t : cv.vf.sol.times) {
        if (t <= 0) continue;
        double J = jacobi_det(f, cv.vf, ic.dlam, t);
        if (!have_sign) {
            if (J != 0) {
                have_sign = true;
                prev_t = t;
                prev_J = J;
                peak = std::fabs(J);
            }
            continue;
        }
        if (J != 0 && (J > 0) != (prev_J > 0)) {
            double lo = prev_t, hi = t, Jlo = prev_J;
            while (hi - lo > 1e-9) {
                double mid = 0.5 * (lo + hi);
                double Jm = jacobi_det(f, cv.vf, ic.dlam, mid);
                if (Jm == 0) {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if ((Jm > 0) == (Jlo > 0)) {
                    lo = mid;
                    Jlo = Jm;
                } else {
                    hi = mid;
                }
            }
            out.t = 0.5 * (lo + hi);
            out.q = cv.vf.state_at(*out.t).q;
            return out;
        }
        if (std::fabs(J) < 1e-12 && peak > 1e-9) out.grazing = true;
        peak = std::max(peak, std::fabs(J));
        prev_t = t;
        prev_J = J;
    }
    return out;
}

} // namespace loci_detail

inline std::optional<double> conjugate_time(const Frame2& f, const Vec2& q, double theta,
                                            double tmax, double tol = 1e-10) {
    return loci_detail::conjugate_scan(f, q, theta, tmax, tol).t;
}

// Default covector grid: full theta circle off Z, the |a| <= a_max line on Z.
inline std::vector<double> default_theta_grid(const Frame2& f, const Vec2& q,
                                              int n_ellipse = 720, int n_line = 600,
                                              double a_max = 50.0) {
    std::vector<double> grid;
    Vec2 Xv = f.X().value(q), Yv = f.Y().value(q);
    if (rank_2xn({Xv, Yv}) == 2) {
        grid.resize(n_ellipse);
        for (int k = 0; k < n_ellipse; ++k) grid[k] = 2 * M_PI * k / n_ellipse;
    } else {
        grid.resize(n_line);
        for (int k = 0; k < n_line; ++k)
            grid[k] = -a_max + 2 * a_max * k / (n_line - 1.0);
    }
    return grid;
}

inline std::vector<LocusPoint> conjugate_locus(const Frame2& f, const Vec2& q,
                                               const std::vector<double>& theta_grid,
                                               double tmax, double tol = 1e-10) {
    std::vector<std::optional<LocusPoint>> slots(theta_grid.size());
    parallel_for(theta_grid.size(), [&](std::size_t k) {
        auto scan = loci_detail::conjugate_scan(f, q, theta_grid[k], tmax, tol);
        if (scan.t)
            slots[k] = LocusPoint{theta_grid[k], *scan.t, scan.q, LocusKind::Conjugate};
    });
    std::vector<LocusPoint> out;
    for (const auto& s : slots)
        if (s) out.push_back(*s);
    return out;
}

namespace loci_detail {

struct FamilyRay {
    double param = 0; // theta or a
    int arc = 0;      // 0: ellipse or + line, 1: - line
    InitialCovector ic;
    Geodesic geo;
    double tcap = 0;
};

struct FrontFamily {
    std::vector<FamilyRay> rays; // boundary-sweep order
    bool on_z = false;
    bool closed = false; // ellipse wraps around

    // Index of the + line ray carrying parameter p (exact match).
    int index_of(double p) const {
        for (std::size_t k = 0; k < rays.size(); ++k)
            if (rays[k].arc == 0 && rays[k].param == p) return int(k);
        return -1;
    }
};

// Lattice translations identifying chart copies; flipped axes are skipped, so
// cuts through a Flip identification are not detected.
inline std::vector<Vec2> cover_offsets(const Chart& ch) {
    std::vector<double> ox{0}, oy{0};
    if (ch.ident_x == AxisIdent::Periodic) {
        ox.push_back(ch.width());
        ox.push_back(-ch.width());
    }
    if (ch.ident_y == AxisIdent::Periodic) {
        oy.push_back(ch.height());
        oy.push_back(-ch.height());
    }
    std::vector<Vec2> out;
    for (double x : ox)
        for (double y : oy) out.push_back({x, y});
    return out;
}

// Family over an ascending parameter grid; extra + line parameters (query
// injections) are merged in. On Z the + line runs descending, the - line
// ascending, matching the boundary-sweep order of front().
inline FrontFamily build_front_family(const Frame2& f, const Vec2& q,
                                      std::vector<double> grid,
                                      const std::vector<double>& inject, double tmax,
                                      double tol) {
    FrontFamily fam;
    Vec2 Xv = f.X().value(q), Yv = f.Y().value(q);
    fam.on_z = rank_2xn({Xv, Yv}) < 2;
    std::vector<double> plus = grid;
    plus.insert(plus.end(), inject.begin(), inject.end());
    std::sort(plus.begin(), plus.end());
    plus.erase(std::unique(plus.begin(), plus.end()), plus.end());
    if (!fam.on_z) {
        fam.closed = true;
        for (double p : plus) {
            FamilyRay r;
            r.param = p;
            fam.rays.push_back(r);
        }
    } else {
        for (auto it = plus.rbegin(); it != plus.rend(); ++it) {
            FamilyRay r;
            r.param = *it;
            fam.rays.push_back(r);
        }
        for (double a : grid) {
            FamilyRay r;
            r.param = a;
            r.arc = 1;
            fam.rays.push_back(r);
        }
    }
    parallel_for(fam.rays.size(), [&](std::size_t k) {
        FamilyRay& r = fam.rays[k];
        r.ic = r.arc == 1 ? initial_covector_z(f, q, -1, r.param)
                          : initial_covector(f, q, r.param);
        CappedRay cr = capped_ray(f, r.ic.state, tmax, tol);
        r.geo = std::move(cr.geo);
        r.tcap = cr.tcap;
    });
    return fam;
}

inline bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& p3, const Vec2& p4) {
    auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        return v > 0 ? 1 : (v < 0 ? -1 : 0);
    };
    return orient(p1, p2, p3) * orient(p1, p2, p4) < 0 &&
           orient(p3, p4, p1) * orient(p3, p4, p2) < 0;
}

struct CoarseHit {
    int k_lo = 0, k_hi = 0; // bracketing indices on the coarse time grid
    int partner = 0;        // first ray of the crossed segment
    Vec2 offset;            // cover translation applied to the partner
};

// Nearest non-neighbor front segment to a point, over all cover copies.
struct NearestSeg {
    int seg = -1; // first ray of the segment
    int off = 0;  // index into the offsets list
    int sign = 0; // side of the segment
    double dist = std::numeric_limits<double>::infinity();
};

// Coarse front self-intersection scan around the query ray i0. Two events
// seed a hit: a segment adjacent to i0 properly crossing a non-neighboring
// segment (sweeping cuts), or the query point switching sides of its nearest
// non-neighbor segment (head-on cuts, where the crossing never dwells inside
// the query's own segments). Hits are emitted in time order.
inline std::vector<CoarseHit> coarse_front_hits(const FrontFamily& fam, int i0,
                                                const std::vector<Vec2>& offsets,
                                                double t_hi, int nt) {
    const int n = int(fam.rays.size());
    auto valid = [&](int k, double t) { return fam.rays[k].tcap >= t; };
    auto next_in_arc = [&](int k) -> int {
        int j = (k + 1) % n;
        if (!fam.closed && j == 0) return -1;
        return fam.rays[k].arc == fam.rays[j % n].arc ? j : -1;
    };
    auto ring_dist = [&](int a, int b) {
        int d = std::abs(a - b);
        return fam.closed ? std::min(d, n - d) : d;
    };
    auto is_neighbor = [&](int j, int j2) {
        return fam.rays[j].arc == fam.rays[i0].arc &&
               std::min(ring_dist(j, i0), ring_dist(j2, i0)) < 2;
    };

    // Per-offset nearest segments: a distant cover copy sweeping in toward
    // the query must be tracked even while a zero-offset segment is nearer.
    auto nearest_per_offset = [&](const Vec2& p, double t) {
        std::vector<NearestSeg> out(offsets.size());
        for (int j = 0; j < n; ++j) {
            int j2 = next_in_arc(j);
            if (j2 < 0 || !valid(j, t) || !valid(j2, t)) continue;
            Vec2 a = fam.rays[j].geo.point_at(t), b = fam.rays[j2].geo.point_at(t);
            Vec2 d = b - a;
            double len2 = d.dot(d);
            if (len2 == 0) continue;
            for (std::size_t ko = 0; ko < offsets.size(); ++ko) {
                const Vec2& off = offsets[ko];
                if (off.x == 0 && off.y == 0 && is_neighbor(j, j2)) continue;
                Vec2 ao = a + off;
                double u = std::max(0.0, std::min(1.0, (p - ao).dot(d) / len2));
                Vec2 foot = ao + d * u;
                double dist = (p - foot).norm();
                if (dist < out[ko].dist) {
                    double cr = d.x * (p.y - ao.y) - d.y * (p.x - ao.x);
                    out[ko] = {j, int(ko), cr > 0 ? 1 : (cr < 0 ? -1 : 0), dist};
                }
            }
        }
        return out;
    };

    std::vector<CoarseHit> hits;
    // One hit per crossing region: the refiner rescans the full time range
    // anyway, so repeats against the same partner neighborhood are redundant.
    auto push_hit = [&](const CoarseHit& h) {
        for (const CoarseHit& e : hits) {
            if (e.offset.x != h.offset.x || e.offset.y != h.offset.y) continue;
            if (fam.rays[e.partner].arc == fam.rays[h.partner].arc &&
                ring_dist(e.partner, h.partner) <= 4)
                return;
        }
        hits.push_back(h);
    };

    std::vector<NearestSeg> prev_near;
    for (int kt = 1; kt <= nt; ++kt) {
        double t = t_hi * kt / nt;
        if (!valid(i0, t)) break;

        // Detector A: adjacent-segment proper crossings.
        for (int s0 : {i0 - 1, i0}) {
            int a = fam.closed ? (s0 + n) % n : s0;
            if (a < 0) continue;
            int b = next_in_arc(a);
            if (b < 0 || !valid(a, t) || !valid(b, t)) continue;
            Vec2 p1 = fam.rays[a].geo.point_at(t), p2 = fam.rays[b].geo.point_at(t);
            for (int j = 0; j < n; ++j) {
                int j2 = next_in_arc(j);
                if (j2 < 0 || !valid(j, t) || !valid(j2, t)) continue;
                for (const Vec2& off : offsets) {
                    if (off.x == 0 && off.y == 0 && is_neighbor(j, j2)) continue;
                    if (segments_cross(p1, p2, fam.rays[j].geo.point_at(t) + off,
                                       fam.rays[j2].geo.point_at(t) + off)) {
                        push_hit(CoarseHit{kt - 1, kt, j, off});
                        break;
                    }
                }
            }
        }

        // Detector B: side flip against a persistent nearest segment.
        std::vector<NearestSeg> cur =
            nearest_per_offset(fam.rays[i0].geo.point_at(t), t);
        if (!prev_near.empty()) {
            for (std::size_t ko = 0; ko < offsets.size(); ++ko) {
                const NearestSeg& p = prev_near[ko];
                const NearestSeg& c = cur[ko];
                if (c.seg >= 0 && p.seg >= 0 && c.sign != 0 && p.sign != 0 &&
                    c.sign != p.sign &&
                    fam.rays[c.seg].arc == fam.rays[p.seg].arc &&
                    ring_dist(c.seg, p.seg) <= 2)
                    push_hit(CoarseHit{kt - 1, kt, c.seg, offsets[ko]});
            }
        }
        prev_near = std::move(cur);
    }
    return hits;
}

// Side of the query point relative to a finely sampled partner sub-arc.
struct PartnerWindow {
    std::vector<double> params;
    std::vector<Geodesic> geos;
    std::vector<double> tcap;
    Vec2 offset;
};

inline PartnerWindow sample_partner(const Frame2& f, const Vec2& base, int arc,
                                    double p_lo, double p_hi, int m, const Vec2& offset,
                                    double tmax, double tol) {
    PartnerWindow w;
    w.offset = offset;
    w.params.resize(m);
    w.geos.resize(m);
    w.tcap.resize(m);
    for (int k = 0; k < m; ++k) {
        w.params[k] = p_lo + (p_hi - p_lo) * k / (m - 1.0);
        InitialCovector ic = arc == 1 ? initial_covector_z(f, base, -1, w.params[k])
                                      : initial_covector(f, base, w.params[k]);
        CappedRay cr = capped_ray(f, ic.state, tmax, tol);
        w.geos[k] = std::move(cr.geo);
        w.tcap[k] = cr.tcap;
    }
    return w;
}

struct SideProbe {
    int sign = 0;       // side of the nearest partner segment, 0 if unusable
    double s_near = 0;  // partner parameter nearest to the query point
    double chord = 0;   // length of the nearest chord, for bias estimates
    double dist = 0;    // distance from the query point to that chord
};

// Parameter band around the query ray itself, excluded from same-arc partner
// windows: the query point lies on its own polyline, so side signs against
// chords there are pure noise. Empty when lo > hi.
struct SelfGuard {
    double lo = 1, hi = 0;
    double period = 0; // parameter period for closed arcs, 0 if none

    bool covers(double a, double b) const {
        if (lo > hi) return false;
        for (int k = -1; k <= 1; ++k) {
            if (period == 0 && k != 0) continue;
            double s = k * period;
            if (std::max(a, b) + s >= lo && std::min(a, b) + s <= hi) return true;
        }
        return false;
    }
};

inline SideProbe partner_side(const PartnerWindow& w, const Vec2& p, double t,
                              const SelfGuard& guard = {}) {
    SideProbe out;
    double best = std::numeric_limits<double>::infinity();
    const int m = int(w.params.size());
    for (int k = 0; k + 1 < m; ++k) {
        if (w.tcap[k] < t || w.tcap[k + 1] < t) continue;
        if (guard.covers(w.params[k], w.params[k + 1])) continue;
        Vec2 a = w.geos[k].point_at(t) + w.offset;
        Vec2 b = w.geos[k + 1].point_at(t) + w.offset;
        Vec2 d = b - a;
        double len2 = d.dot(d);
        if (len2 == 0) continue;
        double u = std::max(0.0, std::min(1.0, (p - a).dot(d) / len2));
        Vec2 foot = a + d * u;
        double dist = (p - foot).norm();
        if (dist < best) {
            best = dist;
            double cr = d.x * (p.y - a.y) - d.y * (p.x - a.x);
            out.sign = cr > 0 ? 1 : (cr < 0 ? -1 : 0);
            out.s_near = w.params[k] + (w.params[k + 1] - w.params[k]) * u;
            out.chord = std::sqrt(len2);
            out.dist = dist;
        }
    }
    return out;
}

struct CutSearch {
    std::optional<double> t;
    double partner_param = 0;
};

// Refines a coarse front crossing: the query ray is evaluated exactly, the
// partner arc is resampled on recentered parameter windows, and the crossing
// time is re-bisected until the chord bias is negligible. A side-sign flip
// counts only when the query point lands on the nearest chord itself; flips
// against the extension of an end chord are artifacts and are scanned past.
// Windows slide at full width while the crossing parameter sits on an edge
// (the touching ray can lie well outside the initial window) and shrink once
// it is interior. The scan floor stays pinned just below the coarse bracket.
inline CutSearch refine_cut(const Frame2& f, const Vec2& base, const FrontFamily& fam,
                            int i0, const CoarseHit& hit, double t_hi, int nt,
                            double tol) {
    const FamilyRay& ours = fam.rays[i0];
    const FamilyRay& pr = fam.rays[hit.partner];
    double spacing =
        fam.rays.size() > 1
            ? std::fabs(fam.rays[1].param - fam.rays[0].param)
            : 1.0;
    double p_lo = pr.param - 2 * spacing, p_hi = pr.param + 2 * spacing;
    const double t_floor = std::max(0.0, t_hi * (hit.k_lo - 1) / nt);
    double t_lo = t_floor;
    SelfGuard guard;
    if (pr.arc == ours.arc && hit.offset.x == 0 && hit.offset.y == 0) {
        guard.lo = ours.param - spacing;
        guard.hi = ours.param + spacing;
        guard.period = fam.closed ? 2 * M_PI : 0;
    }
    CutSearch out;
    int slides = 0;
    for (int round = 0; round < 30; ++round) {
        PartnerWindow w =
            sample_partner(f, base, pr.arc, p_lo, p_hi, 17, hit.offset, t_hi, tol);
        // Scan for a side-sign flip and bisect it. A flip where the query
        // point touches the partner polyline is a crossing; a flip at the
        // window edge with the polyline out of reach means the crossing ray
        // lies beyond the window, so the window slides toward it; any other
        // flip is a chord-line artifact and is scanned past.
        const int m_t = 64;
        const double width = p_hi - p_lo;
        auto near_edge = [&](double s) {
            return s <= p_lo + 0.1 * width || s >= p_hi - 0.1 * width;
        };
        double prev_t = t_lo;
        SideProbe prev = partner_side(w, ours.geo.point_at(prev_t), prev_t, guard);
        std::optional<double> t_cut;
        std::optional<double> slide_to;
        SideProbe at;
        for (int k = 1; k <= m_t && !t_cut; ++k) {
            double t = std::min(t_lo + (t_hi - t_lo) * k / m_t, ours.tcap);
            SideProbe cur = partner_side(w, ours.geo.point_at(t), t, guard);
            if (prev.sign != 0 && cur.sign != 0 && cur.sign != prev.sign) {
                double lo = prev_t, hi = t;
                int lo_sign = prev.sign;
                while (hi - lo > 1e-8) {
                    double mid = 0.5 * (lo + hi);
                    SideProbe sp = partner_side(w, ours.geo.point_at(mid), mid, guard);
                    if (sp.sign == lo_sign || sp.sign == 0) lo = mid;
                    else hi = mid;
                }
                double tc = 0.5 * (lo + hi);
                SideProbe sp = partner_side(w, ours.geo.point_at(tc), tc, guard);
                if (sp.sign != 0 && sp.dist <= std::max(2 * sp.chord, 1e-6)) {
                    t_cut = tc;
                    at = sp;
                } else if (sp.sign != 0 && near_edge(sp.s_near) && !slide_to) {
                    slide_to = sp.s_near;
                }
            }
            prev_t = t;
            prev = cur;
            if (t >= ours.tcap) break;
        }
        if (!t_cut) {
            if (slide_to && ++slides <= 16) {
                p_lo = *slide_to - 0.5 * width;
                p_hi = *slide_to + 0.5 * width;
                continue;
            }
            out.t.reset(); // chord artifact, no true crossing here
            return out;
        }
        out.t = *t_cut;
        out.partner_param = at.s_near;
        if (near_edge(at.s_near)) {
            if (++slides > 16) {
                out.t.reset();
                return out;
            }
            p_lo = at.s_near - 0.5 * width; // slide, keep resolution
            p_hi = at.s_near + 0.5 * width;
            continue;
        }
        if (at.chord * at.chord < 1e-8) return out;
        p_lo = at.s_near - 0.125 * width;
        p_hi = at.s_near + 0.125 * width;
        t_lo = std::max(t_floor, *t_cut - 0.1 * (t_hi - t_floor));
    }
    return out;
}

} // namespace loci_detail

struct CutOptions {
    int n_ellipse = 720;
    int n_line = 600;
    double a_max = 50.0;
    int nt = 32;
    double tol = 1e-10;
};

namespace loci_detail {

// Shared-family cut search for one query ray. The conjugate time caps both
// the scan horizon and the returned value; a fold without any transversal
// front crossing ends optimality at the conjugate point itself.
inline std::optional<double> cut_time_in_family(const Frame2& f, const Vec2& q,
                                                const FrontFamily& fam, int i0,
                                                double theta, double tmax,
                                                const CutOptions& opt) {
    auto conj = conjugate_scan(f, q, theta, tmax, opt.tol);
    double t_hi = conj.t ? std::min(tmax, *conj.t) : tmax;
    t_hi = std::min(t_hi, fam.rays[i0].tcap);
    auto offsets = cover_offsets(f.chart());
    auto hits = coarse_front_hits(fam, i0, offsets, t_hi, opt.nt);
    std::optional<double> best;
    int tried = 0;
    for (const CoarseHit& hit : hits) {
        if (tried++ >= 6) break;
        CutSearch cs = refine_cut(f, q, fam, i0, hit, t_hi, opt.nt, opt.tol);
        if (cs.t && (!best || *cs.t < *best)) best = *cs.t;
    }
    if (best) return conj.t ? std::min(*best, *conj.t) : *best;
    if (conj.t && *conj.t <= tmax) return *conj.t;
    return std::nullopt;
}

} // namespace loci_detail

inline std::optional<double> cut_time(const Frame2& f, const Vec2& q, double theta,
                                      double tmax, const CutOptions& opt = {}) {
    if (tmax <= 0) throw input_error("cut search needs tmax > 0");
    using namespace loci_detail;
    Vec2 Xv = f.X().value(q), Yv = f.Y().value(q);
    bool on_z = rank_2xn({Xv, Yv}) < 2;
    std::vector<double> grid;
    if (on_z) {
        grid.resize(opt.n_line);
        for (int k = 0; k < opt.n_line; ++k)
            grid[k] = -opt.a_max + 2 * opt.a_max * k / (opt.n_line - 1.0);
    } else {
        grid.resize(opt.n_ellipse);
        for (int k = 0; k < opt.n_ellipse; ++k)
            grid[k] = theta + 2 * M_PI * k / opt.n_ellipse;
    }
    FrontFamily fam = build_front_family(f, q, std::move(grid), {theta}, tmax, opt.tol);
    return cut_time_in_family(f, q, fam, fam.index_of(theta), theta, tmax, opt);
}

inline std::vector<LocusPoint> cut_locus(const Frame2& f, const Vec2& q,
                                         const std::vector<double>& theta_grid,
                                         double tmax, const CutOptions& opt = {}) {
    if (tmax <= 0) throw input_error("cut search needs tmax > 0");
    using namespace loci_detail;
    FrontFamily fam = build_front_family(f, q, theta_grid, {}, tmax, opt.tol);
    std::vector<std::optional<LocusPoint>> slots(theta_grid.size());
    parallel_for(theta_grid.size(), [&](std::size_t k) {
        int i0 = fam.index_of(theta_grid[k]);
        if (i0 < 0) return;
        if (auto t = cut_time_in_family(f, q, fam, i0, theta_grid[k], tmax, opt))
            slots[k] = LocusPoint{theta_grid[k], *t, fam.rays[i0].geo.point_at(
                                                         std::min(*t, fam.rays[i0].tcap)),
                                  LocusKind::Cut};
    });
    std::vector<LocusPoint> out;
    for (const auto& s : slots)
        if (s) out.push_back(*s);
    return out;
}

} // namespace arsgeo
