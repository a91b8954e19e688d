#pragma once

// Tracing of Z = {frame_det = 0} by marching squares with bisection, plus the
// genericity report.
//
// Sign-change crossings are refined by bisection. Zeros the determinant only
// touches (no sign change, e.g. det = 1-cos x) are caught by a golden-section
// scan of |det| along each edge; a refined minimum below 1e-10 counts as a
// crossing. Cell edges lying entirely on Z contribute themselves as segments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "classify.hpp"
#include "frame.hpp"

namespace arsgeo {

struct Polyline {
    std::vector<Vec2> pts;
    bool closed = false;
};

namespace locus_detail {

constexpr double kOnLocusTol = 1e-10;

inline double edge_bisect(const Frame2& f, Vec2 a, Vec2 b, double fa) {
    // Signs differ (zero counts as positive). Returns parameter in [0,1].
    // Runs to parameter convergence: a determinant floor would stop short of
    // roots the curve only grazes (quadratic zeros at cell corners).
    double ta = 0, tb = 1;
    auto sgn = [](double v) { return v < 0 ? -1 : 1; };
    int sa = sgn(fa);
    for (int it = 0; it < 60 && tb - ta > 1e-17; ++it) {
        double tm = 0.5 * (ta + tb);
        Vec2 m = a + (b - a) * tm;
        if (sgn(f.det(m)) == sa) ta = tm;
        else tb = tm;
    }
    return 0.5 * (ta + tb);
}

inline double golden_min_abs(const Frame2& f, const Vec2& a, const Vec2& b,
                             double t0, double t1) {
    // Golden-section minimum of |det| along the segment, parameter in [t0,t1].
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = t0, hi = t1;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    auto val = [&](double t) { Vec2 p = a + (b - a) * t; return std::fabs(f.det(p)); };
    double fc = val(c), fd = val(d);
    for (int it = 0; it < 90 && hi - lo > 1e-14; ++it) {
        if (fc < fd) { hi = d; d = c; fd = fc; c = hi - gr * (hi - lo); fc = val(c); }
        else { lo = c; c = d; fc = fd; d = lo + gr * (hi - lo); fd = val(d); }
    }
    return 0.5 * (lo + hi);
}

// Crossing point on an edge, or none.
inline std::optional<Vec2> edge_crossing(const Frame2& f, const Vec2& a, const Vec2& b,
                                         double fa, double fb) {
    auto sgn = [](double v) { return v < 0 ? -1 : 1; };
    if (std::fabs(fa) < kOnLocusTol && std::fabs(fb) < kOnLocusTol)
        return std::nullopt; // whole edge on Z; handled by the caller
    if (sgn(fa) != sgn(fb)) {
        double t = edge_bisect(f, a, b, fa);
        return a + (b - a) * t;
    }
    // Touch-zero scan: coarse samples, then golden-section refinement.
    int best = -1;
    double best_val = std::min(std::fabs(fa), std::fabs(fb));
    const int ns = 8;
    for (int i = 1; i < ns; ++i) {
        double t = double(i) / ns;
        double v = std::fabs(f.det(a + (b - a) * t));
        if (v < best_val) { best_val = v; best = i; }
    }
    if (best < 0) {
        // Minimum sits at an endpoint.
        if (std::fabs(fa) < kOnLocusTol) return a;
        if (std::fabs(fb) < kOnLocusTol) return b;
        return std::nullopt;
    }
    double t = golden_min_abs(f, a, b, double(best - 1) / ns, double(best + 1) / ns);
    Vec2 p = a + (b - a) * t;
    if (std::fabs(f.det(p)) < kOnLocusTol) return p;
    return std::nullopt;
}

struct PointKey {
    std::int64_t kx, ky;
    bool operator<(const PointKey& o) const {
        return kx != o.kx ? kx < o.kx : ky < o.ky;
    }
};

} // namespace locus_detail

inline std::vector<Polyline> trace_singular_locus(const Frame2& f, int grid_n) {
    using namespace locus_detail;
    if (grid_n < 2) throw input_error("singular locus grid must have at least 2 cells per axis");
    const Chart& ch = f.chart();
    const int nx = grid_n, ny = grid_n;
    const double hx = ch.width() / nx, hy = ch.height() / ny;

    std::vector<double> det((nx + 1) * (ny + 1));
    auto node = [&](int i, int j) { return Vec2{ch.x0 + i * hx, ch.y0 + j * hy}; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            det[j * (nx + 1) + i] = f.det(node(i, j));

    // Quantized keys identify shared endpoints; periodic axes wrap first.
    const double qstep = 1e-9 * std::max(ch.width(), ch.height());
    auto key_of = [&](Vec2 p) {
        if (ch.periodic_x()) {
            p.x = std::fmod(p.x - ch.x0, ch.width());
            if (p.x < 0) p.x += ch.width();
            if (ch.width() - p.x < 0.5 * qstep) p.x = 0;
            p.x += ch.x0;
        }
        if (ch.periodic_y()) {
            p.y = std::fmod(p.y - ch.y0, ch.height());
            if (p.y < 0) p.y += ch.height();
            if (ch.height() - p.y < 0.5 * qstep) p.y = 0;
            p.y += ch.y0;
        }
        return PointKey{std::llround(p.x / qstep), std::llround(p.y / qstep)};
    };

    struct Seg { Vec2 a, b; };
    std::vector<Seg> segs;
    std::map<std::pair<PointKey, PointKey>, int> seen;
    auto add_seg = [&](const Vec2& a, const Vec2& b) {
        PointKey ka = key_of(a), kb = key_of(b);
        if (!(ka < kb) && !(kb < ka)) return; // degenerate
        auto key = ka < kb ? std::make_pair(ka, kb) : std::make_pair(kb, ka);
        if (seen.emplace(key, 1).second) segs.push_back({a, b});
    };

    // Edges fully on Z become segments directly.
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            double f00 = det[j * (nx + 1) + i];
            if (i < nx) {
                double f10 = det[j * (nx + 1) + i + 1];
                if (std::fabs(f00) < kOnLocusTol && std::fabs(f10) < kOnLocusTol)
                    add_seg(node(i, j), node(i + 1, j));
            }
            if (j < ny) {
                double f01 = det[(j + 1) * (nx + 1) + i];
                if (std::fabs(f00) < kOnLocusTol && std::fabs(f01) < kOnLocusTol)
                    add_seg(node(i, j), node(i, j + 1));
            }
        }

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            Vec2 p00 = node(i, j), p10 = node(i + 1, j), p01 = node(i, j + 1), p11 = node(i + 1, j + 1);
            double f00 = det[j * (nx + 1) + i], f10 = det[j * (nx + 1) + i + 1];
            double f01 = det[(j + 1) * (nx + 1) + i], f11 = det[(j + 1) * (nx + 1) + i + 1];

            std::vector<Vec2> hits;
            std::vector<int> which; // 0=bottom 1=right 2=top 3=left
            auto try_edge = [&](const Vec2& a, const Vec2& b, double fa, double fb, int id) {
                if (auto c = edge_crossing(f, a, b, fa, fb)) { hits.push_back(*c); which.push_back(id); }
            };
            try_edge(p00, p10, f00, f10, 0);
            try_edge(p10, p11, f10, f11, 1);
            try_edge(p01, p11, f01, f11, 2);
            try_edge(p00, p01, f00, f01, 3);

            if (hits.size() == 2) {
                add_seg(hits[0], hits[1]);
            } else if (hits.size() == 4) {
                // Saddle: pair so the center's sign side stays connected.
                double fc = f.det(Vec2{0.5 * (p00.x + p10.x), 0.5 * (p00.y + p01.y)});
                bool center_pos = !(fc < 0);
                bool corner_pos = !(f00 < 0);
                if (center_pos == corner_pos) {
                    add_seg(hits[0], hits[1]); // bottom-right
                    add_seg(hits[2], hits[3]); // top-left
                } else {
                    add_seg(hits[0], hits[3]); // bottom-left
                    add_seg(hits[1], hits[2]); // top-right
                }
            } else if (hits.size() == 3) {
                // A touch crossing collapsed onto a corner: connect through it.
                add_seg(hits[0], hits[1]);
                add_seg(hits[1], hits[2]);
            }
        }

    // Chain segments into polylines by shared quantized endpoints.
    std::map<PointKey, std::vector<int>> at;
    for (size_t k = 0; k < segs.size(); ++k) {
        at[key_of(segs[k].a)].push_back(int(k));
        at[key_of(segs[k].b)].push_back(int(k));
    }
    std::vector<bool> used(segs.size(), false);
    std::vector<Polyline> out;

    auto walk = [&](int start, bool from_a) {
        Polyline pl;
        int cur = start;
        Vec2 head = from_a ? segs[cur].a : segs[cur].b;
        Vec2 tail = from_a ? segs[cur].b : segs[cur].a;
        pl.pts.push_back(head);
        pl.pts.push_back(tail);
        used[cur] = true;
        for (;;) {
            PointKey k = key_of(pl.pts.back());
            int next = -1;
            for (int cand : at[k])
                if (!used[cand]) { next = cand; break; }
            if (next < 0) break;
            used[next] = true;
            PointKey ka = key_of(segs[next].a);
            pl.pts.push_back((!(ka < k) && !(k < ka)) ? segs[next].b : segs[next].a);
        }
        PointKey first = key_of(pl.pts.front()), last = key_of(pl.pts.back());
        pl.closed = pl.pts.size() > 2 && !(first < last) && !(last < first);
        return pl;
    };

    // Open chains first (their ends have degree 1), then leftover loops.
    for (size_t k = 0; k < segs.size(); ++k) {
        if (used[k]) continue;
        bool enda_open = at[key_of(segs[k].a)].size() == 1;
        bool endb_open = at[key_of(segs[k].b)].size() == 1;
        if (enda_open || endb_open) out.push_back(walk(int(k), enda_open));
    }
    for (size_t k = 0; k < segs.size(); ++k)
        if (!used[k]) out.push_back(walk(int(k), true));

    std::sort(out.begin(), out.end(), [](const Polyline& a, const Polyline& b) {
        if (a.pts.front().x != b.pts.front().x) return a.pts.front().x < b.pts.front().x;
        return a.pts.front().y < b.pts.front().y;
    });
    return out;
}

struct GenericityReport {
    bool nondegenerate_locus = true;   // (i)  |grad det| > 1e-6 on traced Z
    bool isolated_tangencies = true;   // (ii) tangency candidates isolated at grid resolution
    bool full_flag = true;             // (iii) dim Delta_3 = 2 on the whole grid
    std::vector<Vec2> tangency_points;
    std::vector<Polyline> locus;

    bool generic() const { return nondegenerate_locus && isolated_tangencies && full_flag; }
};

inline GenericityReport genericity_check(const Frame2& f, int grid_n) {
    GenericityReport rep;
    rep.locus = trace_singular_locus(f, grid_n);
    const Chart& ch = f.chart();
    const double grid_res = std::hypot(ch.width() / grid_n, ch.height() / grid_n);

    for (const Polyline& pl : rep.locus)
        for (const Vec2& p : pl.pts)
            if (f.det_gradient(p).norm() <= 1e-6) rep.nondegenerate_locus = false;

    // Tangency scalar along Z: T = det[G, [X,Y]] with G the frame field of
    // larger magnitude on this polyline (it spans Delta on Z). T also
    // vanishes where G itself does, so zeros only locate candidates and the
    // flag classification confirms them.
    const VectorField2& B = f.bracket();
    auto is_tangency = [&](const Vec2& q) {
        return classify_point(f, q).kind == PointKind::Tangency;
    };
    for (const Polyline& pl : rep.locus) {
        if (pl.pts.size() < 2) continue;
        double minX = 1e300, minY = 1e300;
        for (const Vec2& p : pl.pts) {
            minX = std::min(minX, f.X().value(p).norm());
            minY = std::min(minY, f.Y().value(p).norm());
        }
        const VectorField2& G = minX >= minY ? f.X() : f.Y();
        ScalarExpr Texpr = G.u() * B.v() - G.v() * B.u();
        ScalarExpr Tx = Texpr.diff(Var::X), Ty = Texpr.diff(Var::Y);

        std::vector<double> T(pl.pts.size());
        double tscale = 0;
        for (size_t k = 0; k < pl.pts.size(); ++k) {
            T[k] = Texpr.eval(pl.pts[k].x, pl.pts[k].y);
            tscale = std::max(tscale, std::fabs(T[k]));
        }
        const double plateau_tol = 1e-9 * (tscale + 1.0);

        int consecutive_small = 0;
        for (size_t k = 0; k < pl.pts.size(); ++k) {
            if (std::fabs(T[k]) < plateau_tol) {
                if (++consecutive_small >= 2) rep.isolated_tangencies = false;
                if (consecutive_small == 1 && k > 0 && k + 1 < pl.pts.size() &&
                    is_tangency(pl.pts[k]))
                    rep.tangency_points.push_back(pl.pts[k]);
                continue;
            }
            consecutive_small = 0;
            if (k + 1 < pl.pts.size() && std::fabs(T[k + 1]) >= plateau_tol &&
                ((T[k] < 0) != (T[k + 1] < 0))) {
                // Linear estimate, then Newton on {det = 0, T = 0}.
                double w = T[k] / (T[k] - T[k + 1]);
                Vec2 q = pl.pts[k] + (pl.pts[k + 1] - pl.pts[k]) * w;
                for (int it = 0; it < 30; ++it) {
                    Vec2 F{f.det(q), Texpr.eval(q.x, q.y)};
                    if (std::fabs(F.x) + std::fabs(F.y) < 1e-13) break;
                    Vec2 gd = f.det_gradient(q);
                    Mat2 J{gd.x, gd.y, Tx.eval(q.x, q.y), Ty.eval(q.x, q.y)};
                    if (std::fabs(J.det()) < 1e-14) break;
                    Vec2 step = solve2(J, F);
                    q = q - step;
                    if (step.norm() < 1e-14) break;
                }
                if (is_tangency(q)) rep.tangency_points.push_back(q);
            }
        }
    }

    for (size_t a = 0; a < rep.tangency_points.size(); ++a)
        for (size_t b = a + 1; b < rep.tangency_points.size(); ++b)
            if ((rep.tangency_points[a] - rep.tangency_points[b]).norm() < grid_res)
                rep.isolated_tangencies = false;

    for (int j = 0; j <= grid_n && rep.full_flag; ++j)
        for (int i = 0; i <= grid_n; ++i) {
            Vec2 q{ch.x0 + i * ch.width() / grid_n, ch.y0 + j * ch.height() / grid_n};
            if (classify_point(f, q).dims[2] != 2) { rep.full_flag = false; break; }
        }

    return rep;
}

} // namespace arsgeo
