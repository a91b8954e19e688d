#pragma once

// Multi-chart structures: frame atlases with overlap data, validation, and
// the orientability decision.

#include <cmath>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "frame.hpp"
#include "geometry.hpp"

namespace arsgeo {

struct OverlapComponent {
    std::vector<Vec2> samples; // shared coordinates, valid in both charts
};

struct Overlap {
    int chart_i = 0;
    int chart_j = 0;
    std::vector<OverlapComponent> components;
};

struct AtlasMetadata {
    std::optional<int> chi_plus;
    std::optional<int> chi_minus;
    std::optional<double> expected_gauss_bonnet;
    std::optional<bool> orientable;
    std::optional<bool> trivializable;
    bool has_tangency = false;
    bool distribution_only = false; // no shared metric; orientability fixtures
    std::string notes;
};

class ARS2 {
  public:
    ARS2(std::vector<Frame2> frames, std::vector<Overlap> overlaps, AtlasMetadata meta)
        : frames_(std::move(frames)), overlaps_(std::move(overlaps)), meta_(std::move(meta)) {
        if (frames_.empty()) throw input_error("atlas needs at least one chart");
        validate();
    }

    const std::vector<Frame2>& frames() const { return frames_; }
    const std::vector<Overlap>& overlaps() const { return overlaps_; }
    const AtlasMetadata& metadata() const { return meta_; }

  private:
    void validate() const {
        for (const Frame2& f : frames_) {
            validate_chart_identifications(f);
            validate_field_finiteness(f);
        }
        for (const Overlap& ov : overlaps_) {
            if (ov.chart_i < 0 || ov.chart_i >= int(frames_.size()) ||
                ov.chart_j < 0 || ov.chart_j >= int(frames_.size()))
                throw input_error("overlap references a chart outside the atlas");
            for (const OverlapComponent& comp : ov.components) {
                if (comp.samples.empty())
                    throw input_error("overlap component has no sample points");
                for (const Vec2& q : comp.samples) {
                    const Frame2& fi = frames_[ov.chart_i];
                    const Frame2& fj = frames_[ov.chart_j];
                    if (!fi.chart().contains(fi.chart().wrap(q)) ||
                        !fj.chart().contains(fj.chart().wrap(q)))
                        throw input_error("overlap sample outside a chart domain");
                    if (!meta_.distribution_only) check_orthogonal_transition(fi, fj, q);
                }
            }
        }
    }

    // Frames descend to the quotient: values match across identified edges.
    // A Flip axis reflects the other coordinate and negates its vector
    // component (the differential of (x,y) -> (x, y0+y1-y)).
    void validate_chart_identifications(const Frame2& f) const {
        const Chart& ch = f.chart();
        const int ns = 32;
        auto check_pair = [&](Vec2 a, Vec2 b, bool flip_x, bool flip_y) {
            for (const VectorField2* V : {&f.X(), &f.Y()}) {
                Vec2 va = V->value(a), vb = V->value(b);
                if (flip_x) vb.x = -vb.x;
                if (flip_y) vb.y = -vb.y;
                if (std::fabs(va.x - vb.x) > 1e-10 || std::fabs(va.y - vb.y) > 1e-10)
                    throw input_error("frame does not match across identified edge of chart '" +
                                      ch.name + "'");
            }
        };
        if (ch.ident_x != AxisIdent::None) {
            bool flip = ch.ident_x == AxisIdent::Flip;
            for (int k = 0; k < ns; ++k) {
                double y = ch.y0 + ch.height() * (k + 0.5) / ns;
                double yb = flip ? ch.y0 + ch.y1 - y : y;
                check_pair(Vec2{ch.x0, y}, Vec2{ch.x1, yb}, false, flip);
            }
        }
        if (ch.ident_y != AxisIdent::None) {
            bool flip = ch.ident_y == AxisIdent::Flip;
            for (int k = 0; k < ns; ++k) {
                double x = ch.x0 + ch.width() * (k + 0.5) / ns;
                double xb = flip ? ch.x0 + ch.x1 - x : x;
                check_pair(Vec2{x, ch.y0}, Vec2{xb, ch.y1}, flip, false);
            }
        }
    }

    void validate_field_finiteness(const Frame2& f) const {
        const Chart& ch = f.chart();
        const int ns = 16;
        for (int j = 0; j <= ns; ++j)
            for (int i = 0; i <= ns; ++i) {
                Vec2 q{ch.x0 + ch.width() * i / ns, ch.y0 + ch.height() * j / ns};
                for (const VectorField2* V : {&f.X(), &f.Y()}) {
                    Vec2 val = V->value(q); // eval throws on non-finite results
                    Mat2 J = V->jacobian(q);
                    Mat2 Hu = V->hessian_u(q), Hv = V->hessian_v(q);
                    double m = std::fabs(val.x) + J.max_abs() + Hu.max_abs() + Hv.max_abs();
                    if (!std::isfinite(m))
                        throw input_error("vector field not finite on chart '" + ch.name + "'");
                }
            }
    }

    static void check_orthogonal_transition(const Frame2& fi, const Frame2& fj, const Vec2& q) {
        Mat2 Fi = fi.frame_matrix(fi.chart().wrap(q));
        Mat2 Fj = fj.frame_matrix(fj.chart().wrap(q));
        if (rank_2xn({Fi.col(0), Fi.col(1)}) < 2 || rank_2xn({Fj.col(0), Fj.col(1)}) < 2)
            return; // orthogonality only defined where both frames span
        Mat2 R = Fj.inverse() * Fi;
        Mat2 defect = R.transpose() * R - Mat2::identity();
        if (defect.max_abs() > 1e-8)
            throw input_error("change of frame is not orthogonal on overlap sample");
    }

    std::vector<Frame2> frames_;
    std::vector<Overlap> overlaps_;
    AtlasMetadata meta_;
};

// Sign parity over the overlap graph. Charts are nodes; each overlap
// component contributes one edge carrying the sign of the change-of-frame
// determinant at its first rank-2 sample. Orientable iff every connected
// component admits a consistent +-1 chart labeling.
inline bool orientability_check(const ARS2& a) {
    const auto& frames = a.frames();
    if (frames.size() == 1) return true; // trivializable

    struct Edge { int to; int sign; };
    std::vector<std::vector<Edge>> adj(frames.size());
    for (const Overlap& ov : a.overlaps()) {
        const Frame2& fi = frames[ov.chart_i];
        const Frame2& fj = frames[ov.chart_j];
        for (const OverlapComponent& comp : ov.components) {
            int sign = 0;
            for (const Vec2& q : comp.samples) {
                double di = fi.det(fi.chart().wrap(q));
                double dj = fj.det(fj.chart().wrap(q));
                if (std::fabs(di) > 1e-12 && std::fabs(dj) > 1e-12) {
                    sign = (di > 0) == (dj > 0) ? 1 : -1;
                    break;
                }
            }
            if (sign == 0)
                throw input_error("overlap component has no sample where both frames have rank 2");
            adj[ov.chart_i].push_back({ov.chart_j, sign});
            adj[ov.chart_j].push_back({ov.chart_i, sign});
        }
    }

    std::vector<int> label(frames.size(), 0);
    for (size_t start = 0; start < frames.size(); ++start) {
        if (label[start] != 0) continue;
        label[start] = 1;
        std::queue<int> bfs;
        bfs.push(int(start));
        while (!bfs.empty()) {
            int u = bfs.front();
            bfs.pop();
            for (const Edge& e : adj[u]) {
                int want = label[u] * e.sign;
                if (label[e.to] == 0) {
                    label[e.to] = want;
                    bfs.push(e.to);
                } else if (label[e.to] != want) {
                    return false; // odd sign cycle
                }
            }
        }
    }
    return true;
}

} // namespace arsgeo
