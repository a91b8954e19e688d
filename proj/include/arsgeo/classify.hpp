#pragma once

// Point classification by the growth vector of the flag
//   Delta = span{X, Y}
//   Delta2 = Delta + [Delta, Delta]
//   Delta3 = Delta2 + [Delta, Delta2].
//
// (2,2,2) ordinary, (1,2,2) Grushin, (1,1,2) tangency; anything else is
// reported as NonGeneric.

#include <array>
#include <vector>

#include "frame.hpp"

namespace arsgeo {

enum class PointKind { Ordinary, Grushin, Tangency, NonGeneric };

struct PointClass {
    PointKind kind = PointKind::NonGeneric;
    std::array<int, 3> dims{0, 0, 0};

    const char* name() const {
        switch (kind) {
            case PointKind::Ordinary: return "Ordinary";
            case PointKind::Grushin: return "Grushin";
            case PointKind::Tangency: return "Tangency";
            default: return "NonGeneric";
        }
    }
};

inline PointClass classify_point(const Frame2& f, const Vec2& q, double tol_rel = 1e-9) {
    const Vec2 X = f.X().value(q);
    const Vec2 Y = f.Y().value(q);

    // Brackets up to second order, evaluated from symbolic first derivatives
    // of the bracket field (i.e. second derivatives of the frame).
    const VectorField2& B = f.bracket();
    const Vec2 b = B.value(q);
    const Vec2 xb = lie_bracket(f.X(), B, q);
    const Vec2 yb = lie_bracket(f.Y(), B, q);

    PointClass pc;
    pc.dims[0] = rank_2xn({X, Y}, tol_rel);
    pc.dims[1] = rank_2xn({X, Y, b}, tol_rel);
    pc.dims[2] = rank_2xn({X, Y, b, xb, yb}, tol_rel);

    if (pc.dims[0] == 2) pc.kind = PointKind::Ordinary;
    else if (pc.dims[0] == 1 && pc.dims[1] == 2) pc.kind = PointKind::Grushin;
    else if (pc.dims[0] == 1 && pc.dims[1] == 1 && pc.dims[2] == 2) pc.kind = PointKind::Tangency;
    else pc.kind = PointKind::NonGeneric;
    return pc;
}

} // namespace arsgeo
