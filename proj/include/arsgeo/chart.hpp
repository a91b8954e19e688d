#pragma once

// Chart rectangles with optional torus/Klein edge identifications and an
// optional 3-space embedding.

#include <array>
#include <optional>
#include <string>

#include "expr.hpp"
#include "geometry.hpp"

namespace arsgeo {

// How the two edges of one axis are identified.
//   None:     plain boundary.
//   Periodic: (x0, y) ~ (x1, y).
//   Flip:     (x0, y) ~ (x1, -y) around the other axis' midpoint (Klein).
enum class AxisIdent { None, Periodic, Flip };

struct Chart {
    std::string name = "chart";
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    AxisIdent ident_x = AxisIdent::None;
    AxisIdent ident_y = AxisIdent::None;
    std::optional<std::array<ScalarExpr, 3>> embedding;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }

    bool degenerate() const { return !(x0 < x1) || !(y0 < y1); }

    bool periodic_x() const { return ident_x != AxisIdent::None; }
    bool periodic_y() const { return ident_y != AxisIdent::None; }

    bool contains(const Vec2& q, double tol = 1e-12) const {
        bool in_x = periodic_x() || (q.x >= x0 - tol && q.x <= x1 + tol);
        bool in_y = periodic_y() || (q.y >= y0 - tol && q.y <= y1 + tol);
        return in_x && in_y;
    }

    // Reduce a point into the rectangle along identified axes. Flip axes also
    // reflect the transverse coordinate; callers tracking vectors across a
    // Flip edge must apply the corresponding sign themselves.
    Vec2 wrap(Vec2 q) const {
        if (periodic_x()) {
            double w = width();
            double k = std::floor((q.x - x0) / w);
            q.x -= k * w;
            if (ident_x == AxisIdent::Flip && std::fmod(std::fabs(k), 2.0) == 1.0)
                q.y = y0 + y1 - q.y;
        }
        if (periodic_y()) {
            double h = height();
            double k = std::floor((q.y - y0) / h);
            q.y -= k * h;
            if (ident_y == AxisIdent::Flip && std::fmod(std::fabs(k), 2.0) == 1.0)
                q.x = x0 + x1 - q.x;
        }
        return q;
    }
};

} // namespace arsgeo
