#pragma once

// Vector fields on a chart with symbolic components; first and second
// derivatives are differentiated once at construction and cached.

#include "expr.hpp"
#include "geometry.hpp"

namespace arsgeo {

class VectorField2 {
public:
    VectorField2() : VectorField2(ScalarExpr::constant(0), ScalarExpr::constant(0)) {}

    VectorField2(ScalarExpr u, ScalarExpr v) : u_(std::move(u)), v_(std::move(v)) {
        ux_ = u_.diff(Var::X); uy_ = u_.diff(Var::Y);
        vx_ = v_.diff(Var::X); vy_ = v_.diff(Var::Y);
        uxx_ = ux_.diff(Var::X); uxy_ = ux_.diff(Var::Y); uyy_ = uy_.diff(Var::Y);
        vxx_ = vx_.diff(Var::X); vxy_ = vx_.diff(Var::Y); vyy_ = vy_.diff(Var::Y);
    }

    static VectorField2 parse(const std::string& u, const std::string& v) {
        return VectorField2(parse_expr(u), parse_expr(v));
    }

    const ScalarExpr& u() const { return u_; }
    const ScalarExpr& v() const { return v_; }

    Vec2 value(const Vec2& q) const { return {u_.eval(q.x, q.y), v_.eval(q.x, q.y)}; }

    // Rows are component gradients: J = [du/dx du/dy; dv/dx dv/dy].
    Mat2 jacobian(const Vec2& q) const {
        return {ux_.eval(q.x, q.y), uy_.eval(q.x, q.y),
                vx_.eval(q.x, q.y), vy_.eval(q.x, q.y)};
    }

    Mat2 hessian_u(const Vec2& q) const {
        double xy = uxy_.eval(q.x, q.y);
        return {uxx_.eval(q.x, q.y), xy, xy, uyy_.eval(q.x, q.y)};
    }

    Mat2 hessian_v(const Vec2& q) const {
        double xy = vxy_.eval(q.x, q.y);
        return {vxx_.eval(q.x, q.y), xy, xy, vyy_.eval(q.x, q.y)};
    }

private:
    ScalarExpr u_, v_;
    ScalarExpr ux_, uy_, vx_, vy_;
    ScalarExpr uxx_, uxy_, uyy_, vxx_, vxy_, vyy_;
};

// [V, W] = (DW) V - (DV) W.
inline Vec2 lie_bracket(const VectorField2& V, const VectorField2& W, const Vec2& q) {
    return W.jacobian(q) * V.value(q) - V.jacobian(q) * W.value(q);
}

// Same bracket as a symbolic field, for iterated brackets.
inline VectorField2 bracket_field(const VectorField2& V, const VectorField2& W) {
    ScalarExpr bu = V.u() * W.u().diff(Var::X) + V.v() * W.u().diff(Var::Y)
                  - W.u() * V.u().diff(Var::X) - W.v() * V.u().diff(Var::Y);
    ScalarExpr bv = V.u() * W.v().diff(Var::X) + V.v() * W.v().diff(Var::Y)
                  - W.u() * V.v().diff(Var::X) - W.v() * V.v().diff(Var::Y);
    return VectorField2(bu, bv);
}

} // namespace arsgeo
