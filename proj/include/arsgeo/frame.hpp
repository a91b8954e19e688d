#pragma once

// An orthonormal-by-declaration frame pair (X, Y) on a chart. The singular
// locus is Z = {det[X Y] = 0}; the determinant and its exact gradient are
// kept as expressions.

#include <memory>

#include "chart.hpp"
#include "vector_field.hpp"

namespace arsgeo {

class Frame2 {
public:
    Frame2() = default;

    Frame2(Chart chart, VectorField2 X, VectorField2 Y)
        : chart_(std::move(chart)), X_(std::move(X)), Y_(std::move(Y)) {
        det_ = X_.u() * Y_.v() - X_.v() * Y_.u();
        det_dx_ = det_.diff(Var::X);
        det_dy_ = det_.diff(Var::Y);
        bracket_ = std::make_shared<VectorField2>(bracket_field(X_, Y_));
    }

    const Chart& chart() const { return chart_; }
    const VectorField2& X() const { return X_; }
    const VectorField2& Y() const { return Y_; }

    // [X, Y] as a symbolic field, derived once at construction.
    const VectorField2& bracket() const { return *bracket_; }

    // Columns X(q), Y(q).
    Mat2 frame_matrix(const Vec2& q) const {
        return Mat2::from_columns(X_.value(q), Y_.value(q));
    }

    double det(const Vec2& q) const { return det_.eval(q.x, q.y); }
    Vec2 det_gradient(const Vec2& q) const {
        return {det_dx_.eval(q.x, q.y), det_dy_.eval(q.x, q.y)};
    }
    const ScalarExpr& det_expr() const { return det_; }

private:
    Chart chart_;
    VectorField2 X_, Y_;
    ScalarExpr det_, det_dx_, det_dy_;
    std::shared_ptr<const VectorField2> bracket_;
};

inline double frame_det(const Frame2& f, const Vec2& q) { return f.det(q); }

inline Vec2 lie_bracket(const Frame2& f, const Vec2& q) {
    return lie_bracket(f.X(), f.Y(), q);
}

} // namespace arsgeo
