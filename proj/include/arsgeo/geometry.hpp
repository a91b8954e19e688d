#pragma once

// Small fixed-size linear algebra used throughout: 2-vectors, 2x2 matrices,
// singular values of 2xN blocks, pairwise summation.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "errors.hpp"

namespace arsgeo {

struct Vec2 {
    double x = 0, y = 0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    // +pi/2 rotation in chart coordinates
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

// Row-major 2x2.
struct Mat2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

    Mat2() = default;
    Mat2(double m11, double m12, double m21, double m22)
        : a11(m11), a12(m12), a21(m21), a22(m22) {}

    static Mat2 identity() { return {1, 0, 0, 1}; }
    static Mat2 from_columns(const Vec2& c1, const Vec2& c2) {
        return {c1.x, c2.x, c1.y, c2.y};
    }

    Vec2 col(int i) const { return i == 0 ? Vec2{a11, a21} : Vec2{a12, a22}; }
    double det() const { return a11 * a22 - a12 * a21; }
    Mat2 transpose() const { return {a11, a21, a12, a22}; }

    Vec2 operator*(const Vec2& v) const {
        return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
    }
    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Mat2 operator+(const Mat2& o) const {
        return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
    }
    Mat2 operator-(const Mat2& o) const {
        return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
    }
    Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }

    Mat2 inverse() const {
        double d = det();
        if (d == 0.0) throw numeric_error("singular 2x2 matrix");
        return Mat2{a22, -a12, -a21, a11} * (1.0 / d);
    }

    double max_abs() const {
        return std::max(std::max(std::fabs(a11), std::fabs(a12)),
                        std::max(std::fabs(a21), std::fabs(a22)));
    }
};

inline Vec2 solve2(const Mat2& A, const Vec2& b) {
    double d = A.det();
    if (d == 0.0) throw numeric_error("singular 2x2 solve");
    return {(b.x * A.a22 - A.a12 * b.y) / d, (A.a11 * b.y - b.x * A.a21) / d};
}

// Singular values of the 2xN matrix with the given columns, descending.
// Computed from the eigenvalues of A A^T.
inline std::array<double, 2> singular_values_2xn(const std::vector<Vec2>& cols) {
    double s11 = 0, s12 = 0, s22 = 0;
    for (const Vec2& c : cols) {
        s11 += c.x * c.x;
        s12 += c.x * c.y;
        s22 += c.y * c.y;
    }
    double tr = s11 + s22;
    double disc = std::sqrt(std::max(0.0, (s11 - s22) * (s11 - s22) + 4 * s12 * s12));
    double l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
    return {std::sqrt(std::max(0.0, l1)), std::sqrt(std::max(0.0, l2))};
}

// Rank with the relative threshold sigma > tol_rel * (sigma_max + 1).
inline int rank_2xn(const std::vector<Vec2>& cols, double tol_rel = 1e-9) {
    auto sv = singular_values_2xn(cols);
    double thresh = tol_rel * (sv[0] + 1.0);
    return (sv[0] > thresh ? 1 : 0) + (sv[1] > thresh ? 1 : 0);
}

// Summation with a fixed association order independent of how values were produced.
inline double pairwise_sum(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    std::vector<double> cur(v);
    while (cur.size() > 1) {
        std::vector<double> next((cur.size() + 1) / 2);
        for (size_t i = 0; i + 1 < cur.size(); i += 2) next[i / 2] = cur[i] + cur[i + 1];
        if (cur.size() % 2) next.back() = cur.back();
        cur.swap(next);
    }
    return cur[0];
}

} // namespace arsgeo
