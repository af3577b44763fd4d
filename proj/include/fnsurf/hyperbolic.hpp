#pragma once

#include <array>
#include <cmath>

// Hyperboloid model of the hyperbolic plane: points x with <x,x> = -1, x[2] > 0,
// where <x,y> = x0*y0 + x1*y1 - x2*y2.

namespace fnsurf {

using Vec3 = std::array<double, 3>;

struct Mat3 {
    std::array<double, 9> a{};

    static Mat3 identity() {
        Mat3 m;
        m.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return m;
    }
    double operator()(int r, int c) const { return a[3 * r + c]; }
    double& operator()(int r, int c) { return a[3 * r + c]; }
};

inline double mink(const Vec3& x, const Vec3& y) {
    return x[0] * y[0] + x[1] * y[1] - x[2] * y[2];
}

inline Vec3 operator+(const Vec3& x, const Vec3& y) { return {x[0] + y[0], x[1] + y[1], x[2] + y[2]}; }
inline Vec3 operator-(const Vec3& x, const Vec3& y) { return {x[0] - y[0], x[1] - y[1], x[2] - y[2]}; }
inline Vec3 operator*(double s, const Vec3& x) { return {s * x[0], s * x[1], s * x[2]}; }

inline Vec3 operator*(const Mat3& m, const Vec3& x) {
    return {m.a[0] * x[0] + m.a[1] * x[1] + m.a[2] * x[2],
            m.a[3] * x[0] + m.a[4] * x[1] + m.a[5] * x[2],
            m.a[6] * x[0] + m.a[7] * x[1] + m.a[8] * x[2]};
}

inline Mat3 operator*(const Mat3& p, const Mat3& q) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r.a[3 * i + j] = p.a[3 * i] * q.a[j] + p.a[3 * i + 1] * q.a[3 + j] + p.a[3 * i + 2] * q.a[6 + j];
    return r;
}

inline double det(const Mat3& m) {
    const auto& a = m.a;
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
}

inline Mat3 inverse(const Mat3& m) {
    const auto& a = m.a;
    double d = det(m);
    Mat3 r;
    r.a = {(a[4] * a[8] - a[5] * a[7]) / d, (a[2] * a[7] - a[1] * a[8]) / d, (a[1] * a[5] - a[2] * a[4]) / d,
           (a[5] * a[6] - a[3] * a[8]) / d, (a[0] * a[8] - a[2] * a[6]) / d, (a[2] * a[3] - a[0] * a[5]) / d,
           (a[3] * a[7] - a[4] * a[6]) / d, (a[1] * a[6] - a[0] * a[7]) / d, (a[0] * a[4] - a[1] * a[3]) / d};
    return r;
}

// Matrix whose columns are the given vectors.
inline Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    Mat3 m;
    m.a = {c0[0], c1[0], c2[0], c0[1], c1[1], c2[1], c0[2], c1[2], c2[2]};
    return m;
}

// Stable for nearby points: |x-y|^2 = 4 sinh^2(d/2).
inline double hdist(const Vec3& x, const Vec3& y) {
    Vec3 d = x - y;
    double q = mink(d, d);
    if (q <= 0) return 0.0;
    return 2.0 * std::asinh(0.5 * std::sqrt(q));
}

// Lorentz cross product; for a point x and unit tangent t it is the unit
// tangent obtained by turning t a quarter turn counterclockwise.
inline Vec3 lcross(const Vec3& x, const Vec3& y) {
    return {x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], -(x[0] * y[1] - x[1] * y[0])};
}

inline Vec3 unit_spacelike(const Vec3& v) {
    double n = std::sqrt(mink(v, v));
    return (1.0 / n) * v;
}

// Distance from a point to the geodesic with unit spacelike normal n.
inline double dist_to_line(const Vec3& x, const Vec3& n) { return std::asinh(std::abs(mink(x, n))); }

// Reflection across the geodesic with unit spacelike normal n: x - 2<x,n> n.
inline Mat3 reflection(const Vec3& n) {
    Vec3 jn{n[0], n[1], -n[2]};
    Mat3 r = Mat3::identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.a[3 * i + j] -= 2.0 * n[i] * jn[j];
    return r;
}

// Point at arc length s from x along unit tangent t, and the transported tangent.
inline Vec3 geo_point(const Vec3& x, const Vec3& t, double s) { return std::cosh(s) * x + std::sinh(s) * t; }
inline Vec3 geo_tangent(const Vec3& x, const Vec3& t, double s) { return std::sinh(s) * x + std::cosh(s) * t; }

// Translation length of an orientation-preserving isometry.
inline double translation_length(const Mat3& g) {
    double tr = g.a[0] + g.a[4] + g.a[8];
    double c = 0.5 * (tr - 1.0);
    return c <= 1.0 ? 0.0 : std::acosh(c);
}

}  // namespace fnsurf
