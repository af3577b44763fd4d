#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hyperbolic.hpp"

namespace fnsurf {

struct GeometryConfig {
    double tolerance = 1e-9;
    std::size_t node_budget = 1u << 20;
};

// Cuffs are indexed 0, 1, 2. Cuff 0 plays the role of the lower boundary of
// a pants in a rooted tree, cuffs 1 and 2 the two upper boundaries.
class PantsShape {
public:
    PantsShape() = default;
    PantsShape(double l0, double l1, double l2) : half_{l0, l1, l2} {
        for (double l : half_)
            if (!(l > 0) || !std::isfinite(l)) throw ArgumentError("half-lengths must be positive and finite");
    }
    double half(int i) const { return half_[static_cast<std::size_t>(i)]; }
    double length(int i) const { return 2.0 * half(i); }
    const std::array<double, 3>& halves() const { return half_; }
    bool operator==(const PantsShape& o) const { return half_ == o.half_; }

private:
    std::array<double, 3> half_{1.0, 1.0, 1.0};
};

struct PantsBounds {
    double delta_minus;
    double delta_plus;
    double Delta_plus;
};

struct BoundaryPoint {
    int cuff = 0;
    double arc_param = 0.0;
};

inline void check_cuff(int c) {
    if (c < 0 || c > 2) throw ArgumentError("cuff index out of range: " + std::to_string(c));
}

inline double seam_length(const PantsShape& s, int i, int j) {
    check_cuff(i);
    check_cuff(j);
    if (i == j) throw ArgumentError("seam_length needs two distinct cuffs");
    int k = 3 - i - j;
    double li = s.half(i), lj = s.half(j), lk = s.half(k);
    double arg = (std::cosh(lk) + std::cosh(li) * std::cosh(lj)) / (std::sinh(li) * std::sinh(lj));
    if (!(arg >= 1.0) || !std::isfinite(arg)) throw GeometryError("degenerate seam argument");
    return std::acosh(arg);
}

inline PantsBounds pants_bounds(double l_minus, double l_plus) {
    if (!(l_minus > 0) || !(l_plus >= l_minus) || !std::isfinite(l_plus))
        throw ArgumentError("pants_bounds needs 0 < l_minus <= l_plus");
    double cp = std::cosh(l_plus), cm = std::cosh(l_minus);
    double sp = std::sinh(l_plus), sm = std::sinh(l_minus);
    PantsBounds b;
    b.delta_minus = std::acosh((cm + cp * cp) / (sp * sp));
    b.delta_plus = std::acosh((cp + cm * cm) / (sm * sm));
    b.Delta_plus = 2.0 * l_plus + 2.0 * b.delta_plus;
    return b;
}

inline double collar_width(double cuff_length) {
    if (!(cuff_length > 0)) throw ArgumentError("collar_width needs a positive length");
    return std::asinh(1.0 / std::sinh(0.5 * cuff_length));
}

inline double half_pants_crossing_bound(double l) {
    if (!(l > 0)) throw ArgumentError("half_pants_crossing_bound needs l > 0");
    return 2.0 * std::acosh(std::sqrt(2.0) * std::cosh(0.5 * l));
}

// Right-angled hexagon walked counterclockwise from V0 = (0,0,1):
// side 0 = cuff 0 (V0->V1), side 1 = seam(0,2), side 2 = cuff 2,
// side 3 = seam(2,1), side 4 = cuff 1, side 5 = seam(1,0).
struct HexagonChart {
    std::array<Vec3, 6> vertices;
    std::array<double, 6> sides;
    std::array<Vec3, 6> start_tangents;  // unit tangent leaving vertex i along side i
    std::array<Vec3, 6> end_tangents;    // unit tangent arriving at vertex i+1 along side i
    double closure_error = 0.0;
};

namespace detail {
// Extended-precision frame walk used only while building charts.
using XVec = std::array<long double, 3>;

inline long double xmink(const XVec& x, const XVec& y) { return x[0] * y[0] + x[1] * y[1] - x[2] * y[2]; }
inline XVec xcomb(long double a, const XVec& x, long double b, const XVec& y) {
    return {a * x[0] + b * y[0], a * x[1] + b * y[1], a * x[2] + b * y[2]};
}
inline XVec xcross(const XVec& x, const XVec& y) {
    return {x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], -(x[0] * y[1] - x[1] * y[0])};
}
// Moves along a side and puts the frame back on the hyperboloid.
inline void xstep(XVec& x, XVec& t, long double s) {
    XVec y = xcomb(std::cosh(s), x, std::sinh(s), t), te = xcomb(std::sinh(s), x, std::cosh(s), t);
    y = xcomb(1 / std::sqrt(-xmink(y, y)), y, 0, y);
    te = xcomb(1, te, xmink(te, y), y);
    te = xcomb(1 / std::sqrt(xmink(te, te)), te, 0, te);
    x = y;
    t = te;
}
inline Vec3 narrow(const XVec& v) {
    return {static_cast<double>(v[0]), static_cast<double>(v[1]), static_cast<double>(v[2])};
}
inline XVec xneg(const XVec& v) { return {-v[0], -v[1], -v[2]}; }
}  // namespace detail

// Sides 0..2 are walked forward from V0 and sides 5..3 backward, so rounding
// grows with half the perimeter only. The walks meet at V3.
inline HexagonChart build_hexagon_chart(const PantsShape& s) {
    using detail::XVec;
    HexagonChart h;
    h.sides = {s.half(0), seam_length(s, 0, 2), s.half(2), seam_length(s, 2, 1), s.half(1), seam_length(s, 1, 0)};
    const XVec v0{0, 0, 1}, t0{1, 0, 0};
    XVec x = v0, t = t0;
    for (int i = 0; i < 3; ++i) {
        h.vertices[i] = detail::narrow(x);
        h.start_tangents[i] = detail::narrow(t);
        detail::xstep(x, t, h.sides[i]);
        h.end_tangents[i] = detail::narrow(t);
        t = detail::xcross(x, t);
    }
    h.vertices[3] = detail::narrow(x);
    h.start_tangents[3] = detail::narrow(t);
    XVec fx = x, ft = t;
    // backward: u is the direction of travel, opposite to the side orientation
    XVec bx = v0, u = detail::xcross(v0, t0);
    for (int i = 5; i >= 3; --i) {
        h.end_tangents[i] = detail::narrow(detail::xneg(u));
        detail::xstep(bx, u, h.sides[i]);
        if (i == 3) {
            XVec d = detail::xcomb(1, bx, -1, fx);
            long double q = detail::xmink(d, d);
            h.closure_error = static_cast<double>(2 * std::asinh(0.5L * std::sqrt(std::max(q, 0.0L))));
            for (int k = 0; k < 3; ++k) h.closure_error += static_cast<double>(std::abs(u[k] + ft[k]));
            break;
        }
        h.vertices[i] = detail::narrow(bx);
        h.start_tangents[i] = detail::narrow(detail::xneg(u));
        u = detail::xcross(bx, detail::xneg(u));
    }
    if (!std::isfinite(h.closure_error) || h.closure_error > 1e-6)
        throw GeometryError("hexagon chart failed to close");
    return h;
}

struct PointDistance {
    double upper = 0.0;
    bool exact = true;
    Mat3 element = Mat3::identity();  // deck element g with d(lift p, g * lift q) = upper
};

// Chart data of one pants. The pants is the quotient of a convex region of
// the plane by the index-two subgroup of the group generated by the
// reflections in the three seam sides of the hexagon.
class PantsGeometry {
public:
    explicit PantsGeometry(const PantsShape& s, GeometryConfig cfg = {}) : shape_(s), cfg_(cfg) {
        chart_ = build_hexagon_chart(s);
        const auto& V = chart_.vertices;
        // seam lines indexed by the opposite cuff
        seam_normal_[1] = lcross(V[1], chart_.start_tangents[1]);
        seam_normal_[0] = lcross(V[3], chart_.start_tangents[3]);
        seam_normal_[2] = lcross(V[5], chart_.start_tangents[5]);
        for (int k = 0; k < 3; ++k) refl_[k] = reflection(seam_normal_[k]);

        origin_[0] = V[0];
        tangent_[0] = chart_.start_tangents[0];
        inward_[0] = lcross(V[0], chart_.start_tangents[0]);
        origin_[2] = V[3];
        tangent_[2] = -1.0 * chart_.end_tangents[2];
        inward_[2] = -1.0 * lcross(origin_[2], tangent_[2]);
        origin_[1] = V[5];
        tangent_[1] = -1.0 * chart_.end_tangents[4];
        inward_[1] = -1.0 * lcross(origin_[1], tangent_[1]);
    }

    const PantsShape& shape() const { return shape_; }
    const HexagonChart& chart() const { return chart_; }
    const GeometryConfig& config() const { return cfg_; }

    // Seam hitting cuff c at arc_param l_c.
    static int far_seam(int c) { return c == 1 ? 0 : 1; }
    // Seam hitting cuff c at arc_param 0.
    static int near_seam(int c) { return c == 2 ? 0 : 2; }

    // Arc parameter on cuff c of the foot of the seam joining c and other.
    double seam_foot(int c, int other) const {
        int k = 3 - c - other;
        return k == near_seam(c) ? 0.0 : shape_.half(c);
    }

    // Point of the lifted cuff geodesic; u is any real, u and u + 2l are
    // lifts of the same boundary point.
    Vec3 cuff_point(int c, double u) const { return geo_point(origin_[c], tangent_[c], u); }
    Vec3 cuff_tangent(int c, double u) const { return geo_tangent(origin_[c], tangent_[c], u); }
    const Vec3& inward_normal(int c) const { return inward_[c]; }

    // Isometry translating the lifted cuff c by its full length.
    Mat3 cuff_translation(int c) const {
        double L = shape_.length(c);
        Mat3 src = from_columns(cuff_point(c, 0), cuff_tangent(c, 0), inward_[c]);
        Mat3 dst = from_columns(cuff_point(c, L), cuff_tangent(c, L), inward_[c]);
        return dst * inverse(src);
    }

    double reduce(int c, double u) const {
        double L = shape_.length(c);
        double r = std::fmod(u, L);
        if (r < 0) r += L;
        if (r >= L) r = 0.0;
        return r;
    }

    // Lift of a boundary point as a point of the hexagon plus the reflection
    // carrying it onto the lifted cuff geodesic.
    struct Lift {
        Vec3 x;
        int parity;
        Mat3 eps;
    };
    Lift lift(const BoundaryPoint& p) const {
        check_cuff(p.cuff);
        double l = shape_.half(p.cuff);
        double u = reduce(p.cuff, p.arc_param);
        if (u <= l) return {cuff_point(p.cuff, u), 0, Mat3::identity()};
        return {cuff_point(p.cuff, 2.0 * l - u), 1, refl_[far_seam(p.cuff)]};
    }

    PointDistance distance(const BoundaryPoint& p, const BoundaryPoint& q, int word_cap) const {
        if (word_cap < 1) throw ArgumentError("word_cap must be positive");
        Lift lp = lift(p), lq = lift(q);
        int need = lp.parity ^ lq.parity;
        const Vec3& xp = lp.x;

        struct Frame {
            Mat3 M;
            int last;
            int depth;
            int parity;
        };
        double best = std::numeric_limits<double>::infinity();
        Mat3 bestM = Mat3::identity();
        bool exact = true;
        std::size_t nodes = 0;
        std::vector<Frame> stack;
        stack.push_back({Mat3::identity(), -1, 0, 0});
        while (!stack.empty()) {
            Frame f = stack.back();
            stack.pop_back();
            if (++nodes > cfg_.node_budget)
                throw ResourceError("point_distance exceeded node budget", best);
            if (f.parity == need) {
                double d = hdist(xp, f.M * lq.x);
                if (d < best) {
                    best = d;
                    bestM = f.M;
                }
            }
            for (int a = 0; a < 3; ++a) {
                if (a == f.last) continue;
                Vec3 n = f.M * seam_normal_[a];
                if (dist_to_line(xp, n) >= best) continue;
                if (f.depth + 1 > word_cap) {
                    exact = false;
                    continue;
                }
                stack.push_back({f.M * refl_[a], a, f.depth + 1, f.parity ^ 1});
            }
        }
        PointDistance r;
        r.upper = best;
        r.exact = exact;
        r.element = lp.eps * bestM * lq.eps;
        return r;
    }

private:
    PantsShape shape_;
    GeometryConfig cfg_;
    HexagonChart chart_;
    std::array<Vec3, 3> seam_normal_;
    std::array<Mat3, 3> refl_;
    std::array<Vec3, 3> origin_, tangent_, inward_;
};

inline PointDistance point_distance(const PantsShape& s, const BoundaryPoint& p, const BoundaryPoint& q,
                                    int word_cap, GeometryConfig cfg = {}) {
    return PantsGeometry(s, cfg).distance(p, q, word_cap);
}

}  // namespace fnsurf
