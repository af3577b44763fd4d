#include <gtest/gtest.h>

#include <fnsurf/pants_geometry.hpp>
#include <fnsurf/random.hpp>

#include "oracles.hpp"

using namespace fnsurf;

namespace {

PantsShape random_shape(Rng& rng, double lo, double hi) {
    return PantsShape(lo + (hi - lo) * uniform01(rng), lo + (hi - lo) * uniform01(rng),
                      lo + (hi - lo) * uniform01(rng));
}

double along_cuff(double a, double b, double L) {
    double d = std::fmod(std::abs(a - b), L);
    return std::min(d, L - d);
}

}  // namespace

TEST(SeamLength, UnitShapeMatchesClosedForm) {
    // acosh((cosh 1 + cosh^2 1) / sinh^2 1), evaluated independently
    EXPECT_NEAR(seam_length(PantsShape(1, 1, 1), 1, 2), 1.70491283235801369, 1e-12);
    EXPECT_NEAR(seam_length(PantsShape(1, 1, 1), 1, 2), oracle::seam_closed_form(1, 1, 1), 1e-14);
}

TEST(SeamLength, FixedPointOfRegularShape) {
    double c = std::log(2 + std::sqrt(3.0));
    EXPECT_NEAR(seam_length(PantsShape(c, c, c), 1, 2), c, 1e-9);
}

TEST(SeamLength, SymmetricAndRelabelingEquivariant) {
    Rng rng = make_rng(1);
    for (int t = 0; t < 200; ++t) {
        PantsShape s = random_shape(rng, 0.1, 4);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (i == j) continue;
                EXPECT_DOUBLE_EQ(seam_length(s, i, j), seam_length(s, j, i));
            }
        PantsShape r(s.half(1), s.half(2), s.half(0));  // cuff k of r is cuff k+1 of s
        EXPECT_NEAR(seam_length(r, 0, 1), seam_length(s, 1, 2), 1e-12);
    }
}

TEST(SeamLength, RejectsBadInput) {
    EXPECT_THROW(PantsShape(0, 1, 1), ArgumentError);
    EXPECT_THROW(PantsShape(1, -1, 1), ArgumentError);
    EXPECT_THROW(PantsShape(1, 1, INFINITY), ArgumentError);
    EXPECT_THROW(seam_length(PantsShape(1, 1, 1), 1, 1), ArgumentError);
    EXPECT_THROW(seam_length(PantsShape(1, 1, 1), 0, 3), ArgumentError);
}

TEST(PantsBounds, DegenerateSupport) {
    PantsBounds b = pants_bounds(1, 1);
    EXPECT_NEAR(b.delta_minus, 1.70491283235801369, 1e-12);
    EXPECT_NEAR(b.delta_plus, b.delta_minus, 1e-12);
}

TEST(PantsBounds, ReferenceTable) {
    // (l, delta_l, Delta_+) from the closed forms, computed offline
    struct Row {
        double l, delta, Delta;
    };
    for (Row r : {Row{0.5, 2.8687, 6.7374}, Row{1, 1.70491, 5.40983}, Row{2, 0.82714, 5.65427},
                  Row{4, 0.27485, 8.54971}}) {
        PantsBounds b = pants_bounds(r.l, r.l);
        EXPECT_NEAR(b.delta_minus, r.delta, 1e-4) << r.l;
        EXPECT_NEAR(b.Delta_plus, r.Delta, 1e-4) << r.l;
    }
}

TEST(PantsBounds, InequalitySuite) {
    Rng rng = make_rng(2);
    int violations = 0;
    for (int t = 0; t < 1000; ++t) {
        double a = 0.1 + 3.9 * uniform01(rng), b = 0.1 + 3.9 * uniform01(rng);
        double lm = std::min(a, b), lp = std::max(a, b);
        PantsBounds pb = pants_bounds(lm, lp);
        double m = std::max(lp, pb.delta_plus);
        violations += !(pb.delta_minus >= std::exp(-2 * lp));
        violations += !(pb.delta_plus <= 2 * lp + std::log(4.0) - 2 * std::log(lm));
        violations += !(m <= pb.Delta_plus && pb.Delta_plus <= 8 * m);
        violations += !(std::log(pb.Delta_plus / pb.delta_minus + 1) <= 4 * pb.Delta_plus);
        violations += !(pb.delta_minus <= pb.delta_plus);
        violations += !(pb.Delta_plus >= 1.31);
    }
    EXPECT_EQ(violations, 0);
}

TEST(PantsBounds, ExtremesBracketEverySeam) {
    Rng rng = make_rng(3);
    for (int t = 0; t < 300; ++t) {
        double lm = 0.2 + uniform01(rng), lp = lm + 2 * uniform01(rng);
        PantsBounds pb = pants_bounds(lm, lp);
        PantsShape s(lm + (lp - lm) * uniform01(rng), lm + (lp - lm) * uniform01(rng),
                     lm + (lp - lm) * uniform01(rng));
        for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
            EXPECT_GE(seam_length(s, i, j), pb.delta_minus - 1e-12);
            EXPECT_LE(seam_length(s, i, j), pb.delta_plus + 1e-12);
        }
    }
}

TEST(CollarWidth, Values) {
    EXPECT_NEAR(collar_width(2), std::log(1 / std::sinh(1.0) + std::sqrt(1 + 1 / std::pow(std::sinh(1.0), 2))), 1e-14);
    EXPECT_NEAR(collar_width(2), 0.7719368329053048, 1e-12);
    EXPECT_NEAR(collar_width(0.01), 5.99146663, 1e-8);
    EXPECT_GT(collar_width(1e-6), 14);
    for (double a = 0.05; a < 5; a += 0.1) EXPECT_GT(collar_width(a), collar_width(a + 0.1));
    EXPECT_THROW(collar_width(0), ArgumentError);
}

TEST(CrossingBound, Values) {
    EXPECT_NEAR(half_pants_crossing_bound(1), 2.0854322034614188, 1e-12);
    EXPECT_NEAR(half_pants_crossing_bound(1e-9), 2 * std::acosh(std::sqrt(2.0)), 1e-9);
    EXPECT_NEAR(2 * std::acosh(std::sqrt(2.0)), 1.7627, 1e-4);
    for (double l : {0.1, 1.0, 5.0, 20.0}) EXPECT_GE(half_pants_crossing_bound(l), l);
}

TEST(HexagonChart, RightAnglesAndSides) {
    Rng rng = make_rng(4);
    for (int t = 0; t < 100; ++t) {
        PantsShape s = random_shape(rng, 0.1, 4);
        HexagonChart h = build_hexagon_chart(s);
        EXPECT_LT(h.closure_error, 1e-8);
        for (int i = 0; i < 6; ++i) {
            // arriving tangent of side i-1 is orthogonal to leaving tangent of side i
            const Vec3& a = h.end_tangents[(i + 5) % 6];
            const Vec3& b = h.start_tangents[i];
            EXPECT_NEAR(mink(a, b), 0.0, 1e-9);
        }
        EXPECT_NEAR(h.sides[0], s.half(0), 1e-12);
        EXPECT_NEAR(h.sides[2], s.half(2), 1e-12);
        EXPECT_NEAR(h.sides[4], s.half(1), 1e-12);
        EXPECT_NEAR(h.sides[1], seam_length(s, 0, 2), 1e-12);
        EXPECT_NEAR(h.sides[3], seam_length(s, 2, 1), 1e-12);
        EXPECT_NEAR(h.sides[5], seam_length(s, 1, 0), 1e-12);
        // measured vertex distances agree with the side list
        for (int i = 0; i < 6; ++i) EXPECT_NEAR(hdist(h.vertices[i], h.vertices[(i + 1) % 6]), h.sides[i], 1e-9);
    }
}

TEST(HexagonChart, IndependentTurtleConstructionCloses) {
    for (auto [a, b, c] : {std::tuple{1.0, 1.0, 1.0}, std::tuple{0.3, 2.0, 1.1}, std::tuple{3.0, 0.5, 0.2}}) {
        EXPECT_LT(oracle::hexagon(a, b, c).closure, 1e-9);
        HexagonChart h = build_hexagon_chart(PantsShape(a, b, c));
        oracle::Hexagon o = oracle::hexagon(a, b, c);
        for (int i = 0; i < 6; ++i)
            EXPECT_NEAR(hdist(h.vertices[i], h.vertices[(i + 2) % 6]), oracle::hyp_dist(o.v[i], o.v[(i + 2) % 6]),
                        1e-9);
    }
}

TEST(HexagonChart, CyclicRelabelingKeepsSideMultiset) {
    PantsShape s(0.7, 1.3, 2.1), r(1.3, 2.1, 0.7);
    auto a = build_hexagon_chart(s).sides, b = build_hexagon_chart(r).sides;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(PointDistance, IdentityIsZero) {
    PantsShape s(0.8, 1.2, 1.9);
    for (int c = 0; c < 3; ++c) {
        PointDistance d = point_distance(s, {c, 0.37}, {c, 0.37}, 8);
        EXPECT_NEAR(d.upper, 0.0, 1e-12);
        EXPECT_TRUE(d.exact);
    }
}

TEST(PointDistance, SeamFeetRealizeSeamLength) {
    Rng rng = make_rng(5);
    for (int t = 0; t < 50; ++t) {
        PantsShape s = random_shape(rng, 0.3, 3);
        PantsGeometry g(s);
        for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
            PointDistance d = g.distance({i, g.seam_foot(i, j)}, {j, g.seam_foot(j, i)}, 8);
            EXPECT_NEAR(d.upper, seam_length(s, i, j), 1e-9);
        }
    }
}

TEST(PointDistance, ArcParamReducedModuloLength) {
    PantsShape s(1, 1.5, 0.7);
    double a = point_distance(s, {1, 0.4}, {2, 0.9}, 8).upper;
    double b = point_distance(s, {1, 0.4 + 3.0}, {2, 0.9 - 1.4}, 8).upper;
    EXPECT_NEAR(a, b, 1e-12);
}

TEST(PointDistance, SymmetricAndTriangle) {
    Rng rng = make_rng(6);
    for (int t = 0; t < 100; ++t) {
        PantsShape s = random_shape(rng, 0.4, 2.5);
        PantsGeometry g(s);
        BoundaryPoint p[3];
        for (auto& x : p) {
            x.cuff = static_cast<int>(uniform_below(rng, 3));
            x.arc_param = s.length(x.cuff) * uniform01(rng);
        }
        double ab = g.distance(p[0], p[1], 8).upper, ba = g.distance(p[1], p[0], 8).upper;
        double bc = g.distance(p[1], p[2], 8).upper, ac = g.distance(p[0], p[2], 8).upper;
        EXPECT_NEAR(ab, ba, 1e-9);
        EXPECT_LE(ac, ab + bc + 1e-9);
        if (p[0].cuff == p[1].cuff)
            EXPECT_LE(ab, along_cuff(p[0].arc_param, p[1].arc_param, s.length(p[0].cuff)) + 1e-9);
    }
}

TEST(PointDistance, ElementCarriesLiftToRealizer) {
    Rng rng = make_rng(7);
    for (int t = 0; t < 50; ++t) {
        PantsShape s = random_shape(rng, 0.5, 2);
        PantsGeometry g(s);
        int cp = static_cast<int>(uniform_below(rng, 3)), cq = static_cast<int>(uniform_below(rng, 3));
        double u = s.length(cp) * uniform01(rng), v = s.length(cq) * uniform01(rng);
        PointDistance d = g.distance({cp, u}, {cq, v}, 8);
        EXPECT_NEAR(hdist(g.cuff_point(cp, u), d.element * g.cuff_point(cq, v)), d.upper, 1e-8);
    }
}

TEST(PointDistance, CuffTranslationLength) {
    PantsGeometry g(PantsShape(0.6, 1.1, 2.3));
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(translation_length(g.cuff_translation(c)), g.shape().length(c), 1e-9);
}

TEST(PointDistance, DenseGridOracle) {
    Rng rng = make_rng(8);
    int violations = 0;
    for (int t = 0; t < 100; ++t) {
        double l[3];
        for (auto& x : l) x = 0.5 + 1.5 * uniform01(rng);
        int cp = static_cast<int>(uniform_below(rng, 3)), cq = static_cast<int>(uniform_below(rng, 3));
        double up = 2 * l[cp] * uniform01(rng), uq = 2 * l[cq] * uniform01(rng);
        double pd = point_distance(PantsShape(l[0], l[1], l[2]), {cp, up}, {cq, uq}, 8).upper;
        oracle::GridAnswer g = oracle::doubled_hexagon_distance(l[0], l[1], l[2], cp, up, cq, uq);
        if (std::abs(pd - g.distance) > 2 * g.spacing) ++violations;
    }
    EXPECT_EQ(violations, 0);
}
