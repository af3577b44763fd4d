#include <gtest/gtest.h>

#include <fnsurf/experiments.hpp>
#include <fnsurf/metric_engine.hpp>

using namespace fnsurf;

namespace {

MetricGraph single_pants(double a, double b, double c, int m) {
    MetricGraph g(MetricConfig{m}, std::min({a, b, c}), std::max({a, b, c}));
    g.add_pants({a, b, c});
    return g;
}

}  // namespace

TEST(MetricGraph, SamplesEvenlySpacedAndCoverEveryCuff) {
    MetricGraph g = single_pants(0.7, 1.1, 1.9, 12);
    EXPECT_EQ(g.node_count(), 36u);
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 12; ++k) EXPECT_NEAR(g.param(g.node(0, c, k)), 2 * g.half(0, c) * k / 12.0, 1e-15);
    EXPECT_NEAR(g.spacing(), 3.8 / 12, 1e-15);
}

TEST(MetricGraph, SinglePantsFootDistancesAreSeams) {
    PantsShape s(1, 1.4, 0.6);
    for (int m : {8, 16}) {
        MetricGraph g = single_pants(1, 1.4, 0.6, m);
        PantsGeometry geo(s);
        for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
            // seam feet sit at parameter 0 or l, both sampled
            int ki = geo.seam_foot(i, j) == 0 ? 0 : m / 2, kj = geo.seam_foot(j, i) == 0 ? 0 : m / 2;
            DistanceResult d = distance(g, g.node(0, i, ki), g.node(0, j, kj));
            EXPECT_NEAR(d.upper, seam_length(s, i, j), 1e-9);
            EXPECT_EQ(d.hops, 0);
        }
    }
}

TEST(MetricGraph, ArcsNonNegativeSymmetricAndGluingMatchesCuffs) {
    WeightedSurfaceGraph s = random_surface(6, WeightLaw::parse("uniform:1:3 uniform"), 3);
    MetricGraph g = build_metric_graph(s, MetricConfig{8});
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> arcs;
    for (std::uint32_t n = 0; n < g.node_count(); ++n)
        g.for_each_neighbor(n, [&](std::uint32_t t, double w, ArcKind kind) {
            EXPECT_GE(w, 0.0);
            if (kind == ArcKind::gluing) {
                const auto& side = g.side(g.pants_of(n), g.cuff_of(n));
                EXPECT_EQ(static_cast<std::size_t>(side.pants), g.pants_of(t));
                EXPECT_EQ(side.cuff, g.cuff_of(t));
                EXPECT_NEAR(g.half(g.pants_of(n), g.cuff_of(n)), g.half(g.pants_of(t), g.cuff_of(t)), 1e-15);
            } else {
                EXPECT_EQ(g.pants_of(n), g.pants_of(t));
            }
            auto key = std::pair{n, t};
            auto it = arcs.find(key);
            if (it == arcs.end() || w < it->second) arcs[key] = w;
        });
    for (auto [k, w] : arcs) {
        auto it = arcs.find({k.second, k.first});
        ASSERT_NE(it, arcs.end());
        EXPECT_NEAR(it->second, w, 1e-12);
    }
}

TEST(ShortestPaths, IdentitySymmetryTriangle) {
    WeightedSurfaceGraph s = random_surface(5, WeightLaw::point(2), 9);
    ASSERT_TRUE(connectivity(s).connected);
    MetricGraph g = build_metric_graph(s, MetricConfig{8});
    DistanceResult z = distance(g, 5, 5);
    EXPECT_EQ(z.upper, 0.0);
    EXPECT_EQ(z.lower, 0.0);
    EXPECT_EQ(z.hops, 0);
    Rng rng = make_rng(1);
    std::size_t n = g.node_count();
    for (int t = 0; t < 40; ++t) {
        auto a = static_cast<std::uint32_t>(uniform_below(rng, n)), b = static_cast<std::uint32_t>(uniform_below(rng, n)),
             c = static_cast<std::uint32_t>(uniform_below(rng, n));
        DistanceResult ab = distance(g, a, b), ba = distance(g, b, a), bc = distance(g, b, c), ac = distance(g, a, c);
        EXPECT_NEAR(ab.upper, ba.upper, 1e-9);
        EXPECT_LE(ac.upper, ab.upper + bc.upper + 1e-9);
        EXPECT_LE(ab.lower, ab.upper);
        EXPECT_NEAR(ab.lower, std::max(0.0, ab.upper - 2.0 * ab.hops * g.spacing()), 1e-12);
    }
}

TEST(ShortestPaths, RefinementNeverIncreasesUpperBeyondSlack) {
    WeightedSurfaceGraph s = random_surface(4, WeightLaw::parse("uniform:1.5:3 uniform"), 21);
    MetricGraph g8 = build_metric_graph(s, MetricConfig{8}), g16 = build_metric_graph(s, MetricConfig{16});
    ShortestPaths a(g8), b(g16);
    a.add_source(g8.node(0, 0, 0));
    b.add_source(g16.node(0, 0, 0));
    a.run();
    b.run();
    for (std::size_t p = 0; p < s.n_vertices(); ++p)
        for (int c = 0; c < 3; ++c)
            for (int k = 0; k < 8; ++k) {
                DistanceResult coarse = a.result(g8.node(p, c, k)), fine = b.result(g16.node(p, c, 2 * k));
                EXPECT_LE(fine.upper, coarse.upper + 1e-9);
                EXPECT_GE(fine.upper, coarse.lower - 1e-9);
            }
}

TEST(ShortestPaths, IncrementalMatchesFreshRun) {
    // reveal the surface one gluing at a time and compare with a fresh search
    WeightedSurfaceGraph s = random_surface(5, WeightLaw::parse("uniform:1:3 uniform"), 4);
    MetricConfig cfg{8};
    MetricGraph full = build_metric_graph(s, cfg);
    MetricGraph g(cfg, s.law.l_minus(), s.law.l_plus());
    auto idx = s.edge_index();
    for (std::size_t v = 0; v < s.n_vertices(); ++v) {
        std::array<double, 3> h;
        for (int c = 0; c < 3; ++c) h[c] = 0.5 * s.weights[idx[3 * v + c]].length;
        g.add_pants(h);
    }
    ShortestPaths sp(g);
    sp.add_source(0);
    sp.run();
    auto edges = s.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto [x, y] = edges[e];
        g.glue(vertex_of(x), slot_of(x), vertex_of(y), slot_of(y), s.weights[e].arc_twist());
        for (auto n : cuff_nodes(g, vertex_of(x), slot_of(x))) sp.touch(n);
        for (auto n : cuff_nodes(g, vertex_of(y), slot_of(y))) sp.touch(n);
        sp.run();
    }
    ShortestPaths fresh(full);
    fresh.add_source(0);
    fresh.run();
    for (std::uint32_t n = 0; n < full.node_count(); ++n) EXPECT_NEAR(sp.dist(n), fresh.dist(n), 1e-9);
}

TEST(MetricGraph, ThetaGraphInterPantsDistanceBelowDeltaPlus) {
    WeightedSurfaceGraph s;
    s.genus = 2;
    s.law = WeightLaw::parse("uniform:1:3 uniform");
    s.pairing.mate = {3, 4, 5, 0, 1, 2};
    Rng rng = make_rng(5);
    for (int t = 0; t < 20; ++t) {
        s.weights.clear();
        for (int e = 0; e < 3; ++e) s.weights.push_back(s.law.draw(rng));
        MetricGraph g = build_metric_graph(s, MetricConfig{8});
        DistanceResult d = distance(g, pants_nodes(g, 0), pants_nodes(g, 1));
        EXPECT_LE(d.upper, s.law.bounds().Delta_plus);
        // every sample of pants 1 is within Delta_+ of pants 0
        ShortestPaths sp(g);
        for (auto n : pants_nodes(g, 0)) sp.add_source(n);
        sp.run();
        for (auto n : pants_nodes(g, 1)) EXPECT_LE(sp.dist(n), s.law.bounds().Delta_plus);
    }
}

TEST(MetricGraph, PartialPantsBoundsAreValidForCompletions) {
    // with one cuff unknown, partial arcs dominate the arcs of any completion
    MetricConfig cfg{8};
    MetricGraph part(cfg, 0.5, 1.5);
    part.add_pants({1.0, 0.8, std::nan("")});
    for (double third : {0.5, 1.0, 1.5}) {
        MetricGraph full(cfg, 0.5, 1.5);
        full.add_pants({1.0, 0.8, third});
        for (int i = 0; i < 16; ++i) {
            std::map<std::uint32_t, double> wp, wf;
            part.for_each_neighbor(static_cast<std::uint32_t>(i), [&](std::uint32_t t, double w, ArcKind) { wp[t] = w; });
            full.for_each_neighbor(static_cast<std::uint32_t>(i), [&](std::uint32_t t, double w, ArcKind) { wf[t] = w; });
            for (auto [t, w] : wp) EXPECT_LE(wf.at(t), w + 1e-12);
        }
        for (int k = 0; k < 8; ++k)
            for (int c = 0; c < 2; ++c) {
                double b = part.bound_to_unknown(0, c, part.param(part.node(0, c, k)), 2);
                // sampled cuff 2 overshoots the true distance by at most half a step
                double real = distance(full, {part.node(0, c, k)}, cuff_nodes(full, 0, 2)).upper;
                EXPECT_LE(real, b + 0.5 * full.spacing() + 1e-12);
            }
    }
}

TEST(Diameter, SinglePantsBracket) {
    MetricGraph g = single_pants(1, 1, 1, 16);
    DiameterEstimate d = diameter_estimate(g);
    double best = 0;
    for (std::uint32_t a = 0; a < g.node_count(); ++a) {
        ShortestPaths sp(g);
        sp.add_source(a);
        sp.run();
        for (double x : sp.distances()) best = std::max(best, x);
    }
    EXPECT_NEAR(d.upper, best, 1e-12);
    EXPECT_LE(d.lower, d.upper);
    EXPECT_NEAR(d.lower, d.upper, 1e-12);  // no gluings, so hops = 0
    double m = std::max(1.0, seam_length(PantsShape(1, 1, 1), 0, 1));
    EXPECT_GE(d.upper, m - 2 * g.spacing());
    EXPECT_LE(d.upper, 8 * m);
}

TEST(Diameter, RefinementShrinksBracket) {
    int narrower = 0, total = 0;
    for (int t = 0; t < 20; ++t) {
        WeightedSurfaceGraph s = random_surface(3, WeightLaw::point(2), 100 + t);
        if (!connectivity(s).connected) continue;
        ++total;
        DiameterEstimate a = diameter_estimate(build_metric_graph(s, MetricConfig{8}));
        DiameterEstimate b = diameter_estimate(build_metric_graph(s, MetricConfig{16}));
        EXPECT_LE(b.upper, a.upper + 1e-9);
        narrower += (b.upper - b.lower) < (a.upper - a.lower);
    }
    EXPECT_EQ(narrower, total);
}

TEST(Diameter, CollarSurface) {
    Rng rng = make_rng(6);
    double bound = 2 * collar_width(0.01);
    for (int t = 0; t < 3; ++t) {
        WeightedSurfaceGraph s = collar_surface(0.01, 2, rng);
        DiameterEstimate d = diameter_estimate(build_metric_graph(s, MetricConfig{16}));
        EXPECT_GE(d.lower, bound);
    }
}

TEST(Diameter, DisconnectedSurfaceRejected) {
    WeightedSurfaceGraph g;
    g.genus = 3;
    g.pairing.mate = {3, 4, 5, 0, 1, 2, 9, 10, 11, 6, 7, 8};
    g.weights.assign(6, EdgeWeight{});
    EXPECT_THROW(diameter_estimate(build_metric_graph(g, MetricConfig{8})), ArgumentError);
}
