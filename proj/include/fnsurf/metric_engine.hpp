#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <queue>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "pants_geometry.hpp"
#include "surface_model.hpp"

namespace fnsurf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct MetricConfig {
    int m = 16;
    int word_cap = 8;
    GeometryConfig geometry{};
    bool keep_elements = false;  // store deck elements of intra arcs (needed for lifting)
    std::size_t node_budget = 50'000'000;
};

inline double circ_dist(double a, double b, double L) {
    double d = std::abs(a - b);
    d = std::fmod(d, L);
    return std::min(d, L - d);
}

// Cuff-sample distances within one pants: 3m samples, index c*m + k.
class SampleTable {
public:
    SampleTable(const PantsShape& s, const MetricConfig& cfg, bool eager)
        : geo_(s, cfg.geometry), m_(cfg.m), cap_(cfg.word_cap), keep_(cfg.keep_elements) {
        int n = 3 * m_;
        d_.assign(static_cast<std::size_t>(n) * n, std::numeric_limits<double>::quiet_NaN());
        row_done_.assign(n, 0);
        if (keep_) g_.resize(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i) d_[static_cast<std::size_t>(i) * n + i] = 0.0;
        if (eager)
            for (int i = 0; i < n; ++i) ensure_row(i);
    }

    int m() const { return m_; }
    int size() const { return 3 * m_; }
    const PantsGeometry& geometry() const { return geo_; }
    const PantsShape& shape() const { return geo_.shape(); }
    double param(int c, int k) const { return shape().half(c) * (2.0 * k / m_); }
    BoundaryPoint point(int i) const { return {i / m_, param(i / m_, i % m_)}; }
    bool all_exact() const { return exact_; }

    const double* row(int i) {
        ensure_row(i);
        return d_.data() + static_cast<std::size_t>(i) * size();
    }
    const double* row(int i) const { return d_.data() + static_cast<std::size_t>(i) * size(); }
    double get(int i, int j) { return row(i)[j]; }
    const Mat3& element(int i, int j) const { return g_[static_cast<std::size_t>(i) * size() + j]; }

    // Realized path through seam feet, or along the cuff.
    double fallback(int i, int j) const {
        int c = i / m_, cj = j / m_;
        double t = param(c, i % m_), u = param(cj, j % m_);
        if (c == cj) return circ_dist(t, u, shape().length(c));
        return circ_dist(t, geo_.seam_foot(c, cj), shape().length(c)) + seam_length(shape(), c, cj) +
               circ_dist(u, geo_.seam_foot(cj, c), shape().length(cj));
    }

    void ensure_row(int i) {
        if (row_done_[i]) return;
        int n = size();
        BoundaryPoint p = point(i);
        for (int j = 0; j < n; ++j) {
            std::size_t ij = static_cast<std::size_t>(i) * n + j, ji = static_cast<std::size_t>(j) * n + i;
            if (!std::isnan(d_[ij]) && !(keep_ && i == j)) continue;
            PointDistance pd = geo_.distance(p, point(j), cap_);
            exact_ = exact_ && pd.exact;
            double w = std::min(pd.upper, fallback(i, j));
            if (i == j) w = 0.0;
            d_[ij] = d_[ji] = w;
            if (keep_) {
                g_[ij] = pd.element;
                g_[ji] = inverse(pd.element);
            }
        }
        row_done_[i] = 1;
    }

private:
    PantsGeometry geo_;
    int m_, cap_;
    bool keep_;
    bool exact_ = true;
    std::vector<double> d_;
    std::vector<Mat3> g_;
    std::vector<char> row_done_;
};

// Process-wide cache of fully computed tables for repeated shapes.
class TableCache {
public:
    static std::shared_ptr<SampleTable> get(const PantsShape& s, const MetricConfig& cfg) {
        static std::mutex mu;
        static std::map<std::tuple<double, double, double, int, int, bool>, std::shared_ptr<SampleTable>> cache;
        auto key = std::make_tuple(s.half(0), s.half(1), s.half(2), cfg.m, cfg.word_cap, cfg.keep_elements);
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        auto t = std::make_shared<SampleTable>(s, cfg, true);
        if (cache.size() < 256) cache.emplace(key, t);
        return t;
    }
};

enum class ArcKind { intra, cuff, gluing };

struct DistanceResult {
    double upper = kInf;
    double lower = kInf;
    int hops = 0;
    bool reachable() const { return std::isfinite(upper); }
};

// Discretized surface: m samples on each cuff side of each pants. Node id
// n = pants * 3m + cuff * m + k. Pants may have cuffs of unknown length
// (partial surfaces); samples on such cuffs carry no arcs and intra arcs of
// such pants use seam-path bounds valid for every length in [l_minus, l_plus].
class MetricGraph {
public:
    struct Side {
        std::int32_t pants = -1;
        std::int8_t cuff = 0;
        std::int8_t sign = 1;  // partner param u = offset + sign * t (mod L)
        bool canonical = false;
        double offset = 0.0;
    };

    explicit MetricGraph(MetricConfig cfg = {}, double l_minus = 0.0, double l_plus = 0.0)
        : cfg_(cfg), l_minus_(l_minus), l_plus_(l_plus) {
        if (cfg_.m < 4) throw ArgumentError("m must be at least 4");
    }

    const MetricConfig& config() const { return cfg_; }
    int m() const { return cfg_.m; }
    std::size_t pants_count() const { return pants_.size(); }
    std::size_t node_count() const { return pants_.size() * 3 * static_cast<std::size_t>(cfg_.m); }
    std::uint32_t node(std::size_t p, int c, int k) const {
        return static_cast<std::uint32_t>(p * 3 * cfg_.m + static_cast<std::size_t>(c) * cfg_.m + k);
    }
    std::size_t pants_of(std::uint32_t n) const { return n / (3 * cfg_.m); }
    int cuff_of(std::uint32_t n) const { return static_cast<int>(n % (3 * cfg_.m)) / cfg_.m; }
    int sample_of(std::uint32_t n) const { return static_cast<int>(n % cfg_.m); }

    // Spacing h = max cuff length / m, or a fixed bound when set.
    double spacing() const { return spacing_override_ > 0 ? spacing_override_ : max_len_ / cfg_.m; }
    void set_spacing_bound(double h) { spacing_override_ = h; }

    double half(std::size_t p, int c) const { return pants_[p].half[c]; }
    bool known(std::size_t p, int c) const { return !std::isnan(pants_[p].half[c]); }
    bool node_alive(std::uint32_t n) const { return known(pants_of(n), cuff_of(n)); }
    double param(std::uint32_t n) const {
        std::size_t p = pants_of(n);
        int c = cuff_of(n);
        return pants_[p].half[c] * (2.0 * sample_of(n) / cfg_.m);
    }
    const Side& side(std::size_t p, int c) const { return pants_[p].side[c]; }
    const std::shared_ptr<SampleTable>& table(std::size_t p) const { return pants_[p].table; }

    // NaN entries mark unknown lengths. shared_table: use the process cache.
    std::size_t add_pants(std::array<double, 3> halves, bool shared_table = false) {
        Rec r;
        r.half = halves;
        r.shared = shared_table;
        pants_.push_back(std::move(r));
        std::size_t p = pants_.size() - 1;
        for (int c = 0; c < 3; ++c)
            if (known(p, c)) max_len_ = std::max(max_len_, 2.0 * halves[c]);
        maybe_build_table(p);
        if (node_count() > cfg_.node_budget) throw ResourceError("metric graph node budget exceeded");
        return p;
    }

    void add_pants(std::shared_ptr<SampleTable> t) {
        Rec r;
        r.half = t->shape().halves();
        r.table = std::move(t);
        pants_.push_back(std::move(r));
        for (double l : pants_.back().half) max_len_ = std::max(max_len_, 2.0 * l);
    }

    void set_half(std::size_t p, int c, double half) {
        pants_[p].half[c] = half;
        max_len_ = std::max(max_len_, 2.0 * half);
        maybe_build_table(p);
    }

    // Identify cuff (p, cp) with cuff (q, cq). The first side takes the role
    // of an upper boundary in the gluing rule. Cuff 0 is directly oriented,
    // cuffs 1, 2 indirectly; with sigma = +1 / -1 accordingly the rule is
    // sigma_p t + sigma_q u = -tau (mod L).
    void glue(std::size_t p, int cp, std::size_t q, int cq, double arc_twist) {
        if (pants_[p].side[cp].pants >= 0 || pants_[q].side[cq].pants >= 0)
            throw ArgumentError("cuff glued twice");
        if (p == q && cp == cq) throw ArgumentError("cannot glue a cuff to itself");
        int sp = cp == 0 ? 1 : -1, sq = cq == 0 ? 1 : -1;
        Side a, b;
        a.pants = static_cast<std::int32_t>(q);
        a.cuff = static_cast<std::int8_t>(cq);
        a.offset = -sq * arc_twist;
        a.sign = static_cast<std::int8_t>(-sp * sq);
        a.canonical = true;
        b.pants = static_cast<std::int32_t>(p);
        b.cuff = static_cast<std::int8_t>(cp);
        b.offset = -sp * arc_twist;
        b.sign = static_cast<std::int8_t>(-sp * sq);
        pants_[p].side[cp] = a;
        pants_[q].side[cq] = b;
    }

    double map_param(const Side& s, double t) const { return s.offset + s.sign * t; }

    // Visit arcs leaving node n: f(target, weight, kind).
    template <class F>
    void for_each_neighbor(std::uint32_t n, F&& f) const {
        const std::size_t p = pants_of(n);
        const int c = cuff_of(n), k = sample_of(n), m = cfg_.m;
        const Rec& r = pants_[p];
        if (!known(p, c)) return;
        const std::uint32_t base = node(p, 0, 0);
        const int i = c * m + k;
        if (r.table) {
            const double* row = r.table->row(i);
            for (int j = 0; j < 3 * m; ++j)
                if (j != i) f(base + j, row[j], (j / m == c) ? ArcKind::cuff : ArcKind::intra);
        } else {
            double t = param(n);
            for (int cj = 0; cj < 3; ++cj) {
                if (!known(p, cj)) continue;
                for (int kj = 0; kj < m; ++kj) {
                    int j = cj * m + kj;
                    if (j == i) continue;
                    f(base + j, partial_intra(p, c, t, cj, r.half[cj] * (2.0 * kj / m)), ArcKind::intra);
                }
            }
        }
        const Side& s = r.side[c];
        if (s.pants < 0) return;
        const std::size_t q = static_cast<std::size_t>(s.pants);
        if (s.canonical) {
            double nb[2], w[2];
            int cnt = bracket(p, c, k, nb, w);
            for (int a = 0; a < cnt; ++a) f(node(q, s.cuff, static_cast<int>(nb[a])), w[a], ArcKind::gluing);
        } else {
            double L = 2.0 * r.half[c], h = L / m;
            double t = std::fmod(map_param(s, param(n)), L);
            if (t < 0) t += L;
            int k0 = static_cast<int>(std::floor(t / h));
            for (int dk = -1; dk <= 2; ++dk) {
                int kp = ((k0 + dk) % m + m) % m;
                double nb[2], w[2];
                int cnt = bracket(q, s.cuff, kp, nb, w);
                for (int a = 0; a < cnt; ++a)
                    if (static_cast<int>(nb[a]) == k) f(node(q, s.cuff, kp), w[a], ArcKind::gluing);
            }
        }
    }

    // Seam-path bound between boundary points of a pants whose third cuff may
    // be unknown; valid for all completions in [l_minus, l_plus].
    double partial_intra(std::size_t p, int c, double t, int cj, double u) const {
        const Rec& r = pants_[p];
        if (c == cj) return circ_dist(t, u, 2.0 * r.half[c]);
        return circ_dist(t, foot(p, c, cj), 2.0 * r.half[c]) + worst_seam(p, c, cj) +
               circ_dist(u, foot(p, cj, c), 2.0 * r.half[cj]);
    }

    // Bound on the distance from a known sample (c, t) to cuff e of unknown
    // length: walk to the seam foot and cross the longest admissible seam.
    double bound_to_unknown(std::size_t p, int c, double t, int e) const {
        return circ_dist(t, foot(p, c, e), 2.0 * pants_[p].half[c]) + worst_seam(p, c, e);
    }

    double worst_seam(std::size_t p, int a, int b) const {
        std::array<double, 3> h = pants_[p].half;
        int k = 3 - a - b;
        if (std::isnan(h[a])) h[a] = l_minus_;
        if (std::isnan(h[b])) h[b] = l_minus_;
        if (std::isnan(h[k])) h[k] = l_plus_;
        return seam_length(PantsShape(h[0], h[1], h[2]), a, b);
    }

    double foot(std::size_t p, int c, int other) const {
        int k = 3 - c - other;
        return k == PantsGeometry::near_seam(c) ? 0.0 : pants_[p].half[c];
    }

    // Along-cuff-neighbour gluing candidates of canonical side (p, c, k).
    int bracket(std::size_t p, int c, int k, double* nb, double* w) const {
        const Side& s = pants_[p].side[c];
        double L = 2.0 * pants_[p].half[c], h = L / cfg_.m;
        double u = std::fmod(map_param(s, pants_[p].half[c] * (2.0 * k / cfg_.m)), L);
        if (u < 0) u += L;
        double f = u / h;
        int j0 = static_cast<int>(std::floor(f));
        double frac = f - j0;
        if (j0 >= cfg_.m) {
            j0 -= cfg_.m;
        }
        nb[0] = j0 % cfg_.m;
        w[0] = frac * h;
        nb[1] = (j0 + 1) % cfg_.m;
        w[1] = (1.0 - frac) * h;
        return 2;
    }

    // Text edge list: "p c k q d j weight kind", each undirected arc once.
    void dump(std::ostream& os) const {
        for (std::uint32_t n = 0; n < node_count(); ++n) {
            for_each_neighbor(n, [&](std::uint32_t t, double w, ArcKind kind) {
                if (t <= n) return;
                os << pants_of(n) << ' ' << cuff_of(n) << ' ' << sample_of(n) << ' ' << pants_of(t) << ' '
                   << cuff_of(t) << ' ' << sample_of(t) << ' ' << fmt17(w) << ' '
                   << (kind == ArcKind::gluing ? "gluing" : kind == ArcKind::cuff ? "cuff" : "intra") << '\n';
            });
        }
    }

private:
    struct Rec {
        std::array<double, 3> half;
        std::array<Side, 3> side{};
        std::shared_ptr<SampleTable> table;
        bool shared = false;
    };

    void maybe_build_table(std::size_t p) {
        Rec& r = pants_[p];
        if (r.table) return;
        for (double l : r.half)
            if (std::isnan(l)) return;
        PantsShape s(r.half[0], r.half[1], r.half[2]);
        r.table = r.shared ? TableCache::get(s, cfg_) : std::make_shared<SampleTable>(s, cfg_, false);
    }

    MetricConfig cfg_;
    double l_minus_, l_plus_;
    double max_len_ = 0.0;
    double spacing_override_ = 0.0;
    std::vector<Rec> pants_;
};

inline MetricGraph build_metric_graph(const WeightedSurfaceGraph& g, MetricConfig cfg = {}) {
    MetricGraph mg(cfg, g.law.l_minus(), g.law.l_plus());
    auto idx = g.edge_index();
    for (std::size_t v = 0; v < g.n_vertices(); ++v) {
        std::array<double, 3> h;
        for (int s = 0; s < 3; ++s) h[s] = 0.5 * g.weights[idx[3 * v + s]].length;
        mg.add_pants(h, g.law.fixed_length());
    }
    auto edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto [a, b] = edges[e];
        mg.glue(vertex_of(a), slot_of(a), vertex_of(b), slot_of(b), g.weights[e].arc_twist());
    }
    return mg;
}

// Dijkstra over a metric graph. Decrease-only updates (new arcs, smaller
// weights, new nodes) can be absorbed by pushing affected nodes and running
// again. Nodes beyond the limit stay queued so growth can resume.
class ShortestPaths {
public:
    explicit ShortestPaths(const MetricGraph& g) : g_(&g) { sync(); }

    void sync() {
        std::size_t n = g_->node_count();
        if (dist_.size() < n) {
            dist_.resize(n, kInf);
            hops_.resize(n, 0);
            settled_.resize(n, 0);
        }
    }

    void add_source(std::uint32_t n, double d = 0.0) {
        sync();
        if (d < dist_[n]) {
            dist_[n] = d;
            hops_[n] = 0;
            settled_[n] = 0;
            heap_.push({d, n});
        }
    }

    // Requeue a node whose outgoing arcs may have improved.
    void touch(std::uint32_t n) {
        sync();
        if (std::isfinite(dist_[n])) {
            settled_[n] = 0;
            heap_.push({dist_[n], n});
        }
    }

    // Offer a tentative value for n reached through an external arc.
    void offer(std::uint32_t n, double d, int hops) {
        sync();
        if (d < dist_[n] || (d == dist_[n] && hops < hops_[n])) {
            dist_[n] = d;
            hops_[n] = static_cast<std::uint16_t>(hops);
            settled_[n] = 0;
            heap_.push({d, n});
        }
    }

    template <class Hook>
    std::size_t run(double limit, Hook&& before_expand) {
        std::size_t count = 0;
        while (!heap_.empty()) {
            auto [d, n] = heap_.top();
            if (d > limit) break;
            heap_.pop();
            if (d > dist_[n] || settled_[n]) continue;
            before_expand(n);
            sync();
            settled_[n] = 1;
            ++count;
            int hn = hops_[n];
            g_->for_each_neighbor(n, [&](std::uint32_t t, double w, ArcKind kind) {
                double nd = d + w;
                int nh = hn + (kind == ArcKind::gluing ? 1 : 0);
                if (nd < dist_[t] || (nd == dist_[t] && nh < hops_[t] && !settled_[t])) {
                    dist_[t] = nd;
                    hops_[t] = static_cast<std::uint16_t>(nh);
                    settled_[t] = 0;
                    heap_.push({nd, t});
                }
            });
        }
        return count;
    }
    std::size_t run(double limit = kInf) {
        return run(limit, [](std::uint32_t) {});
    }

    double peek() const { return heap_.empty() ? kInf : heap_.top().first; }
    double dist(std::uint32_t n) const { return n < dist_.size() ? dist_[n] : kInf; }
    int hops(std::uint32_t n) const { return n < hops_.size() ? hops_[n] : 0; }
    bool settled(std::uint32_t n) const { return n < settled_.size() && settled_[n]; }
    const std::vector<double>& distances() const { return dist_; }

    DistanceResult result(std::uint32_t n) const {
        DistanceResult r;
        r.upper = dist(n);
        r.hops = hops(n);
        r.lower = std::isfinite(r.upper) ? std::max(0.0, r.upper - 2.0 * r.hops * g_->spacing()) : kInf;
        return r;
    }

private:
    using Item = std::pair<double, std::uint32_t>;
    const MetricGraph* g_;
    std::vector<double> dist_;
    std::vector<std::uint16_t> hops_;
    std::vector<char> settled_;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap_;
};

inline DistanceResult best_of(const ShortestPaths& sp, const std::vector<std::uint32_t>& targets) {
    DistanceResult best;
    for (auto t : targets) {
        DistanceResult r = sp.result(t);
        if (r.upper < best.upper || (r.upper == best.upper && r.hops < best.hops)) best = r;
    }
    return best;
}

inline DistanceResult distance(const MetricGraph& g, const std::vector<std::uint32_t>& sources,
                               const std::vector<std::uint32_t>& targets) {
    if (sources.empty()) throw ArgumentError("distance needs at least one source");
    ShortestPaths sp(g);
    for (auto s : sources) sp.add_source(s);
    sp.run();
    return best_of(sp, targets);
}

inline DistanceResult distance(const MetricGraph& g, std::uint32_t source, std::uint32_t target) {
    return distance(g, std::vector<std::uint32_t>{source}, std::vector<std::uint32_t>{target});
}

// Nodes of one cuff side.
inline std::vector<std::uint32_t> cuff_nodes(const MetricGraph& g, std::size_t p, int c) {
    std::vector<std::uint32_t> v;
    for (int k = 0; k < g.m(); ++k) v.push_back(g.node(p, c, k));
    return v;
}

inline std::vector<std::uint32_t> pants_nodes(const MetricGraph& g, std::size_t p) {
    std::vector<std::uint32_t> v;
    for (int c = 0; c < 3; ++c)
        if (g.known(p, c))
            for (int k = 0; k < g.m(); ++k) v.push_back(g.node(p, c, k));
    return v;
}

struct DiameterEstimate {
    double lower = 0.0;
    double upper = 0.0;
    std::uint32_t a = 0, b = 0;   // witness pair of the upper value
    std::size_t sources_run = 0;  // single-source searches performed
};

// Exact maximum over sample pairs of the distance upper bounds. Sources are
// processed in an order driven by eccentricity bounds; a node is skipped once
// min_s (d(s, x) + ecc(s)) cannot exceed the best value found.
inline DiameterEstimate diameter_estimate(const MetricGraph& g) {
    std::size_t n = g.node_count();
    if (n == 0) throw ArgumentError("empty metric graph");
    std::vector<double> ecc_up(n, kInf), ecc_lo(n, 0.0);
    std::vector<char> done(n, 0);
    DiameterEstimate est;
    double h = g.spacing();
    bool pick_high = true;
    for (;;) {
        std::uint32_t pick = UINT32_MAX;
        double key = 0;
        for (std::uint32_t v = 0; v < n; ++v) {
            if (done[v] || ecc_up[v] <= est.upper) continue;
            if (pick == UINT32_MAX) {
                pick = v;
                key = pick_high ? ecc_up[v] : ecc_lo[v];
                continue;
            }
            if (pick_high ? ecc_up[v] > key : ecc_lo[v] < key) {
                pick = v;
                key = pick_high ? ecc_up[v] : ecc_lo[v];
            }
        }
        if (pick == UINT32_MAX) break;
        pick_high = !pick_high;
        ShortestPaths sp(g);
        sp.add_source(pick);
        sp.run();
        ++est.sources_run;
        done[pick] = 1;
        double ecc = 0;
        std::uint32_t far = pick;
        for (std::uint32_t v = 0; v < n; ++v) {
            double d = sp.dist(v);
            if (!std::isfinite(d)) throw ArgumentError("metric graph is disconnected; filter components first");
            if (d > ecc) {
                ecc = d;
                far = v;
            }
            est.lower = std::max(est.lower, std::max(0.0, d - 2.0 * sp.hops(v) * h));
        }
        if (ecc > est.upper) {
            est.upper = ecc;
            est.a = pick;
            est.b = far;
        }
        for (std::uint32_t v = 0; v < n; ++v) {
            double d = sp.dist(v);
            ecc_up[v] = std::min(ecc_up[v], ecc + d);
            ecc_lo[v] = std::max(ecc_lo[v], std::max(d, ecc - d));
        }
    }
    return est;
}

}  // namespace fnsurf
