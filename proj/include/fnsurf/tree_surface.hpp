#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hyperbolic.hpp"
#include "metric_engine.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "surface_model.hpp"

namespace fnsurf {

// binary: rooted tree, the root's cuff 0 is the free boundary.
// subtree: the descendancy of a pants, rooted at its cuff 0 (same keys as in
//   the tree it was cut from).
// full: 3-regular tree, the root has a child on every cuff.
enum class TreeKind { binary, subtree, full };

inline std::uint64_t child_key(std::uint64_t key, int cuff) { return derive_seed(key, static_cast<std::uint64_t>(cuff)); }

// Tree-like surface generated on demand. The weight of the edge entering the
// node with key K is law.draw(KeyedStream(K)), so every weight depends only on
// the node's position in the tree.
class TreeSurface {
public:
    struct Node {
        std::uint64_t key = 0;
        std::int32_t parent = -1;
        std::int8_t parent_cuff = -1;
        std::array<std::int32_t, 3> child{-1, -1, -1};
        std::int32_t depth = 0;
    };

    TreeSurface(TreeKind kind, const WeightLaw& law, std::uint64_t key, MetricConfig cfg = {},
                std::size_t max_pants = 200'000)
        : kind_(kind), law_(law), graph_(cfg, law.l_minus(), law.l_plus()), max_pants_(max_pants) {
        Node root;
        root.key = key;
        std::array<double, 3> h;
        h[0] = 0.5 * edge_weight(kind == TreeKind::subtree ? key : child_key(key, 0)).length;
        h[1] = 0.5 * edge_weight(child_key(key, 1)).length;
        h[2] = 0.5 * edge_weight(child_key(key, 2)).length;
        nodes_.push_back(root);
        graph_.add_pants(h, law.fixed_length());
    }

    EdgeWeight edge_weight(std::uint64_t key) const {
        KeyedStream s(key);
        return law_.draw(s);
    }

    TreeKind kind() const { return kind_; }
    const WeightLaw& law() const { return law_; }
    const MetricGraph& graph() const { return graph_; }
    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::size_t i) const { return nodes_[i]; }
    std::size_t max_pants() const { return max_pants_; }

    bool has_child_slot(std::size_t p, int c) const {
        if (c != 0) return true;
        return kind_ == TreeKind::full && p == 0;
    }
    std::uint64_t child_key_of(std::size_t p, int c) const { return child_key(nodes_[p].key, c); }

    std::int32_t ensure_child(std::size_t p, int c) {
        if (!has_child_slot(p, c)) throw ArgumentError("no child on this cuff");
        if (nodes_[p].child[c] >= 0) return nodes_[p].child[c];
        if (nodes_.size() >= max_pants_) throw ResourceError("tree ball exceeds the pants budget");
        Node n;
        n.key = child_key(nodes_[p].key, c);
        n.parent = static_cast<std::int32_t>(p);
        n.parent_cuff = static_cast<std::int8_t>(c);
        n.depth = nodes_[p].depth + 1;
        EdgeWeight w = edge_weight(n.key);
        std::array<double, 3> h{0.5 * w.length, 0.5 * edge_weight(child_key(n.key, 1)).length,
                                0.5 * edge_weight(child_key(n.key, 2)).length};
        nodes_.push_back(n);
        std::size_t q = graph_.add_pants(h, law_.fixed_length());
        graph_.glue(p, c, q, 0, w.arc_twist());
        nodes_[p].child[c] = static_cast<std::int32_t>(q);
        return static_cast<std::int32_t>(q);
    }

    // Distance sources: the free boundary, or the whole root pants together
    // with its children's entry samples for the full tree.
    std::vector<std::uint32_t> sources() {
        std::vector<std::uint32_t> s = cuff_nodes(graph_, 0, 0);
        if (kind_ == TreeKind::full) {
            s = pants_nodes(graph_, 0);
            for (int c = 0; c < 3; ++c) {
                auto more = cuff_nodes(graph_, static_cast<std::size_t>(ensure_child(0, c)), 0);
                s.insert(s.end(), more.begin(), more.end());
            }
        }
        return s;
    }

    // Isometry from the chart of the child on (p, c) to the chart of p, sending
    // the child's cuff 0 onto cuff c of p with matching boundary parameters.
    Mat3 child_frame(std::size_t p, int c) const {
        const MetricGraph::Side& s = graph_.side(p, c);
        std::size_t q = static_cast<std::size_t>(s.pants);
        const PantsGeometry& X = graph_.table(p)->geometry();
        const PantsGeometry& Y = graph_.table(q)->geometry();
        double t0 = -s.sign * s.offset;
        Mat3 src = from_columns(Y.cuff_point(0, 0.0), Y.cuff_tangent(0, 0.0), Y.inward_normal(0));
        Mat3 dst = from_columns(X.cuff_point(c, t0), static_cast<double>(s.sign) * X.cuff_tangent(c, t0),
                                -1.0 * X.inward_normal(c));
        return dst * inverse(src);
    }

private:
    TreeKind kind_;
    WeightLaw law_;
    MetricGraph graph_;
    std::size_t max_pants_;
    std::vector<Node> nodes_;
};

struct GrowthSnapshot {
    double R = 0.0;
    std::vector<std::int32_t> ball;      // B_R
    std::vector<std::int32_t> sphere;    // S_R
    std::vector<std::int32_t> U;         // maximal elements of S_R
    std::vector<std::int32_t> U_prime;   // children of S_R members
    std::size_t N() const { return sphere.size(); }
};

// Resumable ball growth. Distances are upper bounds from the discretized
// metric; a pants is in the ball when its entry distance is at most R.
class BallGrower {
public:
    explicit BallGrower(TreeSurface& t) : t_(&t), sp_(t.graph()) {
        for (auto s : t.sources()) sp_.add_source(s);
        sp_.sync();
    }

    TreeSurface& tree() { return *t_; }
    const ShortestPaths& paths() const { return sp_; }
    double reached() const { return reached_; }

    void grow(double R) {
        if (R < 0) throw ArgumentError("radius must be nonnegative");
        if (R <= reached_) return;
        const MetricGraph& g = t_->graph();
        sp_.run(R, [&](std::uint32_t n) {
            std::size_t p = g.pants_of(n);
            int c = g.cuff_of(n);
            if (t_->has_child_slot(p, c) && t_->node(p).child[c] < 0) t_->ensure_child(p, c);
        });
        reached_ = R;
    }

    // Upper bound on the distance from the sources to the entry boundary.
    double entry(std::size_t p) const {
        const auto& nd = t_->node(p);
        if (nd.parent < 0) return 0.0;
        const MetricGraph& g = t_->graph();
        double best = kInf;
        for (int k = 0; k < g.m(); ++k) {
            best = std::min(best, sp_.dist(g.node(p, 0, k)));
            best = std::min(best, sp_.dist(g.node(static_cast<std::size_t>(nd.parent), nd.parent_cuff, k)));
        }
        return best;
    }

    bool in_ball(std::int32_t p, double R) const { return p >= 0 && entry(static_cast<std::size_t>(p)) <= R; }

    std::vector<int> child_cuffs(std::size_t p) const {
        std::vector<int> v;
        for (int c = 0; c < 3; ++c)
            if (t_->has_child_slot(p, c)) v.push_back(c);
        return v;
    }

    // For the full tree the root is the centre and is not counted.
    GrowthSnapshot snapshot(double R) {
        if (R > reached_) grow(R);
        GrowthSnapshot s;
        s.R = R;
        std::size_t n = t_->size();
        std::vector<char> in_s(n, 0);
        std::size_t first = t_->kind() == TreeKind::full ? 1 : 0;
        for (std::size_t p = first; p < n; ++p) {
            if (!in_ball(static_cast<std::int32_t>(p), R)) continue;
            s.ball.push_back(static_cast<std::int32_t>(p));
            bool open = false;
            for (int c : child_cuffs(p))
                if (!in_ball(t_->node(p).child[c], R)) open = true;
            if (open) {
                s.sphere.push_back(static_cast<std::int32_t>(p));
                in_s[p] = 1;
            }
        }
        for (auto p : s.sphere) {
            bool covered = false;
            for (std::int32_t a = t_->node(p).parent; a >= static_cast<std::int32_t>(first); a = t_->node(a).parent)
                if (in_s[a]) {
                    covered = true;
                    break;
                }
            if (!covered) s.U.push_back(p);
        }
        for (auto p : s.sphere)
            for (int c : child_cuffs(static_cast<std::size_t>(p))) s.U_prime.push_back(t_->ensure_child(p, c));
        return s;
    }

private:
    TreeSurface* t_;
    ShortestPaths sp_;
    double reached_ = -1.0;
};

inline GrowthSnapshot grow_ball(TreeSurface& t, double R) {
    BallGrower g(t);
    return g.snapshot(R);
}

// N_r of the descendancy of the pants with the given key.
inline std::size_t subtree_count(const WeightLaw& law, std::uint64_t key, double r, const MetricConfig& cfg,
                                 std::size_t max_pants = 200'000) {
    TreeSurface t(TreeKind::subtree, law, key, cfg, max_pants);
    return grow_ball(t, r).N();
}

struct SnapshotChecks {
    bool ball_bounds = true;    // N_R <= #B_R <= 2 N_R
    bool antichain = true;      // no element of U_R is an ancestor of another
    int max_ancestors_in_sphere = 0;
    double ancestor_bound = 0;  // Delta_+ / delta_- + 1
    bool ancestor_ok = true;
    bool growth_lower_ok = true;  // ln2/Delta_+ - 4 ln2 / R <= ln N_R / R
    bool growth_upper_ok = true;  // ln N_R / R <= 1 + 3 Delta_+ / R
    bool all() const { return ball_bounds && antichain && ancestor_ok && growth_lower_ok && growth_upper_ok; }
};

inline SnapshotChecks check_snapshot(const TreeSurface& t, const GrowthSnapshot& s) {
    SnapshotChecks r;
    std::size_t N = s.N(), B = s.ball.size();
    r.ball_bounds = N <= B && B <= 2 * N;
    std::vector<char> in_u(t.size(), 0), in_s(t.size(), 0);
    for (auto p : s.U) in_u[p] = 1;
    for (auto p : s.sphere) in_s[p] = 1;
    for (auto p : s.U)
        for (std::int32_t a = t.node(p).parent; a >= 0; a = t.node(a).parent)
            if (in_u[a]) r.antichain = false;
    PantsBounds b = t.law().bounds();
    r.ancestor_bound = b.Delta_plus / b.delta_minus + 1.0;
    for (std::size_t p = 0; p < t.size(); ++p) {
        int cnt = 0;
        for (std::int32_t a = static_cast<std::int32_t>(p); a >= 0; a = t.node(a).parent) cnt += in_s[a];
        r.max_ancestors_in_sphere = std::max(r.max_ancestors_in_sphere, cnt);
    }
    r.ancestor_ok = r.max_ancestors_in_sphere <= r.ancestor_bound;
    if (s.R > 0) {
        double x = std::log(static_cast<double>(N)) / s.R;
        r.growth_lower_ok = N > 0 && std::log(2.0) / b.Delta_plus - 4.0 * std::log(2.0) / s.R <= x;
        r.growth_upper_ok = x <= 1.0 + 3.0 * b.Delta_plus / s.R;
    } else {
        r.growth_lower_ok = r.growth_upper_ok = N == 1;
    }
    return r;
}

struct MultiplicativityReport {
    double R = 0, r = 0;
    std::size_t N_R = 0, N_Rr = 0;
    double sum_U = 0, sum_U_prime = 0;
    double sub_bound = 0, super_bound = 0;
    bool sub_ok = false, super_ok = false;
};

// N_{R+r} against the sums of N_r over U_R and U'_R.
inline MultiplicativityReport check_multiplicativity(const WeightLaw& law, std::uint64_t key, double R, double r,
                                                     const MetricConfig& cfg, std::size_t max_pants = 200'000) {
    if (R < 0 || r < 0) throw ArgumentError("radii must be nonnegative");
    TreeSurface t(TreeKind::binary, law, key, cfg, max_pants);
    BallGrower g(t);
    GrowthSnapshot a = g.snapshot(R);
    GrowthSnapshot b = g.snapshot(R + r);
    MultiplicativityReport m;
    m.R = R;
    m.r = r;
    m.N_R = a.N();
    m.N_Rr = b.N();
    for (auto p : a.U) m.sum_U += static_cast<double>(subtree_count(law, t.node(p).key, r, cfg, max_pants));
    for (auto p : a.U_prime)
        m.sum_U_prime += static_cast<double>(subtree_count(law, t.node(p).key, r, cfg, max_pants));
    PantsBounds pb = law.bounds();
    m.sub_bound = 2.0 * std::exp(4.0 * pb.Delta_plus) * m.sum_U;
    m.super_bound = std::exp(-4.0 * pb.Delta_plus) / 2.0 / (pb.Delta_plus / pb.delta_minus + 1.0) * m.sum_U_prime;
    m.sub_ok = static_cast<double>(m.N_Rr) <= m.sub_bound;
    m.super_ok = static_cast<double>(m.N_Rr) >= m.super_bound;
    return m;
}

inline std::uint64_t trial_tree_key(std::uint64_t seed, std::size_t trial) {
    return stream_seed(derive_seed(seed, trial), StreamTag::tree);
}

struct GrowthTrial {
    std::vector<std::size_t> N;     // per grid radius
    std::vector<std::size_t> ball;  // ball sizes
    bool truncated = false;
};

// Grows one binary tree per trial through the whole grid. A trial that hits
// the pants budget keeps the radii reached so far.
inline std::vector<GrowthTrial> growth_trials(const WeightLaw& law, const std::vector<double>& grid, int trials,
                                              std::uint64_t seed, const MetricConfig& cfg,
                                              std::size_t max_pants = 200'000, unsigned threads = 1) {
    std::vector<GrowthTrial> out(static_cast<std::size_t>(trials));
    parallel_for(
        out.size(),
        [&](std::size_t i) {
            TreeSurface t(TreeKind::binary, law, trial_tree_key(seed, i), cfg, max_pants);
            BallGrower g(t);
            try {
                for (double R : grid) {
                    GrowthSnapshot s = g.snapshot(R);
                    out[i].N.push_back(s.N());
                    out[i].ball.push_back(s.ball.size());
                }
            } catch (const ResourceError&) {
                out[i].truncated = true;
            }
        },
        threads);
    return out;
}

struct AlphaRow {
    double R = 0;
    double mean_N = 0;
    double sigma = 0;         // ln(mean N_R) / R
    double mean_log = 0;      // mean of ln N_R / R
    double sd_log = 0;        // standard deviation of ln N_R / R
    double band = 0;          // 15 Delta_+ / R
};

struct AlphaEstimate {
    std::vector<AlphaRow> rows;
    double alpha_hat = 0;
    double band = 0;
    double ci_lo = 0, ci_hi = 0;
    double lower_ref = 0, upper_ref = 0;  // ln2/Delta_+ and min(1, ln2/delta_-)
    bool truncated = false;
    std::string warning;
    std::vector<GrowthTrial> trials;
};

inline AlphaEstimate estimate_alpha(const WeightLaw& law, std::vector<double> grid, int trials, std::uint64_t seed,
                                    const MetricConfig& cfg, std::size_t max_pants = 200'000, unsigned threads = 1) {
    if (trials < 30) throw ArgumentError("estimate_alpha needs at least 30 trials");
    if (grid.empty() || !std::is_sorted(grid.begin(), grid.end()) || grid.front() <= 0)
        throw ArgumentError("grid must be positive and increasing");
    AlphaEstimate est;
    est.trials = growth_trials(law, grid, trials, seed, cfg, max_pants, threads);
    std::size_t usable = grid.size();
    for (const auto& t : est.trials) usable = std::min(usable, t.N.size());
    if (usable == 0) throw ResourceError("pants budget exceeded before the first grid radius");
    if (usable < grid.size()) {
        est.truncated = true;
        est.warning = "grid truncated at R = " + fmt17(grid[usable - 1]) + " (pants budget)";
    }
    PantsBounds b = law.bounds();
    for (std::size_t i = 0; i < usable; ++i) {
        AlphaRow row;
        row.R = grid[i];
        std::vector<double> n, lg;
        for (const auto& t : est.trials) {
            n.push_back(static_cast<double>(t.N[i]));
            lg.push_back(std::log(static_cast<double>(t.N[i])) / row.R);
        }
        row.mean_N = stats::mean(n);
        row.sigma = std::log(row.mean_N) / row.R;
        row.mean_log = stats::mean(lg);
        row.sd_log = stats::stddev(lg);
        row.band = 15.0 * b.Delta_plus / row.R;
        est.rows.push_back(row);
    }
    const AlphaRow& last = est.rows.back();
    est.alpha_hat = last.sigma;
    est.band = last.band;
    std::vector<double> nl;
    for (const auto& t : est.trials) nl.push_back(static_cast<double>(t.N[usable - 1]));
    auto ci = stats::bootstrap_ci(
        nl.size(),
        [&](const std::vector<std::size_t>& idx) {
            double s = 0;
            for (auto i : idx) s += nl[i];
            return std::log(s / static_cast<double>(idx.size())) / last.R;
        },
        1000, derive_seed(seed, 0xb0075ULL));
    est.ci_lo = ci.first;
    est.ci_hi = ci.second;
    est.lower_ref = std::log(2.0) / b.Delta_plus;
    est.upper_ref = std::min(1.0, std::log(2.0) / b.delta_minus);
    return est;
}

struct FullGrowth {
    double R = 0;
    std::size_t N_hat = 0;
    std::array<std::size_t, 3> branch{};  // N_R of the binary branch below each root cuff
    std::array<std::size_t, 3> copies{};  // binary copies missing one branch
    bool identity_ok = false;             // 2 N_hat == sum of copies
};

inline FullGrowth full_tree_growth(const WeightLaw& law, std::uint64_t key, double R, const MetricConfig& cfg,
                                   std::size_t max_pants = 200'000) {
    TreeSurface t(TreeKind::full, law, key, cfg, max_pants);
    FullGrowth f;
    f.R = R;
    f.N_hat = grow_ball(t, R).N();
    for (int c = 0; c < 3; ++c) f.branch[c] = subtree_count(law, child_key(key, c), R, cfg, max_pants);
    std::size_t sum = 0;
    for (int c = 0; c < 3; ++c) {
        f.copies[c] = f.branch[(c + 1) % 3] + f.branch[(c + 2) % 3];
        sum += f.copies[c];
    }
    f.identity_ok = 2 * f.N_hat == sum;
    return f;
}

struct GoodCount {
    std::size_t good = 0;
    std::size_t N = 0;
    std::size_t leaves = 0;
};

// Sphere pants that are leaves of the ball or whose entry boundary meets the
// ball inside the window [l/2 - 1, l/2 + 1].
inline GoodCount good_count(TreeSurface& t, BallGrower& g, const GrowthSnapshot& s) {
    const MetricGraph& mg = t.graph();
    GoodCount out;
    out.N = s.N();
    for (auto p : s.sphere) {
        bool leaf = true;
        for (int c : g.child_cuffs(static_cast<std::size_t>(p)))
            if (g.in_ball(t.node(p).child[c], s.R)) leaf = false;
        if (leaf) {
            ++out.leaves;
            ++out.good;
            continue;
        }
        double l = mg.half(static_cast<std::size_t>(p), 0), L = 2.0 * l;
        auto in_window = [&](double u) { return circ_dist(u, 0.5 * l, L) <= 1.0; };
        bool hit = false;
        for (int k = 0; k < mg.m() && !hit; ++k) {
            std::uint32_t n = mg.node(static_cast<std::size_t>(p), 0, k);
            if (g.paths().dist(n) <= s.R && in_window(mg.param(n))) hit = true;
        }
        const auto& nd = t.node(p);
        if (nd.parent >= 0 && !hit) {
            const MetricGraph::Side& side = mg.side(static_cast<std::size_t>(nd.parent), nd.parent_cuff);
            for (int k = 0; k < mg.m() && !hit; ++k) {
                std::uint32_t n = mg.node(static_cast<std::size_t>(nd.parent), nd.parent_cuff, k);
                if (g.paths().dist(n) <= s.R && in_window(mg.map_param(side, mg.param(n)))) hit = true;
            }
        }
        if (hit) ++out.good;
    }
    return out;
}

inline GoodCount good_count(const WeightLaw& law, std::uint64_t key, double R, const MetricConfig& cfg,
                            std::size_t max_pants = 200'000) {
    if (!law.fixed_length() || law.twist_kind != TwistKind::uniform)
        throw ArgumentError("good_count needs a fixed length and uniform twists");
    TreeSurface t(TreeKind::binary, law, key, cfg, max_pants);
    BallGrower g(t);
    GrowthSnapshot s = g.snapshot(R);
    return good_count(t, g, s);
}

struct SystoleReport {
    double min_loop = kInf;         // shortest loop with distinct endpoint lifts
    double min_translation = kInf;  // smallest translation length among their deck elements
    double cuff_loop_min = kInf;    // per base sample of a root cuff: shortest loop around that cuff
    double cuff_loop_max = 0;
    bool consistent = true;         // translation length never exceeds the loop length
    std::size_t loops = 0;
    std::size_t pants = 0;
    double spacing = 0;
    bool exact = true;  // every intra distance came from a complete search
};

// Lifted shortest paths from every sample of the root of a full tree, out to
// radius D. A node reached at two distinct lifts closes a loop whose deck
// element is nontrivial; its length bounds the systole from above.
inline SystoleReport systole_probe(const WeightLaw& law, std::uint64_t key, MetricConfig cfg, double radius = -1.0) {
    if (!law.fixed_length()) throw ArgumentError("systole_probe needs a fixed length");
    cfg.keep_elements = true;
    TreeSurface t(TreeKind::full, law, key, cfg);
    const MetricGraph& g = t.graph();
    const double l = law.l_minus(), L = 2.0 * l;
    SystoleReport rep;
    rep.spacing = L / cfg.m;
    const double D = radius > 0 ? radius : l + 2.0 * rep.spacing;
    for (int c = 0; c < 3; ++c) t.ensure_child(0, c);

    auto position = [&](std::uint32_t n, const Mat3& G) {
        std::size_t p = g.pants_of(n);
        return G * g.table(p)->geometry().cuff_point(g.cuff_of(n), g.param(n));
    };
    auto power = [](const Mat3& T, long n) {
        Mat3 r = Mat3::identity(), b = n < 0 ? inverse(T) : T;
        for (long i = 0; i < std::labs(n); ++i) r = r * b;
        return r;
    };
    // Chart change for the gluing arc from node a (on the parent side) to b.
    auto glue_step = [&](std::uint32_t parent_node, std::uint32_t child_node) {
        std::size_t p = g.pants_of(parent_node);
        int c = g.cuff_of(parent_node);
        const MetricGraph::Side& s = g.side(p, c);
        std::size_t q = g.pants_of(child_node);
        double t0 = -s.sign * s.offset;
        double u = g.param(child_node), tx = g.param(parent_node);
        long n = std::lround((s.sign * (tx - t0) - u) / L);
        Mat3 Ty = g.table(q)->geometry().cuff_translation(0);
        return t.child_frame(p, c) * power(Ty, n);
    };

    for (int c0 = 0; c0 < 3; ++c0) {
        Mat3 Tc = g.table(0)->geometry().cuff_translation(c0), Tci = inverse(Tc);
        for (int k0 = 0; k0 < cfg.m; ++k0) {
            std::uint32_t base = g.node(0, c0, k0);
            struct State {
                std::uint32_t node;
                Mat3 G;
                Vec3 x;
                double d;
            };
            std::vector<State> st;
            std::vector<std::vector<std::size_t>> lifts;
            using Item = std::pair<double, std::size_t>;
            std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
            std::vector<char> done;
            auto relax = [&](std::uint32_t n, const Mat3& G, double d) {
                if (d > D) return;
                if (lifts.size() <= n) lifts.resize(g.node_count());
                Vec3 x = position(n, G);
                for (auto id : lifts[n])
                    if (hdist(st[id].x, x) < 1e-6) {
                        if (d < st[id].d) {
                            st[id].d = d;
                            st[id].G = G;
                            pq.push({d, id});
                        }
                        return;
                    }
                st.push_back({n, G, x, d});
                done.push_back(0);
                lifts[n].push_back(st.size() - 1);
                pq.push({d, st.size() - 1});
            };
            relax(base, Mat3::identity(), 0.0);
            while (!pq.empty()) {
                auto [d, id] = pq.top();
                pq.pop();
                if (done[id] || d > st[id].d) continue;
                done[id] = 1;
                std::uint32_t n = st[id].node;
                std::size_t p = g.pants_of(n);
                int c = g.cuff_of(n);
                if (t.has_child_slot(p, c) && t.node(p).child[c] < 0) t.ensure_child(p, c);
                const auto& tab = g.table(p);
                if (!tab->all_exact()) rep.exact = false;
                Mat3 G = st[id].G;
                std::uint32_t base_n = g.node(p, 0, 0);
                g.for_each_neighbor(n, [&](std::uint32_t j, double w, ArcKind kind) {
                    if (kind != ArcKind::gluing) {
                        relax(j, G * tab->element(static_cast<int>(n - base_n), static_cast<int>(j - base_n)),
                              d + w);
                    } else if (g.side(p, c).canonical) {
                        relax(j, G * glue_step(n, j), d + w);
                    } else {
                        relax(j, G * inverse(glue_step(j, n)), d + w);
                    }
                });
            }
            double cuff_here = kInf;
            for (const auto& ls : lifts) {
                for (std::size_t a = 0; a < ls.size(); ++a)
                    for (std::size_t b = a + 1; b < ls.size(); ++b) {
                        const State& s1 = st[ls[a]];
                        const State& s2 = st[ls[b]];
                        double len = s1.d + s2.d;
                        Mat3 e = s1.G * inverse(s2.G);
                        ++rep.loops;
                        rep.min_loop = std::min(rep.min_loop, len);
                        double tl = translation_length(e);
                        rep.min_translation = std::min(rep.min_translation, tl);
                        if (tl > len + 1e-7) rep.consistent = false;
                        double dp = 0, dm = 0;
                        for (int i = 0; i < 9; ++i) {
                            dp = std::max(dp, std::abs(e.a[i] - Tc.a[i]));
                            dm = std::max(dm, std::abs(e.a[i] - Tci.a[i]));
                        }
                        if (std::min(dp, dm) < 1e-6) cuff_here = std::min(cuff_here, len);
                    }
            }
            rep.cuff_loop_min = std::min(rep.cuff_loop_min, cuff_here);
            rep.cuff_loop_max = std::max(rep.cuff_loop_max, cuff_here);
        }
    }
    rep.pants = t.size();
    return rep;
}

struct MarkovReport {
    double R = 0, r = 0;
    std::size_t trials = 0;
    std::vector<double> x, y;   // N_r of two cousin grandchildren of the first U_R member
    std::vector<double> fresh;  // N_r of unconditioned trees
    double chi2_p = 1.0, ks_p = 1.0;
    bool skipped = false;
    std::string note;
};

inline MarkovReport markov_independence_test(const WeightLaw& law, double R, double r, int trials, std::uint64_t seed,
                                             const MetricConfig& cfg, std::size_t max_pants = 200'000,
                                             unsigned threads = 1) {
    if (trials < 100) throw ArgumentError("markov_independence_test needs at least 100 trials");
    MarkovReport rep;
    rep.R = R;
    rep.r = r;
    rep.trials = static_cast<std::size_t>(trials);
    if (r <= 0) {
        rep.skipped = true;
        rep.note = "r = 0: every count equals 1";
        return rep;
    }
    rep.x.assign(trials, 0);
    rep.y.assign(trials, 0);
    rep.fresh.assign(trials, 0);
    parallel_for(
        static_cast<std::size_t>(trials),
        [&](std::size_t i) {
            std::uint64_t key = trial_tree_key(seed, i);
            TreeSurface t(TreeKind::binary, law, key, cfg, max_pants);
            GrowthSnapshot s = grow_ball(t, R);
            std::uint64_t top = t.node(static_cast<std::size_t>(s.U.front())).key;
            std::uint64_t g1 = child_key(child_key(top, 1), 1), g2 = child_key(child_key(top, 2), 1);
            rep.x[i] = static_cast<double>(subtree_count(law, g1, r, cfg, max_pants));
            rep.y[i] = static_cast<double>(subtree_count(law, g2, r, cfg, max_pants));
            std::uint64_t fk = stream_seed(derive_seed(seed ^ 0x5eed5eedULL, i), StreamTag::tree);
            rep.fresh[i] = static_cast<double>(subtree_count(law, fk, r, cfg, max_pants));
        },
        threads);
    std::vector<double> pooled = rep.x;
    pooled.insert(pooled.end(), rep.y.begin(), rep.y.end());
    double med = stats::quantile(pooled, 0.5);
    std::vector<double> table(4, 0);
    for (int i = 0; i < trials; ++i) table[(rep.x[i] > med ? 2 : 0) + (rep.y[i] > med ? 1 : 0)] += 1;
    rep.chi2_p = stats::chi2_independence_pvalue(table, 2, 2);
    rep.ks_p = stats::ks_two_sample_pvalue(rep.x, rep.fresh);
    return rep;
}

}  // namespace fnsurf
