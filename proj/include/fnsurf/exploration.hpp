#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "metric_engine.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "surface_model.hpp"

namespace fnsurf {

// Half-edges of a configuration model that are still unmatched, shared by
// every exploration running on the same surface.
class HalfEdgePool {
public:
    explicit HalfEdgePool(std::size_t n_vertices)
        : n_(n_vertices), mate_(3 * n_vertices, -1), pos_(3 * n_vertices), owner_(n_vertices, -1) {
        for (std::size_t h = 0; h < 3 * n_; ++h) {
            pos_[h] = free_.size();
            free_.push_back(static_cast<HalfEdge>(h));
        }
    }

    std::size_t n_vertices() const { return n_; }
    std::size_t free_count() const { return free_.size(); }
    const std::vector<HalfEdge>& free_list() const { return free_; }
    bool unpaired(HalfEdge h) const { return mate_[h] < 0; }
    std::int64_t mate(HalfEdge h) const { return mate_[h]; }
    int owner(std::uint32_t v) const { return owner_[v]; }
    void set_owner(std::uint32_t v, int id) { owner_[v] = id; }

    void pair(HalfEdge a, HalfEdge b, const EdgeWeight& w) {
        if (a == b || !unpaired(a) || !unpaired(b)) throw ArgumentError("half-edges must be distinct and unpaired");
        mate_[a] = b;
        mate_[b] = a;
        remove(a);
        remove(b);
        weight_[std::min(a, b)] = w;
    }

    // Uniform partner among the other unmatched half-edges.
    HalfEdge uniform_partner(HalfEdge e, Rng& rng) const {
        if (free_.size() < 2) throw ArgumentError("no partner left");
        std::size_t r = static_cast<std::size_t>(uniform_below(rng, free_.size() - 1));
        if (r >= pos_[e]) ++r;
        return free_[r];
    }

    const std::map<HalfEdge, EdgeWeight>& weights() const { return weight_; }

    Pairing pairing() const {
        Pairing p;
        p.mate.resize(mate_.size());
        for (std::size_t h = 0; h < mate_.size(); ++h) {
            if (mate_[h] < 0) throw ArgumentError("pairing is incomplete");
            p.mate[h] = static_cast<HalfEdge>(mate_[h]);
        }
        return p;
    }

private:
    void remove(HalfEdge h) {
        std::size_t i = pos_[h];
        HalfEdge last = free_.back();
        free_[i] = last;
        pos_[last] = i;
        free_.pop_back();
    }

    std::size_t n_;
    std::vector<std::int64_t> mate_;
    std::vector<HalfEdge> free_;
    std::vector<std::size_t> pos_;
    std::vector<int> owner_;
    std::map<HalfEdge, EdgeWeight> weight_;
};

// Supplies the partner of a selected half-edge and the weight of the new edge.
struct PairingSource {
    std::function<HalfEdge(HalfEdge, const HalfEdgePool&)> partner;
    std::function<EdgeWeight(HalfEdge, HalfEdge)> weight;
};

// Configuration-model step: uniform partner, then a weight, from one stream.
inline PairingSource uniform_source(const WeightLaw& law, Rng& rng) {
    return {[&rng](HalfEdge e, const HalfEdgePool& pool) { return pool.uniform_partner(e, rng); },
            [&law, &rng](HalfEdge, HalfEdge) { return law.draw(rng); }};
}

// Reveals a given surface.
inline PairingSource surface_source(const WeightedSurfaceGraph& s) {
    auto idx = std::make_shared<std::vector<std::size_t>>(s.edge_index());
    return {[&s](HalfEdge e, const HalfEdgePool&) { return s.pairing.mate[e]; },
            [&s, idx](HalfEdge a, HalfEdge) { return s.weights[(*idx)[a]]; }};
}

struct StepRecord {
    std::size_t step = 0;
    HalfEdge selected = 0;
    HalfEdge partner = 0;
    bool bad = false;
    double d_plus = 0;
    int hops = 0;
    std::size_t discovered = 0;  // after the step
    std::size_t unpaired = 0;    // unmatched half-edges of discovered pants, after the step
};

// Partial surface grown from one root. Unmatched cuffs have unknown length
// and act as walls; d_+ of such a cuff is the conservative seam-path bound
// from the nearest known sample of its pants, or 0 on the root.
class Explorer {
public:
    Explorer(HalfEdgePool& pool, int id, std::uint32_t root, const WeightLaw& law, MetricConfig cfg = {})
        : pool_(&pool), id_(id), root_(root), law_(law), graph_(cfg, law.l_minus(), law.l_plus()), sp_(graph_) {
        if (root >= pool.n_vertices()) throw ArgumentError("root out of range");
        if (pool.owner(root) >= 0) throw ArgumentError("root already discovered");
        discover(root);
    }

    std::uint32_t root() const { return root_; }
    int id() const { return id_; }
    std::size_t discovered() const { return vertices_.size(); }
    const std::vector<std::uint32_t>& vertices() const { return vertices_; }
    const std::set<HalfEdge>& frontier() const { return frontier_; }
    const MetricGraph& graph() const { return graph_; }
    bool owns(std::uint32_t v) const { return pool_->owner(v) == id_; }

    DistanceResult frontier_distance(HalfEdge e) const {
        if (!frontier_.count(e)) throw ArgumentError("boundary is not an unpaired cuff of the explored surface");
        std::uint32_t v = vertex_of(e);
        DistanceResult r;
        if (v == root_) {
            r.upper = r.lower = 0.0;
            return r;
        }
        std::size_t p = pants_.at(v);
        int target = slot_of(e);
        for (int c = 0; c < 3; ++c) {
            if (!graph_.known(p, c)) continue;
            for (int k = 0; k < graph_.m(); ++k) {
                std::uint32_t n = graph_.node(p, c, k);
                double d = sp_.dist(n);
                if (!std::isfinite(d)) continue;
                double u = d + graph_.bound_to_unknown(p, c, graph_.param(n), target);
                if (u < r.upper || (u == r.upper && sp_.hops(n) < r.hops)) {
                    r.upper = u;
                    r.hops = sp_.hops(n);
                }
            }
        }
        r.lower = std::isfinite(r.upper) ? std::max(0.0, r.upper - 2.0 * r.hops * graph_.spacing()) : kInf;
        return r;
    }

    // Minimizer of d_+, ties to the lowest half-edge id.
    std::pair<HalfEdge, DistanceResult> select() const {
        if (frontier_.empty()) throw ArgumentError("nothing left to explore");
        HalfEdge best = *frontier_.begin();
        DistanceResult bd = frontier_distance(best);
        for (HalfEdge e : frontier_) {
            DistanceResult d = frontier_distance(e);
            if (d.upper < bd.upper) {
                bd = d;
                best = e;
            }
        }
        return {best, bd};
    }

    // Matches e with f. Returns true for a bad step (f already discovered here).
    bool apply(HalfEdge e, HalfEdge f, const EdgeWeight& w) {
        if (!frontier_.count(e)) throw ArgumentError("selected half-edge is not on the frontier");
        std::uint32_t vf = vertex_of(f);
        if (pool_->owner(vf) >= 0 && pool_->owner(vf) != id_) throw ArgumentError("partner belongs to another exploration");
        bool bad = pool_->owner(vf) == id_;
        pool_->pair(e, f, w);
        frontier_.erase(e);
        frontier_.erase(f);
        if (!bad) discover(vf);
        std::size_t p = pants_.at(vertex_of(e)), q = pants_.at(vf);
        set_length(p, slot_of(e), 0.5 * w.length);
        set_length(q, slot_of(f), 0.5 * w.length);
        if (e < f)
            graph_.glue(p, slot_of(e), q, slot_of(f), w.arc_twist());
        else
            graph_.glue(q, slot_of(f), p, slot_of(e), w.arc_twist());
        sp_.sync();
        for (std::size_t x : {p, q})
            for (auto n : pants_nodes(graph_, x)) sp_.touch(n);
        sp_.run();
        return bad;
    }

private:
    void discover(std::uint32_t v) {
        pool_->set_owner(v, id_);
        pants_[v] = graph_.add_pants({std::nan(""), std::nan(""), std::nan("")}, law_.fixed_length());
        vertices_.push_back(v);
        for (int s = 0; s < 3; ++s) {
            HalfEdge h = 3 * v + static_cast<HalfEdge>(s);
            if (pool_->unpaired(h)) frontier_.insert(h);
        }
        sp_.sync();
    }

    void set_length(std::size_t p, int c, double half) {
        if (graph_.known(p, c)) return;
        graph_.set_half(p, c, half);
        sp_.sync();
        if (vertex_at(p) == root_)
            for (int k = 0; k < graph_.m(); ++k) sp_.add_source(graph_.node(p, c, k));
    }

    std::uint32_t vertex_at(std::size_t p) const { return vertices_[p]; }

    HalfEdgePool* pool_;
    int id_;
    std::uint32_t root_;
    WeightLaw law_;
    MetricGraph graph_;
    ShortestPaths sp_;
    std::map<std::uint32_t, std::size_t> pants_;
    std::vector<std::uint32_t> vertices_;
    std::set<HalfEdge> frontier_;
};

struct StopRule {
    enum class Kind { vertices, radius };
    Kind kind = Kind::vertices;
    double value = 0;
    static StopRule vertex_quota(double n) { return {Kind::vertices, n}; }
    static StopRule radius_quota(double R) { return {Kind::radius, R}; }
};

enum class StopReason { vertex_quota, radius_quota, premature, complete };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::vertex_quota: return "vertex_quota";
        case StopReason::radius_quota: return "radius_quota";
        case StopReason::premature: return "premature";
        case StopReason::complete: return "complete";
    }
    return "";
}

struct ExplorationReport {
    int genus = 0;
    StopReason reason = StopReason::complete;
    std::size_t steps = 0, bad_steps = 0, discovered = 0;
    double radius = 0;  // largest d_+ among selections
    std::vector<StepRecord> trace;
    std::size_t monotone_violations = 0;  // d_+ increased for some tracked boundary
    std::size_t ledger_violations = 0;    // unpaired != 3 + normal - 2 bad
    std::map<HalfEdge, double> last_d_plus;  // latest d_+ of every boundary seen on the frontier
};

// Runs the exploration from `root` on `pool` until the stop rule fires.
// Every frontier value of d_+ is tracked between steps.
inline ExplorationReport run_exploration(Explorer& ex, HalfEdgePool& pool, const PairingSource& src, StopRule stop,
                                         int genus = 0) {
    ExplorationReport rep;
    rep.genus = genus;
    std::size_t normal = 0;
    auto track = [&] {
        for (HalfEdge h : ex.frontier()) {
            double d = ex.frontier_distance(h).upper;
            auto it = rep.last_d_plus.find(h);
            if (it != rep.last_d_plus.end()) {
                if (d > it->second) ++rep.monotone_violations;
                it->second = d;
            } else {
                rep.last_d_plus[h] = d;
            }
        }
    };
    track();
    for (;;) {
        if (ex.frontier().empty()) {
            rep.reason = ex.discovered() == pool.n_vertices() ? StopReason::complete : StopReason::premature;
            break;
        }
        if (stop.kind == StopRule::Kind::vertices && static_cast<double>(ex.discovered()) >= stop.value) {
            rep.reason = StopReason::vertex_quota;
            break;
        }
        auto [e, d] = ex.select();
        if (stop.kind == StopRule::Kind::radius && d.upper > stop.value) {
            rep.reason = StopReason::radius_quota;
            break;
        }
        HalfEdge f = src.partner(e, pool);
        EdgeWeight w = src.weight(e, f);
        bool bad = ex.apply(e, f, w);
        StepRecord s;
        s.step = rep.steps++;
        s.selected = e;
        s.partner = f;
        s.bad = bad;
        s.d_plus = d.upper;
        s.hops = d.hops;
        s.discovered = ex.discovered();
        s.unpaired = ex.frontier().size();
        rep.radius = std::max(rep.radius, d.upper);
        if (bad)
            ++rep.bad_steps;
        else
            ++normal;
        if (s.unpaired != 3 + normal - 2 * rep.bad_steps) ++rep.ledger_violations;
        rep.trace.push_back(s);
        track();
    }
    rep.discovered = ex.discovered();
    return rep;
}

struct Exploration {
    ExplorationReport report;
    WeightedSurfaceGraph surface;  // completion of the explored pairing
};

// Explores a fresh configuration-model surface from vertex 0, then completes
// the pairing with the same stream so that the surface has the model's law.
inline Exploration explore(int genus, const WeightLaw& law, StopRule stop, std::uint64_t seed, MetricConfig cfg = {}) {
    if (genus < 2) throw ArgumentError("genus must be at least 2");
    std::size_t n = 2 * static_cast<std::size_t>(genus) - 2;
    Rng rng = make_rng(stream_seed(seed, StreamTag::pairing));
    HalfEdgePool pool(n);
    Explorer ex(pool, 0, 0, law, cfg);
    PairingSource src = uniform_source(law, rng);
    Exploration out;
    out.report = run_exploration(ex, pool, src, stop, genus);
    while (pool.free_count() > 0) {
        HalfEdge a = *std::min_element(pool.free_list().begin(), pool.free_list().end());
        HalfEdge b = pool.uniform_partner(a, rng);
        pool.pair(a, b, law.draw(rng));
    }
    out.surface.genus = genus;
    out.surface.seed = seed;
    out.surface.law = law;
    out.surface.pairing = pool.pairing();
    for (auto [a, b] : out.surface.pairing.edges()) out.surface.weights.push_back(pool.weights().at(a));
    return out;
}

// Exploration of a given surface from a given root.
inline ExplorationReport explore_surface(const WeightedSurfaceGraph& s, std::uint32_t root, StopRule stop,
                                         MetricConfig cfg = {}) {
    HalfEdgePool pool(s.n_vertices());
    Explorer ex(pool, 0, root, s.law, cfg);
    return run_exploration(ex, pool, surface_source(s), stop, s.genus);
}

struct RadiusComparison {
    bool skipped = false;  // graph exploration stopped before the quota
    double graph_radius = 0, tree_radius = 0;
    std::size_t bad_steps = 0;
    double allowance = 0;  // 5 Delta_+ per bad step plus 2 Delta_+
    bool ok() const { return skipped || graph_radius <= tree_radius + allowance; }
};

// Same seed, same selection rule, but every partner is a fresh pants, so the
// explored surface is a tree. Both runs draw one index and one weight per step.
inline RadiusComparison compare_with_tree(int genus, const WeightLaw& law, std::size_t n_star, std::uint64_t seed,
                                          MetricConfig cfg = {}) {
    RadiusComparison rc;
    Exploration ex = explore(genus, law, StopRule::vertex_quota(static_cast<double>(n_star)), seed, cfg);
    rc.graph_radius = ex.report.radius;
    rc.bad_steps = ex.report.bad_steps;
    rc.skipped = ex.report.reason != StopReason::vertex_quota;
    Rng rng = make_rng(stream_seed(seed, StreamTag::pairing));
    HalfEdgePool pool(n_star + 1);
    Explorer tree(pool, 0, 0, law, cfg);
    PairingSource src{[&](HalfEdge, const HalfEdgePool&) {
                          auto s = static_cast<HalfEdge>(uniform_below(rng, 3));
                          return static_cast<HalfEdge>(3 * tree.discovered()) + s;
                      },
                      [&](HalfEdge, HalfEdge) { return law.draw(rng); }};
    rc.tree_radius = run_exploration(tree, pool, src, StopRule::vertex_quota(static_cast<double>(n_star))).radius;
    double Dp = law.bounds().Delta_plus;
    rc.allowance = 5.0 * Dp * static_cast<double>(rc.bad_steps) + 2.0 * Dp;
    return rc;
}

struct TraceCheck {
    std::size_t final_violations = 0;    // final distance above d_+
    std::size_t breadth_violations = 0;  // later boundary closer than R_i - 2 Delta_+ - slack
    double worst_final_gap = -kInf;      // max of d_final - d_+
    double worst_breadth_gap = kInf;     // min of lower - (R_i - 2 Delta_+ - slack)
};

// Compares an exploration with distances on the completed surface.
inline TraceCheck check_against_surface(const ExplorationReport& rep, const WeightedSurfaceGraph& s,
                                        std::uint32_t root, MetricConfig cfg = {}) {
    MetricGraph g = build_metric_graph(s, cfg);
    ShortestPaths sp(g);
    for (auto n : pants_nodes(g, root)) sp.add_source(n);
    sp.run();
    auto final_of = [&](HalfEdge h) { return best_of(sp, cuff_nodes(g, vertex_of(h), slot_of(h))); };
    TraceCheck tc;
    for (auto [h, d] : rep.last_d_plus) {
        double gap = final_of(h).upper - d;
        tc.worst_final_gap = std::max(tc.worst_final_gap, gap);
        if (gap > 1e-9) ++tc.final_violations;
    }
    double Dp = s.law.bounds().Delta_plus, h = g.spacing();
    const auto& tr = rep.trace;
    std::vector<double> suffix_gap(tr.size() + 1, kInf);
    // lower(e_j) + slack_j, minimized over j > i
    for (std::size_t j = tr.size(); j-- > 0;) {
        DistanceResult r = final_of(tr[j].selected);
        double slack = 2.0 * h * r.hops + 2.0 * h;
        suffix_gap[j] = std::min(suffix_gap[j + 1], r.lower + slack);
    }
    for (std::size_t i = 0; i < tr.size(); ++i) {
        double need = tr[i].d_plus - 2.0 * Dp;
        double gap = suffix_gap[i + 1] - need;
        tc.worst_breadth_gap = std::min(tc.worst_breadth_gap, gap);
        if (gap < 0) ++tc.breadth_violations;
    }
    return tc;
}

inline void write_trace_csv(std::ostream& os, const ExplorationReport& rep) {
    os << "step,selected,partner,bad,d_plus,discovered,unpaired\n";
    for (const auto& s : rep.trace)
        os << s.step << ',' << s.selected << ',' << s.partner << ',' << (s.bad ? 1 : 0) << ',' << fmt17(s.d_plus)
           << ',' << s.discovered << ',' << s.unpaired << '\n';
}

struct Checkpoints {
    std::size_t steps_limit = 0;    // floor(g^beta)
    double k = 0;
    std::size_t vertex_mid = 0;     // ceil(g^(1/2 - 1/ln^{3/4} g))
    double mid_bound = 0;           // ln^{3/4} g
    std::size_t vertex_high = 0;    // ceil(sqrt(g) ln g)
    double high_bound = 0;          // ln^3 g
};

inline Checkpoints checkpoints(int genus, double beta, double k) {
    double g = genus, lg = std::log(g), l34 = std::pow(lg, 0.75);
    Checkpoints c;
    c.steps_limit = static_cast<std::size_t>(std::floor(std::pow(g, beta)));
    c.k = k;
    c.vertex_mid = static_cast<std::size_t>(std::ceil(std::pow(g, 0.5 - 1.0 / l34)));
    c.mid_bound = l34;
    c.vertex_high = static_cast<std::size_t>(std::ceil(std::sqrt(g) * lg));
    c.high_bound = lg * lg * lg;
    return c;
}

struct CheckpointCounts {
    std::size_t first_steps = 0;   // bad steps among the first steps_limit steps
    std::size_t before_mid = 0;    // bad steps made while fewer than vertex_mid vertices were discovered
    std::size_t before_high = 0;   // same for vertex_high
    bool viol_first = false, viol_mid = false, viol_high = false;
};

inline CheckpointCounts count_checkpoints(const ExplorationReport& rep, const Checkpoints& c) {
    CheckpointCounts out;
    std::size_t disc = 1;
    for (const auto& s : rep.trace) {
        if (s.bad) {
            if (s.step < c.steps_limit) ++out.first_steps;
            if (disc < c.vertex_mid) ++out.before_mid;
            if (disc < c.vertex_high) ++out.before_high;
        }
        disc = s.discovered;
    }
    out.viol_first = static_cast<double>(out.first_steps) >= c.k;
    out.viol_mid = static_cast<double>(out.before_mid) > c.mid_bound;
    out.viol_high = static_cast<double>(out.before_high) > c.high_bound;
    return out;
}

struct BadStepRow {
    int genus = 0;
    std::size_t trials = 0;
    Checkpoints cp;
    double frac_first = 0, frac_mid = 0, frac_high = 0;
    double mean_first = 0, mean_mid = 0, mean_high = 0;
    std::size_t first_step_bad = 0;  // runs whose very first step was bad
    std::size_t premature = 0;
};

inline std::vector<BadStepRow> badstep_stats(const std::vector<int>& genera, const WeightLaw& law, int trials,
                                             double beta, double k, std::uint64_t seed, MetricConfig cfg = {},
                                             unsigned threads = 1) {
    if (!(beta > 0 && beta < 0.5)) throw ArgumentError("beta must lie in (0, 1/2)");
    if (!(k > 2.0 / (1.0 - 2.0 * beta))) throw ArgumentError("k must exceed 2 / (1 - 2 beta)");
    std::vector<BadStepRow> rows;
    for (std::size_t gi = 0; gi < genera.size(); ++gi) {
        int g = genera[gi];
        Checkpoints cp = checkpoints(g, beta, k);
        std::size_t quota = std::max({cp.vertex_high, cp.vertex_mid, cp.steps_limit + 1});
        std::vector<CheckpointCounts> res(static_cast<std::size_t>(trials));
        std::vector<char> first_bad(res.size(), 0), prem(res.size(), 0);
        std::uint64_t gseed = derive_seed(seed, static_cast<std::uint64_t>(g));
        parallel_for(
            res.size(),
            [&](std::size_t t) {
                Exploration ex = explore(g, law, StopRule::vertex_quota(static_cast<double>(quota)),
                                         derive_seed(gseed, t), cfg);
                // keep going until the step checkpoint is covered as well
                res[t] = count_checkpoints(ex.report, cp);
                first_bad[t] = !ex.report.trace.empty() && ex.report.trace.front().bad;
                prem[t] = ex.report.reason == StopReason::premature;
            },
            threads);
        BadStepRow row;
        row.genus = g;
        row.trials = res.size();
        row.cp = cp;
        for (std::size_t t = 0; t < res.size(); ++t) {
            row.frac_first += res[t].viol_first;
            row.frac_mid += res[t].viol_mid;
            row.frac_high += res[t].viol_high;
            row.mean_first += static_cast<double>(res[t].first_steps);
            row.mean_mid += static_cast<double>(res[t].before_mid);
            row.mean_high += static_cast<double>(res[t].before_high);
            row.first_step_bad += first_bad[t];
            row.premature += prem[t];
        }
        double T = static_cast<double>(res.size());
        row.frac_first /= T;
        row.frac_mid /= T;
        row.frac_high /= T;
        row.mean_first /= T;
        row.mean_mid /= T;
        row.mean_high /= T;
        rows.push_back(row);
    }
    return rows;
}

struct MergeRun {
    bool merged = false;
    std::size_t merge_step = 0;  // total steps (both explorations) before the merging pairing
    std::size_t discovered_a = 0, discovered_b = 0;
};

// Two explorations sharing one half-edge pool, alternating A, B, A, ...
// Each stops at the vertex quota. A merge is a pairing that reaches a pants
// discovered by the other exploration.
inline MergeRun merge_run(int genus, const WeightLaw& law, double quota, std::uint32_t root_a, std::uint32_t root_b,
                          Rng& rng, MetricConfig cfg = {}) {
    MergeRun out;
    if (root_a == root_b) {
        out.merged = true;
        return out;
    }
    std::size_t n = 2 * static_cast<std::size_t>(genus) - 2;
    HalfEdgePool pool(n);
    Explorer a(pool, 0, root_a, law, cfg), b(pool, 1, root_b, law, cfg);
    Explorer* ex[2] = {&a, &b};
    std::size_t steps = 0;
    for (int turn = 0;; turn ^= 1) {
        auto active = [&](const Explorer& x) {
            return !x.frontier().empty() && static_cast<double>(x.discovered()) < quota;
        };
        if (!active(a) && !active(b)) break;
        Explorer& x = *ex[turn];
        if (!active(x)) continue;
        HalfEdge e = x.select().first;
        HalfEdge f = pool.uniform_partner(e, rng);
        int o = pool.owner(vertex_of(f));
        if (o >= 0 && o != x.id()) {
            out.merged = true;
            out.merge_step = steps;
            break;
        }
        x.apply(e, f, law.draw(rng));
        ++steps;
    }
    out.discovered_a = a.discovered();
    out.discovered_b = b.discovered();
    return out;
}

struct MergeStats {
    int genus = 0;
    double quota = 0;
    std::size_t trials = 0, merged = 0;
    double fraction = 0;
    std::vector<MergeRun> runs;
};

inline MergeStats merge_experiment(int genus, const WeightLaw& law, double quota, int trials, std::uint64_t seed,
                                   MetricConfig cfg = {}, unsigned threads = 1) {
    if (genus < 2) throw ArgumentError("genus must be at least 2");
    std::size_t n = 2 * static_cast<std::size_t>(genus) - 2;
    MergeStats st;
    st.genus = genus;
    st.quota = quota;
    st.trials = static_cast<std::size_t>(trials);
    st.runs.resize(st.trials);
    parallel_for(
        st.trials,
        [&](std::size_t t) {
            Rng rng = make_rng(derive_seed(seed, t));
            std::uint32_t ra = static_cast<std::uint32_t>(uniform_below(rng, n));
            std::uint32_t rb = static_cast<std::uint32_t>(uniform_below(rng, n - 1));
            if (rb >= ra) ++rb;
            st.runs[t] = merge_run(genus, law, quota, ra, rb, rng, cfg);
        },
        threads);
    for (const auto& r : st.runs) st.merged += r.merged;
    st.fraction = static_cast<double>(st.merged) / static_cast<double>(st.trials);
    return st;
}

struct DiameterBracket {
    bool connected = true;
    double engine_lower = 0, engine_upper = 0;  // metric engine estimate
    double lower = 0, upper = 0;                // exploration bracket
    bool contains() const { return lower <= engine_upper + 1e-9 && engine_upper <= upper + 1e-9; }
};

// Exploration bracket on a given connected surface. From each root the full
// exploration records the d_+ value at which every other pants is reached;
// with D_P the largest intra-pants arc, any two samples are within
// D_u + min(d_+^u(v), d_+^v(u)) + D_v. The breadth property gives
// max_u R_u - 2 Delta_+ - 2h as a lower bound, R_u the final radius from u.
inline DiameterBracket exploration_bracket(const WeightedSurfaceGraph& s, MetricConfig cfg = {}) {
    std::size_t n = s.n_vertices();
    MetricGraph g = build_metric_graph(s, cfg);
    DiameterBracket b;
    std::vector<double> D(n, 0.0);
    for (std::size_t p = 0; p < n; ++p)
        for (auto x : pants_nodes(g, p))
            g.for_each_neighbor(x, [&](std::uint32_t t, double w, ArcKind kind) {
                if (kind != ArcKind::gluing && g.pants_of(t) == p) D[p] = std::max(D[p], w);
            });
    std::vector<std::vector<double>> reach(n, std::vector<double>(n, kInf));
    double Dp = s.law.bounds().Delta_plus, h = g.spacing();
    for (std::uint32_t u = 0; u < n; ++u) {
        HalfEdgePool pool(n);
        Explorer ex(pool, 0, u, s.law, cfg);
        ExplorationReport rep = run_exploration(ex, pool, surface_source(s), StopRule::vertex_quota(kInf), s.genus);
        reach[u][u] = 0.0;
        for (const auto& st : rep.trace)
            if (!st.bad) {
                std::uint32_t v = vertex_of(st.partner);
                reach[u][v] = std::min(reach[u][v], st.d_plus);
            }
        b.lower = std::max(b.lower, rep.radius - 2.0 * Dp - 2.0 * h);
    }
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u; v < n; ++v)
            b.upper = std::max(b.upper, D[u] + std::min(reach[u][v], reach[v][u]) + D[v]);
    return b;
}

struct DiameterTrial {
    bool connected = true;
    DiameterBracket bracket;
    DiameterEstimate engine;
};

inline std::vector<DiameterTrial> diameter_by_exploration(int genus, const WeightLaw& law, int trials,
                                                          std::uint64_t seed, MetricConfig cfg = {},
                                                          unsigned threads = 1) {
    std::vector<DiameterTrial> out(static_cast<std::size_t>(trials));
    parallel_for(
        out.size(),
        [&](std::size_t t) {
            WeightedSurfaceGraph s = random_surface(genus, law, derive_seed(seed, t));
            if (!connectivity(s).connected) {
                out[t].connected = false;
                return;
            }
            MetricGraph g = build_metric_graph(s, cfg);
            out[t].engine = diameter_estimate(g);
            out[t].bracket = exploration_bracket(s, cfg);
            out[t].bracket.engine_lower = out[t].engine.lower;
            out[t].bracket.engine_upper = out[t].engine.upper;
        },
        threads);
    return out;
}

}  // namespace fnsurf
