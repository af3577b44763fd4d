#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "pants_geometry.hpp"
#include "random.hpp"

namespace fnsurf {

enum class LengthKind { point_mass, uniform, log_uniform };
enum class TwistKind { zero, uniform };

struct EdgeWeight {
    double length = 2.0;  // full cuff length
    double twist = 0.0;   // angle in [0, 2pi)
    double arc_twist() const { return twist / (2.0 * std::numbers::pi) * length; }
    bool operator==(const EdgeWeight&) const = default;
};

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, int line, const std::string& field) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(line, field, "not a number: '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Law of one edge weight. Lengths are full cuff lengths (2l).
struct WeightLaw {
    LengthKind length_kind = LengthKind::point_mass;
    double lo = 2.0, hi = 2.0;
    TwistKind twist_kind = TwistKind::uniform;

    static WeightLaw point(double length, TwistKind t = TwistKind::uniform) {
        return make(LengthKind::point_mass, length, length, t);
    }
    static WeightLaw uniform(double lo, double hi, TwistKind t = TwistKind::uniform) {
        return make(LengthKind::uniform, lo, hi, t);
    }
    static WeightLaw log_uniform(double lo, double hi, TwistKind t = TwistKind::uniform) {
        return make(LengthKind::log_uniform, lo, hi, t);
    }
    static WeightLaw make(LengthKind k, double lo, double hi, TwistKind t) {
        if (!(lo > 0) || !(hi >= lo) || !std::isfinite(hi)) throw ArgumentError("length support must satisfy 0 < lo <= hi");
        if (k == LengthKind::point_mass && lo != hi) throw ArgumentError("point mass needs lo == hi");
        WeightLaw w;
        w.length_kind = k;
        w.lo = lo;
        w.hi = hi;
        w.twist_kind = t;
        return w;
    }

    bool fixed_length() const { return length_kind == LengthKind::point_mass; }
    double l_minus() const { return 0.5 * lo; }
    double l_plus() const { return 0.5 * hi; }
    PantsBounds bounds() const { return pants_bounds(l_minus(), l_plus()); }

    template <class G>
    EdgeWeight draw(G& rng) const {
        EdgeWeight w;
        double u = uniform01(rng);
        double v = uniform01(rng);
        switch (length_kind) {
            case LengthKind::point_mass: w.length = lo; break;
            case LengthKind::uniform: w.length = lo + (hi - lo) * u; break;
            case LengthKind::log_uniform: w.length = lo * std::exp(std::log(hi / lo) * u); break;
        }
        w.twist = twist_kind == TwistKind::uniform ? 2.0 * std::numbers::pi * v : 0.0;
        return w;
    }

    // "point:2 uniform", "uniform:1:3 zero", "loguniform:0.5:4 uniform"
    std::string descriptor() const {
        std::string s;
        switch (length_kind) {
            case LengthKind::point_mass: s = "point:" + fmt17(lo); break;
            case LengthKind::uniform: s = "uniform:" + fmt17(lo) + ":" + fmt17(hi); break;
            case LengthKind::log_uniform: s = "loguniform:" + fmt17(lo) + ":" + fmt17(hi); break;
        }
        s += twist_kind == TwistKind::uniform ? " uniform" : " zero";
        return s;
    }

    static WeightLaw parse(const std::string& text, int line = 0) {
        std::istringstream in(text);
        std::string len, tw;
        in >> len >> tw;
        if (tw.empty()) tw = "uniform";
        TwistKind t;
        if (tw == "uniform") t = TwistKind::uniform;
        else if (tw == "zero") t = TwistKind::zero;
        else throw ParseError(line, "law", "unknown twist law '" + tw + "'");
        auto parts = split(len, ':');
        try {
            if (parts[0] == "point" && parts.size() == 2) return point(parse_double(parts[1], line, "law"), t);
            if (parts[0] == "uniform" && parts.size() == 3)
                return uniform(parse_double(parts[1], line, "law"), parse_double(parts[2], line, "law"), t);
            if (parts[0] == "loguniform" && parts.size() == 3)
                return log_uniform(parse_double(parts[1], line, "law"), parse_double(parts[2], line, "law"), t);
        } catch (const ArgumentError& e) {
            throw ParseError(line, "law", e.what());
        }
        throw ParseError(line, "law", "unknown length law '" + len + "'");
    }

    bool operator==(const WeightLaw&) const = default;
};

// Half-edge id h = 3 * vertex + slot; slot s is cuff s of the vertex's pants.
using HalfEdge = std::uint32_t;
inline std::uint32_t vertex_of(HalfEdge h) { return h / 3; }
inline int slot_of(HalfEdge h) { return static_cast<int>(h % 3); }

struct Pairing {
    std::vector<HalfEdge> mate;

    std::size_t n_vertices() const { return mate.size() / 3; }

    // Edges as (lower id, higher id), sorted by lower id.
    std::vector<std::pair<HalfEdge, HalfEdge>> edges() const {
        std::vector<std::pair<HalfEdge, HalfEdge>> e;
        for (HalfEdge h = 0; h < mate.size(); ++h)
            if (h < mate[h]) e.emplace_back(h, mate[h]);
        return e;
    }

    bool valid() const {
        if (mate.size() % 3 != 0 || mate.size() % 2 != 0) return false;
        for (HalfEdge h = 0; h < mate.size(); ++h)
            if (mate[h] >= mate.size() || mate[h] == h || mate[mate[h]] != h) return false;
        return true;
    }
    bool operator==(const Pairing&) const = default;
};

// Sequential configuration-model pairing: the lowest unpaired half-edge is
// matched with a uniformly chosen other unpaired half-edge.
inline Pairing sample_configuration(std::size_t n_vertices, Rng& rng) {
    if (n_vertices < 2 || n_vertices % 2 != 0) throw ArgumentError("n_vertices must be even and >= 2");
    std::size_t n = 3 * n_vertices;
    Pairing p;
    p.mate.assign(n, 0);
    std::size_t head = 0;
    std::vector<bool> used(n, false);
    std::vector<HalfEdge> rest;
    for (;;) {
        while (head < n && used[head]) ++head;
        if (head == n) break;
        HalfEdge a = static_cast<HalfEdge>(head);
        used[a] = true;
        rest.clear();
        for (std::size_t i = head + 1; i < n; ++i)
            if (!used[i]) rest.push_back(static_cast<HalfEdge>(i));
        HalfEdge b = rest[uniform_below(rng, rest.size())];
        used[b] = true;
        p.mate[a] = b;
        p.mate[b] = a;
    }
    return p;
}

struct WeightedSurfaceGraph {
    int genus = 2;
    std::uint64_t seed = 0;
    WeightLaw law;
    Pairing pairing;
    std::vector<EdgeWeight> weights;  // parallel to pairing.edges()

    std::size_t n_vertices() const { return pairing.n_vertices(); }
    std::vector<std::pair<HalfEdge, HalfEdge>> edges() const { return pairing.edges(); }

    // Index of the edge containing half-edge h.
    std::vector<std::size_t> edge_index() const {
        std::vector<std::size_t> idx(pairing.mate.size());
        auto e = edges();
        for (std::size_t i = 0; i < e.size(); ++i) idx[e[i].first] = idx[e[i].second] = i;
        return idx;
    }

    PantsShape shape(std::size_t v) const {
        auto idx = edge_index();
        return PantsShape(0.5 * weights[idx[3 * v]].length, 0.5 * weights[idx[3 * v + 1]].length,
                          0.5 * weights[idx[3 * v + 2]].length);
    }

    bool operator==(const WeightedSurfaceGraph&) const = default;
};

inline WeightedSurfaceGraph assign_weights(const Pairing& pairing, const WeightLaw& law, Rng& rng) {
    if (!pairing.valid()) throw ArgumentError("invalid pairing");
    WeightedSurfaceGraph g;
    g.pairing = pairing;
    g.law = law;
    g.genus = static_cast<int>(pairing.n_vertices() / 2 + 1);
    std::size_t ne = pairing.mate.size() / 2;
    g.weights.reserve(ne);
    for (std::size_t i = 0; i < ne; ++i) g.weights.push_back(law.draw(rng));
    return g;
}

// Pairing and weights come from separate streams of the same seed.
inline WeightedSurfaceGraph random_surface(int genus, const WeightLaw& law, std::uint64_t seed) {
    if (genus < 2) throw ArgumentError("genus must be at least 2");
    Rng pr = make_rng(stream_seed(seed, StreamTag::pairing));
    Rng wr = make_rng(stream_seed(seed, StreamTag::weights));
    Pairing p = sample_configuration(static_cast<std::size_t>(2 * genus - 2), pr);
    WeightedSurfaceGraph g = assign_weights(p, law, wr);
    g.seed = seed;
    return g;
}

struct Connectivity {
    bool connected;
    int components;
    std::vector<int> component;  // per vertex
};

inline Connectivity connectivity(const WeightedSurfaceGraph& g) {
    std::size_t n = g.n_vertices();
    std::vector<int> comp(n, -1);
    int c = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = c;
        stack.push_back(s);
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            for (int k = 0; k < 3; ++k) {
                std::size_t w = vertex_of(g.pairing.mate[3 * v + k]);
                if (comp[w] < 0) {
                    comp[w] = c;
                    stack.push_back(w);
                }
            }
        }
        ++c;
    }
    return {c == 1, c, comp};
}

// Text record, one field per line:
//   fnsurf-surface 1
//   genus <g>
//   seed <seed>
//   law <length-law> <twist-law>
//   pairing <a>-<b> ...        edges sorted by lower half-edge id
//   weights <length>,<twist> ...  parallel to pairing
inline std::string serialize(const WeightedSurfaceGraph& g) {
    std::string s = "fnsurf-surface 1\n";
    s += "genus " + std::to_string(g.genus) + "\n";
    s += "seed " + std::to_string(g.seed) + "\n";
    s += "law " + g.law.descriptor() + "\n";
    s += "pairing";
    for (auto [a, b] : g.edges()) s += " " + std::to_string(a) + "-" + std::to_string(b);
    s += "\nweights";
    for (const auto& w : g.weights) s += " " + fmt17(w.length) + "," + fmt17(w.twist);
    s += "\n";
    return s;
}

inline WeightedSurfaceGraph deserialize(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    auto next = [&](const std::string& key) {
        for (;;) {
            if (!std::getline(in, line)) throw ParseError(ln + 1, key, "unexpected end of record");
            ++ln;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) break;
        }
        std::istringstream ls(line);
        std::string k;
        ls >> k;
        if (k != key) throw ParseError(ln, key, "expected '" + key + "', found '" + k + "'");
        std::string rest;
        std::getline(ls, rest);
        auto b = rest.find_first_not_of(' ');
        return b == std::string::npos ? std::string() : rest.substr(b);
    };
    auto to_u64 = [&](const std::string& s, const std::string& field) {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(ln, field, "not an integer: '" + s + "'");
        return v;
    };

    WeightedSurfaceGraph g;
    if (next("fnsurf-surface") != "1") throw ParseError(ln, "fnsurf-surface", "unsupported version");
    g.genus = static_cast<int>(to_u64(next("genus"), "genus"));
    if (g.genus < 2) throw ParseError(ln, "genus", "genus must be at least 2");
    g.seed = to_u64(next("seed"), "seed");
    g.law = WeightLaw::parse(next("law"), ln + 1);

    std::size_t nh = 3 * static_cast<std::size_t>(2 * g.genus - 2);
    std::istringstream ps(next("pairing"));
    g.pairing.mate.assign(nh, static_cast<HalfEdge>(nh));
    std::string tok;
    std::size_t ne = 0;
    while (ps >> tok) {
        auto ab = split(tok, '-');
        if (ab.size() != 2) throw ParseError(ln, "pairing", "bad pair '" + tok + "'");
        auto a = to_u64(ab[0], "pairing"), b = to_u64(ab[1], "pairing");
        if (a >= nh || b >= nh || a == b) throw ParseError(ln, "pairing", "half-edge out of range in '" + tok + "'");
        if (g.pairing.mate[a] != nh || g.pairing.mate[b] != nh)
            throw ParseError(ln, "pairing", "half-edge paired twice in '" + tok + "'");
        g.pairing.mate[a] = static_cast<HalfEdge>(b);
        g.pairing.mate[b] = static_cast<HalfEdge>(a);
        ++ne;
    }
    if (ne * 2 != nh) throw ParseError(ln, "pairing", "expected " + std::to_string(nh / 2) + " pairs");

    std::istringstream ws(next("weights"));
    while (ws >> tok) {
        auto lt = split(tok, ',');
        if (lt.size() != 2) throw ParseError(ln, "weights", "bad weight '" + tok + "'");
        EdgeWeight w{parse_double(lt[0], ln, "weights"), parse_double(lt[1], ln, "weights")};
        if (!(w.length > 0)) throw ParseError(ln, "weights", "non-positive length");
        g.weights.push_back(w);
    }
    if (g.weights.size() != ne) throw ParseError(ln, "weights", "expected " + std::to_string(ne) + " weights");
    return g;
}

}  // namespace fnsurf
