#pragma once

// Reference computations written without the library's geometry code.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <queue>
#include <unordered_map>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

inline double seam_closed_form(double li, double lj, double lk) {
    return std::acosh((std::cosh(lk) + std::cosh(li) * std::cosh(lj)) / (std::sinh(li) * std::sinh(lj)));
}

// Disk automorphism w -> (a w + b) / (conj(b) w + conj(a)).
struct Mobius {
    cplx a{1, 0}, b{0, 0};
    cplx operator()(cplx w) const { return (a * w + b) / (std::conj(b) * w + std::conj(a)); }
    Mobius operator*(const Mobius& o) const {
        return {a * o.a + b * std::conj(o.b), a * o.b + b * std::conj(o.a)};
    }
    static Mobius forward(double d) { return {cplx(std::cosh(d / 2), 0), cplx(std::sinh(d / 2), 0)}; }
    static Mobius turn(double phi) { return {std::polar(1.0, phi / 2), cplx(0, 0)}; }
};

using H3 = std::array<double, 3>;

inline H3 to_hyperboloid(cplx z) {
    double r2 = std::norm(z);
    return {2 * z.real() / (1 - r2), 2 * z.imag() / (1 - r2), (1 + r2) / (1 - r2)};
}

inline double hyp_dist(const H3& x, const H3& y) {
    double ip = x[2] * y[2] - x[0] * y[0] - x[1] * y[1];
    return std::acosh(std::max(1.0, ip));
}

struct Hexagon {
    std::array<H3, 6> v;      // vertices, recentred
    double closure = 0;       // distance between the start and the end of the walk
};

// Turtle walk with left right-angle turns. Side order: cuff 0, seam(0,2),
// cuff 2, seam(2,1), cuff 1, seam(1,0), cuff sides of length l_c.
inline Hexagon hexagon(double l0, double l1, double l2) {
    double d02 = seam_closed_form(l0, l2, l1), d21 = seam_closed_form(l2, l1, l0), d10 = seam_closed_form(l1, l0, l2);
    std::array<double, 6> sides{l0, d02, l2, d21, l1, d10};
    Mobius M;
    std::array<cplx, 6> z;
    for (int i = 0; i < 6; ++i) {
        z[i] = M(0);
        M = M * Mobius::forward(sides[i]) * Mobius::turn(M_PI / 2);
    }
    cplx end = M(0);
    H3 c{0, 0, 0};
    for (auto w : z) {
        H3 x = to_hyperboloid(w);
        for (int k = 0; k < 3; ++k) c[k] += x[k];
    }
    double n = std::sqrt(c[2] * c[2] - c[0] * c[0] - c[1] * c[1]);
    for (auto& x : c) x /= n;
    cplx a(c[0] / (1 + c[2]), c[1] / (1 + c[2]));
    Hexagon h;
    for (int i = 0; i < 6; ++i) h.v[i] = to_hyperboloid((z[i] - a) / (1.0 - std::conj(a) * z[i]));
    h.closure = hyp_dist(to_hyperboloid(z[0]), to_hyperboloid(end));
    return h;
}

inline H3 lerp_geodesic(const H3& x, const H3& y, double t) {
    double d = hyp_dist(x, y);
    if (d < 1e-15) return x;
    double s0 = std::sinh((1 - t) * d) / std::sinh(d), s1 = std::sinh(t * d) / std::sinh(d);
    return {s0 * x[0] + s1 * y[0], s0 * x[1] + s1 * y[1], s0 * x[2] + s1 * y[2]};
}

struct GridAnswer {
    double distance;
    double spacing;  // largest hyperbolic length of a lattice step
    std::size_t interior;
};

// Shortest path in the doubled hexagon between cuff points (cuff, u),
// u in [0, 2 l_cuff). Parameters in [0, l] live on copy 0, the rest on copy 1
// at 2l - u; the three seam sides are shared by both copies.
inline GridAnswer doubled_hexagon_distance(double l0, double l1, double l2, int cp, double up, int cq, double uq,
                                           std::size_t target_interior = 10000) {
    const std::array<double, 3> L{l0, l1, l2};
    Hexagon hx = hexagon(l0, l1, l2);
    auto klein = [](const H3& x) { return std::array<double, 2>{x[0] / x[2], x[1] / x[2]}; };
    auto from_klein = [](double a, double b) {
        double w = 1.0 / std::sqrt(1 - a * a - b * b);
        return H3{a * w, b * w, w};
    };
    std::array<std::array<double, 2>, 6> K;
    for (int i = 0; i < 6; ++i) K[i] = klein(hx.v[i]);
    // side i runs from vertex i to vertex i+1; interior on the left
    auto inside = [&](double x, double y) {
        for (int i = 0; i < 6; ++i) {
            auto p = K[i], q = K[(i + 1) % 6];
            if ((q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]) <= 0) return false;
        }
        return true;
    };
    double area = 0, xmin = 1, xmax = -1, ymin = 1, ymax = -1;
    for (int i = 0; i < 6; ++i) {
        auto p = K[i], q = K[(i + 1) % 6];
        area += 0.5 * (p[0] * q[1] - q[0] * p[1]);
        xmin = std::min(xmin, p[0]);
        xmax = std::max(xmax, p[0]);
        ymin = std::min(ymin, p[1]);
        ymax = std::max(ymax, p[1]);
    }
    double s = std::sqrt(area / static_cast<double>(target_interior));

    struct Node {
        double kx, ky;
        H3 x;
        int copies;  // bit mask
    };
    std::vector<Node> nodes;
    auto add = [&](const H3& x, int copies) {
        auto k = klein(x);
        nodes.push_back({k[0], k[1], x, copies});
        return nodes.size() - 1;
    };
    std::size_t interior = 0;
    int nx = static_cast<int>((xmax - xmin) / s) + 2, ny = static_cast<int>((ymax - ymin) / s) + 2;
    std::map<std::pair<int, int>, std::size_t> lattice;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            double x = xmin + i * s, y = ymin + j * s;
            if (!inside(x, y)) continue;
            H3 h = from_klein(x, y);
            lattice[{i, j}] = add(h, 1);
            add(h, 2);
            ++interior;
        }
    double spacing = 0;
    for (auto& [ij, id] : lattice) {
        for (auto nb : {std::pair<int, int>{ij.first + 1, ij.second}, std::pair<int, int>{ij.first, ij.second + 1}}) {
            auto it = lattice.find(nb);
            if (it != lattice.end()) spacing = std::max(spacing, hyp_dist(nodes[id].x, nodes[it->second].x));
        }
    }
    // boundary samples at half the lattice step
    for (int i = 0; i < 6; ++i) {
        auto p = K[i], q = K[(i + 1) % 6];
        int cnt = static_cast<int>(std::hypot(q[0] - p[0], q[1] - p[1]) / (0.5 * s)) + 1;
        bool seam = i % 2 == 1;
        for (int t = 0; t < cnt; ++t) {
            double f = static_cast<double>(t) / cnt;
            H3 h = from_klein(p[0] + f * (q[0] - p[0]), p[1] + f * (q[1] - p[1]));
            if (seam) {
                add(h, 3);
            } else {
                add(h, 1);
                add(h, 2);
            }
        }
    }
    // cuff c runs from its parameter-0 vertex to its parameter-l vertex
    const std::array<std::pair<int, int>, 3> ends{{{0, 1}, {5, 4}, {3, 2}}};
    auto cuff_node = [&](int c, double u) {
        double l = L[c], uu = std::fmod(u, 2 * l);
        if (uu < 0) uu += 2 * l;
        int copy = uu <= l ? 1 : 2;
        double v = uu <= l ? uu : 2 * l - uu;
        H3 x = lerp_geodesic(hx.v[ends[c].first], hx.v[ends[c].second], v / l);
        return add(x, copy);
    };
    std::size_t src = cuff_node(cp, up), dst = cuff_node(cq, uq);

    double R = 3.0 * s;
    std::unordered_map<long long, std::vector<std::size_t>> cells;
    auto key = [&](double x, double y) {
        long long a = static_cast<long long>(std::floor(x / R)), b = static_cast<long long>(std::floor(y / R));
        return a * 1000003LL + b;
    };
    for (std::size_t i = 0; i < nodes.size(); ++i) cells[key(nodes[i].kx, nodes[i].ky)].push_back(i);

    std::vector<double> dist(nodes.size(), INFINITY);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[src] = 0;
    pq.push({0, src});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        if (u == dst) break;
        const Node& a = nodes[u];
        long long cx = static_cast<long long>(std::floor(a.kx / R)), cy = static_cast<long long>(std::floor(a.ky / R));
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                auto it = cells.find((cx + dx) * 1000003LL + (cy + dy));
                if (it == cells.end()) continue;
                for (std::size_t v : it->second) {
                    const Node& b = nodes[v];
                    if (v == u || !(a.copies & b.copies)) continue;
                    if (std::hypot(a.kx - b.kx, a.ky - b.ky) > R) continue;
                    double nd = d + hyp_dist(a.x, b.x);
                    if (nd < dist[v]) {
                        dist[v] = nd;
                        pq.push({nd, v});
                    }
                }
            }
    }
    return {dist[dst], spacing, interior};
}

// Perfect matchings of {0..n-1}, n even, in lexicographic order.
inline void all_matchings(std::vector<int>& mate, std::vector<std::vector<int>>& out) {
    int n = static_cast<int>(mate.size()), first = -1;
    for (int i = 0; i < n; ++i)
        if (mate[i] < 0) {
            first = i;
            break;
        }
    if (first < 0) {
        out.push_back(mate);
        return;
    }
    for (int j = first + 1; j < n; ++j)
        if (mate[j] < 0) {
            mate[first] = j;
            mate[j] = first;
            all_matchings(mate, out);
            mate[first] = mate[j] = -1;
        }
}

}  // namespace oracle
