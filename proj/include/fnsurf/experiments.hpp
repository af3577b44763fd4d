#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "exploration.hpp"
#include "metric_engine.hpp"
#include "pants_geometry.hpp"
#include "stats.hpp"
#include "surface_model.hpp"
#include "tree_surface.hpp"

namespace fnsurf {

// Flat key=value configuration. Lines starting with '#' are comments.
class ExperimentConfig {
public:
    static ExperimentConfig parse(std::istream& in) {
        ExperimentConfig c;
        std::string line;
        int no = 0;
        while (std::getline(in, line)) {
            ++no;
            auto b = line.find_first_not_of(" \t\r");
            if (b == std::string::npos || line[b] == '#') continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError(no, "", "expected key=value");
            std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
            if (k.empty()) throw ParseError(no, "", "empty key");
            c.values_[k] = v;
        }
        return c;
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ArgumentError("cannot read config file " + path);
        return parse(f);
    }

    void set(const std::string& k, const std::string& v) { values_[k] = v; }
    bool has(const std::string& k) const { return values_.count(k) > 0; }
    void set_default(const std::string& k, const std::string& v) {
        if (!has(k)) values_[k] = v;
    }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string str(const std::string& k) const {
        auto it = values_.find(k);
        if (it == values_.end()) throw ArgumentError("missing config key '" + k + "'");
        return it->second;
    }
    double num(const std::string& k) const { return parse_double(str(k), 0, k); }
    long integer(const std::string& k) const {
        double v = num(k);
        if (v != std::floor(v)) throw ArgumentError("config key '" + k + "' must be an integer");
        return static_cast<long>(v);
    }
    std::uint64_t seed() const {
        if (!has("seed")) throw ArgumentError("--seed is required");
        const std::string v = str("seed");
        if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
            throw ArgumentError("seed must be a non-negative integer");
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw ArgumentError("seed does not fit in 64 bits");
        }
    }
    std::vector<double> list(const std::string& k) const {
        std::vector<double> out;
        for (const auto& s : split(str(k), ',')) out.push_back(parse_double(trim(s), 0, k));
        return out;
    }
    std::vector<WeightLaw> laws(const std::string& k) const {
        std::vector<WeightLaw> out;
        for (const auto& s : split(str(k), ';'))
            if (!trim(s).empty()) out.push_back(WeightLaw::parse(trim(s)));
        return out;
    }
    MetricConfig metric() const {
        MetricConfig m;
        if (has("m")) m.m = static_cast<int>(integer("m"));
        if (has("word_cap")) m.word_cap = static_cast<int>(integer("word_cap"));
        return m;
    }

    // Keys that change results, sorted, one per line.
    std::string canonical() const {
        std::string s;
        for (const auto& [k, v] : values_)
            if (k != "out" && k != "threads" && k != "config") s += k + "=" + v + "\n";
        return s;
    }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }
    std::map<std::string, std::string> values_;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    template <class... T>
    void add(const T&... v) {
        rows.push_back({cell(v)...});
    }

    std::string csv() const {
        std::string s;
        for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
        s += '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
            s += '\n';
        }
        return s;
    }

    static std::string cell(const std::string& v) {
        if (v.find_first_of(",\"\n") == std::string::npos) return v;
        std::string q = "\"";
        for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    static std::string cell(const char* v) { return cell(std::string(v)); }
    static std::string cell(double v) { return fmt17(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    template <class I>
    static std::enable_if_t<std::is_integral_v<I>, std::string> cell(I v) {
        return std::to_string(v);
    }
};

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

// What a command produces; the driver adds digests and writes files.
struct ExperimentResult {
    std::string command;
    std::map<std::string, Table> tables;  // file name -> table
    std::string primary;                  // table printed when no output directory is given
    std::vector<Check> checks;
    std::vector<std::uint64_t> trial_seeds;
    std::vector<std::string> notes;
};

inline std::string law_label(const WeightLaw& w) { return w.descriptor(); }

// Mixed laws used when none are given for growth checks.
inline std::string default_growth_laws() {
    return "point:2 uniform;point:1 uniform;point:8 uniform;uniform:1:4 uniform;loguniform:0.5:6 zero";
}

inline std::string lsweep_laws() { return "point:1 uniform;point:2 uniform;point:4 uniform;point:8 uniform"; }

inline ExperimentResult run_growth(ExperimentConfig c) {
    c.set_default("laws", default_growth_laws());
    c.set_default("grid", "0,3,6,9,12");
    c.set_default("trials", "20");
    c.set_default("m", "8");
    c.set_default("bins", "30");
    c.set_default("max_pants", "200000");
    std::uint64_t seed = c.seed();
    auto laws = c.laws("laws");
    auto grid = c.list("grid");
    int trials = static_cast<int>(c.integer("trials"));
    int bins = static_cast<int>(c.integer("bins"));
    auto max_pants = static_cast<std::size_t>(c.integer("max_pants"));
    unsigned threads = c.has("threads") ? static_cast<unsigned>(c.integer("threads")) : 1;
    if (trials < 1) throw ArgumentError("trials must be positive");
    std::sort(grid.begin(), grid.end());
    MetricConfig mc = c.metric();

    ExperimentResult out;
    out.command = "growth";
    out.primary = "growth.csv";
    Table& t = out.tables["growth.csv"];
    t.columns = {"law", "R", "trials", "mean_N", "sd_N", "mean_ball", "mean_log_rate", "sd_log_rate", "violations"};
    Table& h = out.tables["growth_hist.csv"];
    h.columns = {"law", "R", "bin_lo", "bin_hi", "count"};
    std::size_t total_viol = 0;
    for (std::size_t li = 0; li < laws.size(); ++li) {
        const WeightLaw& law = laws[li];
        std::uint64_t lseed = derive_seed(seed, li);
        std::vector<std::vector<double>> N(grid.size()), B(grid.size());
        std::vector<std::vector<std::size_t>> viol(grid.size(), std::vector<std::size_t>(trials, 0));
        std::vector<std::vector<double>> n_tr(trials), b_tr(trials);
        parallel_for(
            static_cast<std::size_t>(trials),
            [&](std::size_t i) {
                TreeSurface tree(TreeKind::binary, law, trial_tree_key(lseed, i), mc, max_pants);
                BallGrower g(tree);
                try {
                    for (std::size_t k = 0; k < grid.size(); ++k) {
                        GrowthSnapshot s = g.snapshot(grid[k]);
                        viol[k][i] = check_snapshot(tree, s).all() ? 0 : 1;
                        n_tr[i].push_back(static_cast<double>(s.N()));
                        b_tr[i].push_back(static_cast<double>(s.ball.size()));
                    }
                } catch (const ResourceError&) {
                }
            },
            threads);
        for (int i = 0; i < trials; ++i) {
            out.trial_seeds.push_back(trial_tree_key(lseed, static_cast<std::size_t>(i)));
            for (std::size_t k = 0; k < n_tr[i].size(); ++k) {
                N[k].push_back(n_tr[i][k]);
                B[k].push_back(b_tr[i][k]);
            }
        }
        for (std::size_t k = 0; k < grid.size(); ++k) {
            std::size_t v = 0;
            for (auto x : viol[k]) v += x;
            total_viol += v;
            std::vector<double> rate;
            if (grid[k] > 0)
                for (double n : N[k]) rate.push_back(std::log(n) / grid[k]);
            t.add(law_label(law), grid[k], N[k].size(), stats::mean(N[k]), stats::stddev(N[k]), stats::mean(B[k]),
                  stats::mean(rate), stats::stddev(rate), v);
            if (rate.empty()) continue;
            // fixed bins of ln N_R / R over [0, 1.5]
            std::vector<std::size_t> cnt(static_cast<std::size_t>(bins), 0);
            double w = 1.5 / bins;
            for (double r : rate)
                ++cnt[static_cast<std::size_t>(std::clamp(static_cast<int>(r / w), 0, bins - 1))];
            for (int b = 0; b < bins; ++b) h.add(law_label(law), grid[k], b * w, (b + 1) * w, cnt[b]);
        }
        if (N.back().size() < static_cast<std::size_t>(trials))
            out.notes.push_back(law_label(law) + ": some trials stopped at the pants budget");
    }
    out.checks.push_back({"deterministic growth bounds", total_viol == 0, std::to_string(total_viol) + " violations"});
    return out;
}

inline ExperimentResult run_alpha(ExperimentConfig c) {
    bool sweep = c.has("preset") && c.str("preset") == "lsweep";
    if (c.has("preset") && !sweep) throw ArgumentError("unknown alpha preset '" + c.str("preset") + "'");
    if (sweep) c.set_default("laws", lsweep_laws());
    c.set_default("laws", "point:2 uniform");
    c.set_default("grid", "2,4,6,8,10");
    c.set_default("trials", "200");
    c.set_default("m", "16");
    c.set_default("max_pants", "200000");
    std::uint64_t seed = c.seed();
    auto laws = c.laws("laws");
    auto grid = c.list("grid");
    int trials = static_cast<int>(c.integer("trials"));
    auto max_pants = static_cast<std::size_t>(c.integer("max_pants"));
    unsigned threads = c.has("threads") ? static_cast<unsigned>(c.integer("threads")) : 1;
    MetricConfig mc = c.metric();

    ExperimentResult out;
    out.command = "alpha";
    out.primary = "alpha.csv";
    Table& t = out.tables["alpha.csv"];
    t.columns = {"law", "l_minus", "l_plus", "alpha_hat", "band", "ci_lo", "ci_hi", "lower_ref", "upper_ref",
                 "in_bracket", "truncated"};
    Table& rows = out.tables["alpha_rows.csv"];
    rows.columns = {"law", "R", "mean_N", "sigma", "mean_log", "sd_log", "band"};
    std::vector<double> ah;
    bool all_in = true, any_trunc = false;
    for (std::size_t li = 0; li < laws.size(); ++li) {
        const WeightLaw& law = laws[li];
        std::uint64_t lseed = derive_seed(seed, li);
        AlphaEstimate a = estimate_alpha(law, grid, trials, lseed, mc, max_pants, threads);
        for (int i = 0; i < trials; ++i) out.trial_seeds.push_back(trial_tree_key(lseed, static_cast<std::size_t>(i)));
        bool in = a.alpha_hat >= a.lower_ref - a.band && a.alpha_hat <= a.upper_ref + a.band;
        all_in = all_in && in;
        any_trunc = any_trunc || a.truncated;
        t.add(law_label(law), law.l_minus(), law.l_plus(), a.alpha_hat, a.band, a.ci_lo, a.ci_hi, a.lower_ref,
              a.upper_ref, in, a.truncated);
        for (const auto& r : a.rows) rows.add(law_label(law), r.R, r.mean_N, r.sigma, r.mean_log, r.sd_log, r.band);
        if (!a.warning.empty()) out.notes.push_back(law_label(law) + ": " + a.warning);
        ah.push_back(a.alpha_hat);
    }
    out.checks.push_back({"alpha within bracket", all_in, ""});
    if (any_trunc) out.notes.push_back("partial output: pants budget reached");
    if (sweep) {
        bool inc = true;
        for (std::size_t i = 1; i < ah.size(); ++i) inc = inc && ah[i] > ah[i - 1];
        out.checks.push_back({"alpha increasing in l", inc, ""});
        out.checks.push_back({"alpha at l=4 at least 0.6", ah.back() >= 0.6, fmt17(ah.back())});
    }
    return out;
}

// Dumbbell genus-2 surface: the edge between the two pants is separating.
inline WeightedSurfaceGraph collar_surface(double short_length, double other_length, Rng& rng) {
    WeightedSurfaceGraph s;
    s.genus = 2;
    s.law = WeightLaw::make(LengthKind::uniform, std::min(short_length, other_length),
                            std::max(short_length, other_length), TwistKind::uniform);
    s.pairing.mate = {3, 2, 1, 0, 5, 4};
    const double tau = 2.0 * std::numbers::pi;
    double t0 = tau * uniform01(rng), t1 = tau * uniform01(rng), t2 = tau * uniform01(rng);
    s.weights = {{short_length, t0}, {other_length, t1}, {other_length, t2}};
    return s;
}

inline ExperimentResult run_collar(ExperimentConfig c) {
    c.set_default("short", "0.01");
    c.set_default("length", "2");
    c.set_default("instances", "10");
    c.set_default("m", "16");
    std::uint64_t seed = c.seed();
    double sl = c.num("short"), ol = c.num("length");
    int n = static_cast<int>(c.integer("instances"));
    MetricConfig mc = c.metric();
    ExperimentResult out;
    out.command = "diameter";
    out.primary = "collar.csv";
    Table& t = out.tables["collar.csv"];
    t.columns = {"instance", "short", "length", "diam_lower", "diam_upper", "bound", "ok"};
    double bound = 2.0 * collar_width(sl);
    bool all = true;
    for (int i = 0; i < n; ++i) {
        std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
        out.trial_seeds.push_back(s);
        Rng rng = make_rng(s);
        WeightedSurfaceGraph surf = collar_surface(sl, ol, rng);
        MetricGraph g = build_metric_graph(surf, mc);
        DiameterEstimate d = diameter_estimate(g);
        bool ok = d.lower >= bound;
        all = all && ok;
        t.add(i, sl, ol, d.lower, d.upper, bound, ok);
    }
    out.checks.push_back({"collar diameter lower bound", all, "bound " + fmt17(bound)});
    return out;
}

inline ExperimentResult run_diameter(ExperimentConfig c) {
    if (c.has("preset") && c.str("preset") == "collar") return run_collar(c);
    if (c.has("preset") && c.str("preset") != "scaling") throw ArgumentError("unknown diameter preset");
    c.set_default("genera", "12,22,42,82");
    c.set_default("law", "point:2 uniform");
    c.set_default("trials", "20");
    c.set_default("m", "16");
    c.set_default("max_draws", "200");
    std::uint64_t seed = c.seed();
    auto gl = c.list("genera");
    WeightLaw law = WeightLaw::parse(c.str("law"));
    int trials = static_cast<int>(c.integer("trials"));
    int max_draws = static_cast<int>(c.integer("max_draws"));
    unsigned threads = c.has("threads") ? static_cast<unsigned>(c.integer("threads")) : 1;
    MetricConfig mc = c.metric();
    for (std::size_t i = 1; i < gl.size(); ++i)
        if (gl[i] <= gl[i - 1]) throw ArgumentError("genus list must be ascending");

    ExperimentResult out;
    out.command = "diameter";
    out.primary = "diameter.csv";
    Table& t = out.tables["diameter.csv"];
    t.columns = {"genus", "trials", "disconnected", "mean_diam", "min_diam", "max_diam", "mean_lower", "mean_upper"};
    std::vector<double> xs, ys;
    for (double gd : gl) {
        int g = static_cast<int>(gd);
        std::uint64_t gseed = derive_seed(seed, static_cast<std::uint64_t>(g));
        // draw in batches so that the accepted set depends only on draw order
        std::vector<DiameterEstimate> got;
        std::size_t disconnected = 0;
        int next = 0;
        while (static_cast<int>(got.size()) < trials && next < max_draws) {
            int batch = std::min(trials - static_cast<int>(got.size()), max_draws - next);
            std::vector<DiameterEstimate> est(static_cast<std::size_t>(batch));
            std::vector<char> conn(static_cast<std::size_t>(batch), 0);
            parallel_for(
                est.size(),
                [&](std::size_t i) {
                    WeightedSurfaceGraph s = random_surface(g, law, derive_seed(gseed, next + i));
                    if (!connectivity(s).connected) return;
                    conn[i] = 1;
                    est[i] = diameter_estimate(build_metric_graph(s, mc));
                },
                threads);
            for (int i = 0; i < batch; ++i) {
                out.trial_seeds.push_back(derive_seed(gseed, static_cast<std::uint64_t>(next + i)));
                if (conn[i])
                    got.push_back(est[i]);
                else
                    ++disconnected;
            }
            next += batch;
        }
        std::vector<double> up, lo;
        for (const auto& d : got) {
            up.push_back(d.upper);
            lo.push_back(d.lower);
        }
        double mean_up = stats::mean(up);
        t.add(g, got.size(), disconnected, mean_up, *std::min_element(up.begin(), up.end()),
              *std::max_element(up.begin(), up.end()), stats::mean(lo), mean_up);
        xs.push_back(std::log(gd));
        ys.push_back(mean_up);
    }
    Table& f = out.tables["diameter_fit.csv"];
    f.columns = {"slope", "intercept", "inv_alpha", "ratio"};
    stats::LineFit fit = stats::least_squares(xs, ys);
    double inv_alpha = std::nan("");
    if (c.has("alpha")) {
        inv_alpha = 1.0 / c.num("alpha");
    } else {
        AlphaEstimate a = estimate_alpha(law, {2, 4, 6, 8, 10}, 200, derive_seed(seed, 0xa1fa), mc, 200000, threads);
        inv_alpha = 1.0 / a.alpha_hat;
    }
    double ratio = fit.slope / inv_alpha;
    f.add(fit.slope, fit.intercept, inv_alpha, ratio);
    bool inc = true;
    for (std::size_t i = 1; i < ys.size(); ++i) inc = inc && ys[i] > ys[i - 1];
    out.checks.push_back({"diameter increasing in genus", inc, ""});
    out.checks.push_back({"slope within 25% of 1/alpha", std::abs(ratio - 1.0) <= 0.25, "ratio " + fmt17(ratio)});
    return out;
}

inline ExperimentResult run_explore(ExperimentConfig c) {
    c.set_default("genera", "12,22,42,82");
    c.set_default("law", "point:2 uniform");
    c.set_default("trials", "200");
    c.set_default("beta", "0.4");
    c.set_default("k", "11");
    c.set_default("m", "8");
    c.set_default("merge_trials", "100");
    std::uint64_t seed = c.seed();
    auto gl = c.list("genera");
    WeightLaw law = WeightLaw::parse(c.str("law"));
    int trials = static_cast<int>(c.integer("trials"));
    int mtrials = static_cast<int>(c.integer("merge_trials"));
    double beta = c.num("beta"), k = c.num("k");
    unsigned threads = c.has("threads") ? static_cast<unsigned>(c.integer("threads")) : 1;
    MetricConfig mc = c.metric();
    std::vector<int> genera;
    for (double g : gl) genera.push_back(static_cast<int>(g));

    ExperimentResult out;
    out.command = "explore";
    out.primary = "checkpoints.csv";
    Table& t = out.tables["checkpoints.csv"];
    t.columns = {"genus", "trials", "steps_limit", "k", "vertex_mid", "mid_bound", "vertex_high", "high_bound",
                 "viol_first", "viol_mid", "viol_high", "mean_bad_first", "mean_bad_mid", "mean_bad_high",
                 "first_step_bad", "first_step_rate", "premature"};
    auto rows = badstep_stats(genera, law, trials, beta, k, derive_seed(seed, 1), mc, threads);
    bool ok = true;
    for (const auto& r : rows) {
        t.add(r.genus, r.trials, r.cp.steps_limit, r.cp.k, r.cp.vertex_mid, r.cp.mid_bound, r.cp.vertex_high,
              r.cp.high_bound, r.frac_first, r.frac_mid, r.frac_high, r.mean_first, r.mean_mid, r.mean_high,
              r.first_step_bad, 2.0 / (6.0 * r.genus - 7.0), r.premature);
        ok = ok && r.frac_first <= 0.05 && r.frac_mid <= 0.05 && r.frac_high <= 0.05;
    }
    out.checks.push_back({"bad-step checkpoints", ok, "violation fraction at most 0.05"});

    Table& m = out.tables["merge.csv"];
    m.columns = {"genus", "quota_kind", "quota", "trials", "merged", "fraction"};
    double top_hi = 0, top_lo = 1;
    for (int g : genera) {
        double lg = std::log(static_cast<double>(g));
        double hi = std::ceil(std::sqrt(static_cast<double>(g)) * lg);
        double lo = std::ceil(std::pow(static_cast<double>(g), 0.5 - 1.0 / std::pow(lg, 0.75)));
        auto a = merge_experiment(g, law, hi, mtrials, derive_seed(seed, 2 * g), mc, threads);
        auto b = merge_experiment(g, law, lo, mtrials, derive_seed(seed, 2 * g + 1), mc, threads);
        m.add(g, "sqrt_g_ln_g", hi, a.trials, a.merged, a.fraction);
        m.add(g, "below_sqrt_g", lo, b.trials, b.merged, b.fraction);
        top_hi = a.fraction;
        top_lo = b.fraction;
    }
    // asserted at the largest genus only; small genera have quotas near 1 or near n
    out.checks.push_back({"merge dichotomy", top_hi >= 0.9 && top_lo <= 0.3,
                          "g=" + std::to_string(genera.back()) + " high " + fmt17(top_hi) + " low " + fmt17(top_lo)});

    // one full trace of the first genus for inspection
    Exploration ex = explore(genera.front(), law, StopRule::vertex_quota(kInf), derive_seed(seed, 3), mc);
    std::ostringstream tr;
    write_trace_csv(tr, ex.report);
    Table& tt = out.tables["trace.csv"];
    std::istringstream in(tr.str());
    std::string line;
    std::getline(in, line);
    tt.columns = split(line, ',');
    while (std::getline(in, line)) tt.rows.push_back(split(line, ','));
    TraceCheck tc = check_against_surface(ex.report, ex.surface, 0, mc);
    out.checks.push_back({"trace invariants",
                          ex.report.monotone_violations == 0 && ex.report.ledger_violations == 0 &&
                              tc.final_violations == 0 && tc.breadth_violations == 0,
                          ""});
    return out;
}

}  // namespace fnsurf
