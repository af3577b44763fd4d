#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <fnsurf/experiments.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fnsurf;

namespace {

const char* kVersion = "0.1.0";

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string one_line(std::string s) {
    for (auto& c : s)
        if (c == '\n') c = ';';
    if (!s.empty() && s.back() == ';') s.pop_back();
    return s;
}

struct ExpOptions {
    std::string config, replay, out, seed;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;  // key -> value from dedicated flags
};

// Adds the flags shared by experiment commands. Each flag maps to a config key.
void add_common(CLI::App* sub, ExpOptions& o, const std::vector<std::pair<std::string, std::string>>& keys) {
    sub->add_option("--config", o.config, "key=value config file");
    sub->add_option("--replay", o.replay, "manifest.json whose config is rerun");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--set", o.sets, "extra key=value (repeatable)");
    for (const auto& [flag, key] : keys) {
        auto* opt = sub->add_option_function<std::string>(
            "--" + flag, [&o, key = key](const std::string& v) { o.flags[key] = v; }, "config key " + key);
        (void)opt;
    }
}

ExperimentConfig build_config(const ExpOptions& o) {
    ExperimentConfig c;
    if (!o.replay.empty()) {
        std::ifstream f(o.replay);
        if (!f) throw ArgumentError("cannot read manifest " + o.replay);
        json m = json::parse(f);
        for (auto& [k, v] : m.at("config").items()) c.set(k, v.get<std::string>());
    }
    if (!o.config.empty()) {
        for (const auto& [k, v] : ExperimentConfig::load(o.config).values()) c.set(k, v);
    }
    for (const auto& [k, v] : o.flags) c.set(k, v);
    for (const auto& s : o.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ArgumentError("--set expects key=value");
        c.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!o.seed.empty()) c.set("seed", o.seed);
    if (!o.out.empty()) c.set("out", o.out);
    c.seed();  // mandatory
    return c;
}

int emit(const ExperimentConfig& c, const ExperimentResult& r, double seconds) {
    std::string canon = c.canonical();
    std::string digest = sha256_hex(canon);
    std::string head = "# config: " + one_line(canon) + "\n# config-digest: " + digest + "\n";
    if (!c.has("out")) {
        std::cout << head << r.tables.at(r.primary).csv();
    } else {
        fs::path dir = c.str("out");
        fs::create_directories(dir);
        json files = json::object();
        for (const auto& [name, t] : r.tables) {
            std::string body = head + t.csv();
            std::ofstream(dir / name, std::ios::binary) << body;
            files[name] = sha256_hex(body);
        }
        json m;
        m["tool"] = "fnsurf";
        m["version"] = kVersion;
        m["command"] = r.command;
        m["config"] = c.values();
        m["config_digest"] = digest;
        m["trial_seeds"] = r.trial_seeds;
        m["wall_clock_seconds"] = seconds;
        m["files"] = files;
        m["checks"] = json::array();
        for (const auto& ch : r.checks)
            m["checks"].push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
        m["notes"] = r.notes;
        std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
    }
    for (const auto& ch : r.checks)
        std::cerr << (ch.pass ? "PASS " : "FAIL ") << ch.name << (ch.detail.empty() ? "" : " (" + ch.detail + ")")
                  << '\n';
    for (const auto& n : r.notes) std::cerr << "note: " << n << '\n';
    return 0;
}

template <class Run>
int run_experiment(const ExpOptions& o, Run run) {
    ExperimentConfig c = build_config(o);
    auto t0 = std::chrono::steady_clock::now();
    ExperimentResult r = run(c);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return emit(c, r, secs);
}

int cmd_pants(const std::string& text) {
    auto parts = split(text, ',');
    if (parts.size() != 3) throw ArgumentError("--half-lengths needs three comma-separated values");
    std::array<double, 3> h;
    for (int i = 0; i < 3; ++i) h[i] = parse_double(parts[i], 0, "half-lengths");
    PantsShape s(h[0], h[1], h[2]);
    std::cout << "half_lengths " << fmt17(h[0]) << ' ' << fmt17(h[1]) << ' ' << fmt17(h[2]) << '\n';
    std::cout << "seam_01 " << fmt17(seam_length(s, 0, 1)) << '\n';
    std::cout << "seam_02 " << fmt17(seam_length(s, 0, 2)) << '\n';
    std::cout << "seam_12 " << fmt17(seam_length(s, 1, 2)) << '\n';
    double lo = *std::min_element(h.begin(), h.end()), hi = *std::max_element(h.begin(), h.end());
    PantsBounds b = pants_bounds(lo, hi);
    std::cout << "delta_minus " << fmt17(b.delta_minus) << '\n';
    std::cout << "delta_plus " << fmt17(b.delta_plus) << '\n';
    std::cout << "Delta_plus " << fmt17(b.Delta_plus) << '\n';
    for (int i = 0; i < 3; ++i) std::cout << "collar_width_" << i << ' ' << fmt17(collar_width(2.0 * h[i])) << '\n';
    for (int i = 0; i < 3; ++i)
        std::cout << "crossing_bound_" << i << ' ' << fmt17(half_pants_crossing_bound(h[i])) << '\n';
    return 0;
}

int cmd_gen(int genus, const std::string& law, const std::string& seed, const std::string& out) {
    ExperimentConfig c;
    if (!seed.empty()) c.set("seed", seed);
    WeightedSurfaceGraph g = random_surface(genus, WeightLaw::parse(law), c.seed());
    std::string rec = serialize(g);
    if (out.empty())
        std::cout << rec;
    else
        std::ofstream(out, std::ios::binary) << rec;
    Connectivity cc = connectivity(g);
    std::cerr << "genus " << genus << " components " << cc.components << '\n';
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
    std::ostringstream os;
    os << "# fnsurf run summary\n\n| command | check | result | detail |\n|---|---|---|---|\n";
    int fails = 0;
    for (const auto& in : inputs) {
        fs::path p = in;
        if (fs::is_directory(p)) p /= "manifest.json";
        std::ifstream f(p);
        if (!f) throw ArgumentError("cannot read manifest " + p.string());
        json m = json::parse(f);
        for (const auto& ch : m.at("checks")) {
            bool pass = ch.at("pass").get<bool>();
            fails += !pass;
            os << "| " << m.at("command").get<std::string>() << " | " << ch.at("name").get<std::string>() << " | "
               << (pass ? "PASS" : "FAIL") << " | " << ch.at("detail").get<std::string>() << " |\n";
        }
        os << "\nconfig-digest `" << m.at("config_digest").get<std::string>() << "` from " << p.string() << "\n\n";
    }
    os << "failed checks: " << fails << '\n';
    if (out.empty())
        std::cout << os.str();
    else
        std::ofstream(out) << os.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fnsurf: random hyperbolic surfaces from pants gluings"};
    app.require_subcommand(1);

    std::string half;
    auto* pants = app.add_subcommand("pants", "seam lengths, bounds and collar widths");
    pants->add_option("--half-lengths", half, "three cuff half-lengths a,b,c")->required();

    int genus = 2;
    std::string law = "point:2 uniform", gseed, gout;
    auto* gen = app.add_subcommand("gen", "sample one surface record");
    gen->add_option("--genus", genus)->required();
    gen->add_option("--law", law);
    gen->add_option("--seed", gseed)->required();
    gen->add_option("--out", gout);

    ExpOptions og, oa, od, oe;
    auto* growth = app.add_subcommand("growth", "ball growth on binary tree surfaces");
    add_common(growth, og, {{"laws", "laws"}, {"grid", "grid"}, {"trials", "trials"}, {"m", "m"},
                            {"threads", "threads"}, {"max-pants", "max_pants"}});
    auto* alpha = app.add_subcommand("alpha", "growth exponent estimates");
    add_common(alpha, oa, {{"laws", "laws"}, {"grid", "grid"}, {"trials", "trials"}, {"m", "m"},
                           {"threads", "threads"}, {"preset", "preset"}, {"max-pants", "max_pants"}});
    auto* diam = app.add_subcommand("diameter", "diameter scaling or collar preset");
    add_common(diam, od, {{"law", "law"}, {"genera", "genera"}, {"trials", "trials"}, {"m", "m"},
                          {"threads", "threads"}, {"preset", "preset"}, {"alpha", "alpha"}});
    auto* expl = app.add_subcommand("explore", "bad-step checkpoints and merges");
    add_common(expl, oe, {{"law", "law"}, {"genera", "genera"}, {"trials", "trials"}, {"m", "m"},
                          {"threads", "threads"}, {"beta", "beta"}, {"k", "k"}, {"merge-trials", "merge_trials"}});

    std::vector<std::string> manifests;
    std::string rout;
    auto* report = app.add_subcommand("report", "collate manifests");
    report->add_option("manifests", manifests, "manifest files or output directories")->required();
    report->add_option("--out", rout);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*pants) return cmd_pants(half);
        if (*gen) return cmd_gen(genus, law, gseed, gout);
        if (*growth) return run_experiment(og, run_growth);
        if (*alpha) return run_experiment(oa, run_alpha);
        if (*diam) return run_experiment(od, run_diameter);
        if (*expl) return run_experiment(oe, run_explore);
        if (*report) return cmd_report(manifests, rout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n' << app.help();
        return 2;
    }
    return 0;
}
