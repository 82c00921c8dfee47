#include "subwave/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "subwave/channel.hpp"
#include "subwave/errors.hpp"
#include "subwave/io.hpp"
#include "subwave/params.hpp"
#include "subwave/profile.hpp"
#include "subwave/stationary.hpp"
#include "subwave/wave.hpp"

namespace subwave::cli {

namespace {

namespace fs = std::filesystem;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ------------------------------------------------------------------ options

struct Options {
    std::string command;
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback = "") const {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    }

    std::string required(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::invalid_argument(command + ": missing required option --" + key);
        return it->second;
    }

    double num(const std::string& key, std::optional<double> fallback = {}) const {
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (fallback) return *fallback;
            throw std::invalid_argument(command + ": missing required option --" + key);
        }
        return parse_num(key, it->second);
    }

    long integer(const std::string& key, long fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        const double v = parse_num(key, it->second);
        if (v != std::floor(v) || std::abs(v) > 1e15)
            throw std::invalid_argument("option --" + key + ": expected an integer");
        return static_cast<long>(v);
    }

    bool flag(const std::string& key, bool fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        const std::string& v = it->second;
        if (v == "on" || v == "true" || v == "1") return true;
        if (v == "off" || v == "false" || v == "0") return false;
        throw std::invalid_argument("option --" + key + ": expected on/off");
    }

    static double parse_num(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument("trailing text");
            return x;
        } catch (const std::exception&) {
            throw std::invalid_argument("option --" + key + ": cannot parse '" + v +
                                        "' as a number");
        }
    }
};

std::map<std::string, std::string> parse_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue; // section header
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config " + path.string() + ":" +
                                        std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config " + path.string() + ":" +
                                        std::to_string(lineno) + ": empty key");
        kv[key] = val;
    }
    return kv;
}

Options parse_args(const std::vector<std::string>& args) {
    Options o;
    o.command = args.at(0);
    std::map<std::string, std::string> from_flags;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0)
            throw std::invalid_argument("expected --option, got '" + a + "'");
        if (i + 1 >= args.size())
            throw std::invalid_argument("option " + a + " needs a value");
        from_flags[a.substr(2)] = args[++i];
    }
    if (from_flags.count("config")) {
        o.kv = parse_config_file(from_flags["config"]);
        o.kv.erase("command"); // the positional command wins
        from_flags.erase("config");
    }
    for (auto& [k, v] : from_flags) o.kv[k] = v; // flags override the file
    return o;
}

void reject_unknown(const Options& o, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    ok.insert("out");
    for (const auto& [k, v] : o.kv)
        if (!ok.count(k))
            throw std::invalid_argument(o.command + ": unknown option --" + k);
}

std::pair<double, double> parse_range(const std::string& key, const std::string& v) {
    const auto colon = v.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("option --" + key + ": expected lo:hi");
    return {Options::parse_num(key, v.substr(0, colon)),
            Options::parse_num(key, v.substr(colon + 1))};
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ','))
        if (!cell.empty()) out.push_back(Options::parse_num(key, cell));
    return out;
}

// "r0,t0" pairs separated by ';'
std::vector<std::pair<double, double>> parse_probes(const std::string& v) {
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.empty()) continue;
        const auto vals = parse_list("probes", item);
        if (vals.size() != 2)
            throw std::invalid_argument("option --probes: each probe is r0,t0");
        out.emplace_back(vals[0], vals[1]);
    }
    return out;
}

// ------------------------------------------------------- run dir + manifest

fs::path make_run_dir(const Options& o) {
    fs::path dir;
    if (o.has("out")) {
        dir = o.str("out");
    } else {
        const char* root = std::getenv("SUBWAVE_OUT");
        dir = fs::path(root ? root : "runs") / o.command;
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream probe(dir / ".writable");
    if (ec || !probe)
        throw std::invalid_argument("output directory not writable: " + dir.string());
    probe.close();
    fs::remove(dir / ".writable", ec);
    return dir;
}

class Manifest {
public:
    Manifest(fs::path dir, const Options& o) : dir_(std::move(dir)), opts_(o) {}

    fs::path path(const std::string& rel) {
        outputs_.push_back(rel);
        fs::path p = dir_ / rel;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        return p;
    }

    void write(double wall_s) const {
        nlohmann::json j;
        j["command"] = opts_.command;
        j["version"] = kVersion;
        j["config"] = opts_.kv; // std::map -> sorted, deterministic keys
        j["wall_time_s"] = wall_s;
        auto& out = j["outputs"] = nlohmann::json::array();
        for (const auto& rel : outputs_) {
            char hex[24];
            std::snprintf(hex, sizeof(hex), "%016llx",
                          static_cast<unsigned long long>(
                              io::fnv1a64_file(dir_ / rel)));
            out.push_back({{"path", rel}, {"fnv1a64", hex}});
        }
        io::write_json(j, dir_ / "manifest.json");
    }

    const std::vector<std::string>& outputs() const { return outputs_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    const Options& opts_;
    std::vector<std::string> outputs_;
};

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

// ------------------------------------------------------------ sub-builders

ProfileSolverConfig profile_cfg(const Options& o) {
    ProfileSolverConfig cfg;
    cfg.rtol = o.num("rtol", cfg.rtol);
    cfg.atol = o.num("atol", cfg.atol);
    cfg.delta = o.num("delta", cfg.delta);
    cfg.max_nodes = static_cast<std::size_t>(o.integer("max-nodes",
                                                       static_cast<long>(cfg.max_nodes)));
    return cfg;
}

StationaryConfig stationary_cfg(const Options& o) {
    StationaryConfig cfg;
    cfg.r_inf = o.num("r-inf", cfg.r_inf);
    cfg.r_min = o.num("r-min", cfg.r_min);
    cfg.z_max = o.num("z-max", cfg.z_max);
    cfg.rtol = o.num("rtol", cfg.rtol);
    cfg.atol = o.num("atol", cfg.atol);
    cfg.r_tol = o.num("r-tol", cfg.r_tol);
    cfg.nodes_per_decade = static_cast<std::size_t>(
        o.integer("nodes-per-decade", static_cast<long>(cfg.nodes_per_decade)));
    return cfg;
}

int zeta_of(const Options& o, int fallback) {
    const double z = o.num("zeta", fallback);
    if (z != 1.0 && z != -1.0)
        throw std::invalid_argument("option --zeta: must be +1 or -1");
    return static_cast<int>(z);
}

// Snapshot columns r, w, u, w_r, w_t (u and w_r recomputed from w so the
// file is self-contained).
void write_snapshot_csv(const WaveState& snap, const fs::path& path) {
    const Grid1D& grid = *snap.grid;
    const std::vector<double> w_r = radial_derivative(grid, snap.w);
    io::CsvWriter csv(path, {"r", "w", "u", "w_r", "w_t"});
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double u = grid[j] > 0.0 ? snap.w[j] / grid[j] : w_r[0];
        csv.row({grid[j], snap.w[j], u, w_r[j], snap.w_t[j]});
    }
}

std::string checksum_chain(const Manifest& mf, const std::vector<std::string>& rels) {
    std::string chain;
    for (const auto& rel : rels) {
        char hex[24];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(
                          io::fnv1a64_file(mf.dir() / rel)));
        chain += hex;
    }
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(io::fnv1a64(
                      {reinterpret_cast<const unsigned char*>(chain.data()),
                       chain.size()})));
    return hex;
}

// --------------------------------------------------------------- commands

int cmd_profile(const Options& o) {
    reject_unknown(o, {"p", "zeta", "a", "delta", "rtol", "atol", "max-nodes",
                       "config"});
    const ModelParams mp = derive_params(o.num("p"), zeta_of(o, -1));
    const double a = o.num("a");
    Stopwatch sw;
    Manifest mf(make_run_dir(o), o);
    const ProfileSolution sol = solve_profile(a, mp, profile_cfg(o));
    write_profile_csv(sol, mf.path("profile.csv"));
    write_profile_json(sol, mf.path("profile.json"));
    mf.write(sw.seconds());
    std::printf("profile: a = %.17g  G = %.17g  f1 = %.17g  extrema = %d\n",
                sol.a, sol.G, sol.f1, sol.n_extrema);
    return 0;
}

int cmd_shoot(const Options& o) {
    reject_unknown(o, {"p", "zeta", "a-range", "scan", "delta", "rtol", "atol",
                       "a-tol", "g-tol", "max-nodes", "config"});
    const ModelParams mp = derive_params(o.num("p"), zeta_of(o, -1));
    const auto [a_lo, a_hi] = parse_range("a-range", o.required("a-range"));
    const long n_scan = o.integer("scan", 500);
    if (n_scan < 2)
        throw std::invalid_argument("shoot: --scan must be at least 2");
    ShootingConfig cfg;
    cfg.solver = profile_cfg(o);
    cfg.a_tol = o.num("a-tol", cfg.a_tol);
    cfg.g_tol_base = o.num("g-tol", cfg.g_tol_base);

    Stopwatch sw;
    Manifest mf(make_run_dir(o), o);
    const auto roots =
        find_bounded_profiles(mp, a_lo, a_hi, static_cast<std::size_t>(n_scan), cfg);

    nlohmann::json j;
    j["p"] = mp.p;
    j["zeta"] = mp.zeta;
    j["a_range"] = {a_lo, a_hi};
    j["n_scan"] = n_scan;
    auto& arr = j["roots"] = nlohmann::json::array();
    for (const auto& root : roots) {
        const ProfileSolution sol = solve_profile(root.a, mp, cfg.solver);
        arr.push_back({{"a", root.a},
                       {"abs_G", root.abs_G},
                       {"f1", sol.f1},
                       {"n_extrema", sol.n_extrema}});
    }
    io::write_json(j, mf.path("roots.json"));
    mf.write(sw.seconds());
    std::printf("shoot: %zu bounded-profile roots in [%g, %g]\n", roots.size(),
                a_lo, a_hi);
    return 0;
}

int cmd_stationary(const Options& o) {
    reject_unknown(o, {"p", "zeta", "r-inf", "r-min", "z-max", "rtol", "atol",
                       "r-tol", "nodes-per-decade", "ladder-k", "config"});
    const int zeta = zeta_of(o, 1);
    const ModelParams mp = derive_params(o.num("p"), zeta);
    const long k_max = o.integer("ladder-k", 6);

    Stopwatch sw;
    Manifest mf(make_run_dir(o), o);
    const StationaryProfile prof = solve_stationary(zeta, mp, stationary_cfg(o));
    write_stationary_csv(prof, mf.path("stationary.csv"));
    write_stationary_json(prof, mf.path("stationary.json"));

    nlohmann::json lj;
    lj["k_max"] = k_max;
    auto& rungs = lj["rungs"] = nlohmann::json::array();
    for (const auto& lc : ladder(static_cast<int>(k_max), mp)) {
        nlohmann::json rung = {{"k", lc.k},
                               {"beta_k", lc.beta_k},
                               {"log_c_k", lc.log_c_k}};
        rung["c_k"] = lc.c_k ? nlohmann::json(*lc.c_k) : nlohmann::json();
        rungs.push_back(rung);
    }
    if (zeta == -1)
        lj["min_margins"] = check_ladder_bounds(prof, static_cast<int>(k_max));
    io::write_json(lj, mf.path("ladder.json"));
    mf.write(sw.seconds());
    if (prof.R_minus)
        std::printf("stationary: R_minus in [%.17g, %.17g]\n", prof.R_minus->lo,
                    prof.R_minus->hi);
    else
        std::printf("stationary: focusing profile down to r = %.17g\n",
                    prof.r_nodes.front());
    return 0;
}

struct SimulateSetup {
    WaveConfig cfg;
    std::function<double(double)> u0, u1;
    std::string label;
};

SimulateSetup build_simulation(const Options& o, const ModelParams& mp) {
    SimulateSetup s;
    s.cfg.params = mp;
    s.cfg.R0 = o.num("R0", 0.5);
    s.cfg.dr = o.num("dr", 1.0 / 1024.0);
    s.cfg.lambda = o.num("lambda", 1.0);
    s.cfg.r_max = o.num("r-max", 64.0);
    s.cfg.t_max = o.num("T");
    s.cfg.forcing = o.flag("forcing", true);
    s.cfg.check_finite_every =
        static_cast<std::size_t>(o.integer("check-every", 64));
    if (o.has("probes")) s.cfg.probes = parse_probes(o.str("probes"));
    if (!(s.cfg.dr > 0.0) || !(s.cfg.r_max > 0.0))
        throw std::invalid_argument("simulate: dr and r-max must be positive");
    // Snap to the actual grid endpoint so Dirichlet samplers feed the exact
    // boundary node.
    const double r_back =
        static_cast<double>(std::llround(s.cfg.r_max / s.cfg.dr)) * s.cfg.dr;

    const std::string data = o.required("data");
    std::ostringstream label;
    if (data == "self-similar") {
        if (mp.zeta != -1)
            throw std::invalid_argument(
                "simulate: self-similar data exists on the defocusing branch "
                "(--zeta -1)");
        const double a = o.num("a");
        const ProfileSolution prof = solve_profile(a, mp, profile_cfg(o));
        std::tie(s.u0, s.u1) = self_similar_data(prof);
        s.cfg.outer = OuterBoundary::DirichletSampler;
        s.cfg.boundary_w = self_similar_boundary(prof, r_back);
        label << "self-similar(a=" << io::format_double(a) << ")";
    } else if (data == "stationary") {
        const double C = o.num("C", 1.0);
        const StationaryProfile prof =
            solve_stationary(mp.zeta, mp, stationary_cfg(o));
        std::tie(s.u0, s.u1) = stationary_data(prof, C);
        s.cfg.outer = OuterBoundary::DirichletSampler;
        const double w_edge =
            C == 0.0 ? 0.0 : r_back * evaluate_rescaled(prof, C, r_back);
        s.cfg.boundary_w = constant_boundary(w_edge);
        label << "stationary(C=" << io::format_double(C) << ")";
    } else if (data == "bump") {
        const double center = o.num("center", 4.0);
        const double width = o.num("width", 1.0);
        const double amplitude = o.num("amplitude", 1.0);
        std::tie(s.u0, s.u1) = bump_data(center, width, amplitude);
        s.cfg.outer = OuterBoundary::OutgoingExtrapolation;
        s.cfg.data_support = center + width;
        label << "bump(center=" << io::format_double(center)
              << ",width=" << io::format_double(width)
              << ",amplitude=" << io::format_double(amplitude) << ")";
    } else if (data == "file") {
        const std::string path = o.required("data-file");
        const io::CsvTable tab = io::read_csv(path);
        auto r = std::make_shared<std::vector<double>>(
            tab.column("r").begin(), tab.column("r").end());
        auto c0 = std::make_shared<std::vector<double>>(
            tab.column("u0").begin(), tab.column("u0").end());
        auto c1 = std::make_shared<std::vector<double>>(
            tab.column("u1").begin(), tab.column("u1").end());
        if (r->size() < 2)
            throw std::invalid_argument("simulate: data file needs >= 2 rows");
        auto interp = [r](const std::shared_ptr<std::vector<double>>& col) {
            return [r, col](double x) {
                if (x <= r->front()) return col->front();
                if (x >= r->back()) return col->back();
                const auto it = std::upper_bound(r->begin(), r->end(), x);
                const std::size_t j = static_cast<std::size_t>(it - r->begin()) - 1;
                const double th = (x - (*r)[j]) / ((*r)[j + 1] - (*r)[j]);
                return (1.0 - th) * (*col)[j] + th * (*col)[j + 1];
            };
        };
        s.u0 = interp(c0);
        s.u1 = interp(c1);
        if (o.has("boundary-constant")) {
            s.cfg.outer = OuterBoundary::DirichletSampler;
            s.cfg.boundary_w = constant_boundary(o.num("boundary-constant"));
        } else {
            s.cfg.outer = OuterBoundary::OutgoingExtrapolation;
        }
        label << "file(" << path << ")";
    } else {
        throw std::invalid_argument(
            "simulate: --data must be self-similar, stationary, bump, or file");
    }
    s.label = label.str();
    return s;
}

int cmd_simulate(const Options& o) {
    reject_unknown(o, {"p", "zeta", "data", "a", "C", "center", "width",
                       "amplitude", "data-file", "boundary-constant", "R0", "dr",
                       "lambda", "T", "r-max", "record-every", "probes",
                       "forcing", "check-every", "delta", "rtol", "atol",
                       "max-nodes", "r-inf", "r-min", "z-max", "r-tol",
                       "nodes-per-decade", "config"});
    const ModelParams mp = derive_params(o.num("p"), zeta_of(o, -1));
    const double T = o.num("T");
    if (!(T > 0.0)) throw std::invalid_argument("simulate: T must be positive");

    Stopwatch sw;
    Manifest mf(make_run_dir(o), o);
    SimulateSetup s = build_simulation(o, mp);
    const double dt = s.cfg.lambda * s.cfg.dr;
    const long long n_steps = std::llround(T / dt);
    const long long record_every =
        o.integer("record-every", std::max<long long>(1, n_steps / 64));
    if (record_every < 1)
        throw std::invalid_argument("simulate: record-every must be >= 1");

    const WaveState init = make_initial_state(s.u0, s.u1, s.cfg);
    const Trajectory traj =
        evolve(init, T, static_cast<std::size_t>(record_every), s.cfg);

    std::vector<std::string> snapshot_files;
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof(name), "trajectory/%04zu.csv", i);
        write_snapshot_csv(traj.snapshots[i], mf.path(name));
        snapshot_files.push_back(name);
    }
    for (std::size_t k = 0; k < traj.probes.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "probe_%zu.csv", k);
        const CharacteristicProbe& pr = traj.probes[k];
        io::CsvWriter csv(mf.path(name), {"t", "r", "u", "v_plus"});
        for (std::size_t i = 0; i < pr.t.size(); ++i)
            csv.row({pr.t[i], pr.r[i], pr.u[i], pr.v_plus[i]});
    }

    nlohmann::json j;
    j["p"] = mp.p;
    j["zeta"] = mp.zeta;
    j["R0"] = s.cfg.R0;
    j["dr"] = s.cfg.dr;
    j["lambda"] = s.cfg.lambda;
    j["T"] = T;
    j["r_max"] = static_cast<double>(std::llround(s.cfg.r_max / s.cfg.dr)) * s.cfg.dr;
    j["record_every"] = record_every;
    j["forcing"] = s.cfg.forcing;
    j["data"] = s.label;
    auto& pj = j["probes"] = nlohmann::json::array();
    for (const auto& [r0, t0] : s.cfg.probes) pj.push_back({r0, t0});
    j["times"] = traj.times;
    j["status"] = traj.status == RunStatus::Completed ? "completed" : "blew-up";
    j["end_time"] = traj.end_time;
    j["snapshot_checksum"] = checksum_chain(mf, snapshot_files);
    io::write_json(j, mf.path("trajectory.json"));
    mf.write(sw.seconds());

    if (traj.status == RunStatus::BlewUp) {
        std::fprintf(stderr,
                     "simulate: field blew up near t = %.17g (last finite "
                     "snapshot kept)\n",
                     traj.end_time);
        return 2;
    }
    std::printf("simulate: %zu snapshots to t = %.17g in %s\n",
                traj.snapshots.size(), traj.end_time, mf.dir().string().c_str());
    return 0;
}

int cmd_diagnose(const Options& o) {
    reject_unknown(o, {"run", "R", "fit-t-min", "fit-t-max", "r-prime", "char",
                       "config"});
    const fs::path run_dir = o.required("run");
    const nlohmann::json tj = io::read_json(run_dir / "trajectory.json");

    Trajectory traj;
    traj.config.params =
        derive_params(tj.at("p").get<double>(),
                      tj.at("zeta").get<int>());
    traj.config.R0 = tj.at("R0").get<double>();
    traj.config.dr = tj.at("dr").get<double>();
    traj.config.lambda = tj.at("lambda").get<double>();
    traj.config.r_max = tj.at("r_max").get<double>();
    traj.config.t_max = tj.at("T").get<double>();
    traj.config.forcing = tj.value("forcing", true);
    traj.times = tj.at("times").get<std::vector<double>>();
    traj.status = RunStatus::Completed;
    traj.end_time = tj.at("end_time").get<double>();

    std::shared_ptr<const Grid1D> grid;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof(name), "trajectory/%04zu.csv", i);
        const io::CsvTable tab = io::read_csv(run_dir / name);
        if (!grid) {
            std::vector<double> r(tab.column("r").begin(), tab.column("r").end());
            grid = std::make_shared<Grid1D>(
                Grid1D::from_nodes(std::move(r), GridSpacing::Uniform));
        }
        WaveState snap;
        snap.t = traj.times[i];
        snap.grid = grid;
        snap.R0 = traj.config.R0;
        snap.lambda = traj.config.lambda;
        snap.w.assign(tab.column("w").begin(), tab.column("w").end());
        snap.w_t.assign(tab.column("w_t").begin(), tab.column("w_t").end());
        traj.snapshots.push_back(std::move(snap));
    }
    if (tj.contains("probes")) {
        std::size_t k = 0;
        for (const auto& anchor : tj.at("probes")) {
            char name[32];
            std::snprintf(name, sizeof(name), "probe_%zu.csv", k++);
            const io::CsvTable tab = io::read_csv(run_dir / name);
            CharacteristicProbe pr;
            pr.r0 = anchor.at(0).get<double>();
            pr.t0 = anchor.at(1).get<double>();
            pr.t.assign(tab.column("t").begin(), tab.column("t").end());
            pr.r.assign(tab.column("r").begin(), tab.column("r").end());
            pr.u.assign(tab.column("u").begin(), tab.column("u").end());
            pr.v_plus.assign(tab.column("v_plus").begin(),
                             tab.column("v_plus").end());
            traj.probes.push_back(std::move(pr));
        }
    }

    const double R = o.num("R", traj.config.R0);
    DecayOptions dopt;
    dopt.fit_t_min = o.num("fit-t-min", dopt.fit_t_min);
    dopt.fit_t_max = o.num("fit-t-max", dopt.fit_t_max);
    dopt.r_prime = o.num("r-prime", dopt.r_prime);

    Stopwatch sw;
    Options out_opts = o;
    if (!o.has("out"))
        out_opts.kv["out"] = (run_dir / "report").string();
    Manifest mf(make_run_dir(out_opts), o);

    const ChannelReport rep = decay_report(traj, R, dopt);
    const fs::path report_path = mf.path("report.json");
    write_channel_report_json(rep, report_path.string());
    write_channel_report_csv(rep, mf.path("report.csv").string());
    if (o.has("char")) {
        const auto vals = parse_list("char", o.str("char"));
        if (vals.size() != 3)
            throw std::invalid_argument("option --char: expected r0,t0,T");
        const double res = characteristic_residual(traj, vals[0], vals[1], vals[2]);
        nlohmann::json j = io::read_json(report_path);
        j["characteristic_residual"] = res;
        j["characteristic_anchor"] = {vals[0], vals[1], vals[2]};
        io::write_json(j, report_path);
    }
    mf.write(sw.seconds());
    std::printf("diagnose: verdict %s (decay exponent %.6g)\n",
                to_string(rep.verdict), rep.decay_fit.exponent);
    return 0;
}

// ------------------------------------------------------------------- sweep

// A stationary snapshot of U_C on [r_lo, r_max] for projection diagnostics.
// The grid starts above the rescaled blow-up radius on the defocusing
// branch (the field does not exist below it).
WaveState rescaled_snapshot(const std::shared_ptr<const StationaryProfile>& prof,
                            double C, double dr, double r_max) {
    double r_lo = dr;
    if (prof->R_minus && C != 0.0) {
        const double p = prof->params.p;
        const double rho = std::pow(std::abs(C), (p - 1.0) / (p - 3.0));
        r_lo = std::max(r_lo, 1.05 * rho * prof->R_minus->hi);
    }
    const auto j0 = static_cast<long long>(std::ceil(r_lo / dr - 1e-12));
    const auto j1 = static_cast<long long>(std::llround(r_max / dr));
    if (j1 - j0 < 16)
        throw std::invalid_argument("sweep: rescaled window too small");
    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(j1 - j0 + 1));
    for (long long j = j0; j <= j1; ++j)
        nodes.push_back(static_cast<double>(j) * dr);
    WaveState snap;
    snap.t = 0.0;
    snap.grid = std::make_shared<Grid1D>(
        Grid1D::from_nodes(std::move(nodes), GridSpacing::Uniform));
    snap.w.resize(snap.grid->size());
    snap.w_t.assign(snap.grid->size(), 0.0);
    for (std::size_t j = 0; j < snap.grid->size(); ++j) {
        const double r = (*snap.grid)[j];
        snap.w[j] = C == 0.0 ? 0.0 : r * evaluate_rescaled(*prof, C, r);
    }
    snap.R0 = 0.0;
    snap.lambda = 1.0;
    return snap;
}

int cmd_sweep(const Options& o) {
    reject_unknown(o, {"param", "values", "range", "scan", "p", "zeta", "jobs",
                       "R", "C", "dr", "r-max", "delta", "rtol", "atol",
                       "max-nodes", "r-inf", "r-min", "z-max", "r-tol",
                       "nodes-per-decade", "config"});
    const std::string param = o.required("param");

    std::vector<double> values;
    if (o.has("values")) {
        values = parse_list("values", o.str("values"));
    } else if (o.has("range")) {
        const auto [lo, hi] = parse_range("range", o.required("range"));
        const long n = o.integer("scan", 10);
        if (n < 1) throw std::invalid_argument("sweep: --scan must be >= 1");
        for (long i = 0; i < n; ++i)
            values.push_back(n == 1 ? lo
                                    : lo + (hi - lo) * static_cast<double>(i) /
                                               static_cast<double>(n - 1));
    } else {
        throw std::invalid_argument("sweep: provide --values or --range");
    }

    std::vector<const char*> columns;
    std::function<std::vector<double>(double)> compute;

    if (param == "a") {
        const ModelParams mp = derive_params(o.num("p"), zeta_of(o, -1));
        const ProfileSolverConfig pcfg = profile_cfg(o);
        columns = {"a", "G", "f1", "n_extrema", "status"};
        compute = [mp, pcfg](double a) {
            const ProfileSolution sol = solve_profile(a, mp, pcfg);
            return std::vector<double>{a, sol.G, sol.f1,
                                       static_cast<double>(sol.n_extrema), 0.0};
        };
    } else if (param == "C" || param == "R") {
        const int zeta = zeta_of(o, 1);
        const ModelParams mp = derive_params(o.num("p"), zeta);
        const auto prof = std::make_shared<const StationaryProfile>(
            solve_stationary(zeta, mp, stationary_cfg(o)));
        const double dr = o.num("dr", 1.0 / 256.0);
        const double r_max = o.num("r-max", 64.0);
        if (param == "C") {
            const double R = o.num("R", 1.0);
            columns = {"C", "lambda", "cos_angle", "status"};
            compute = [prof, dr, r_max, R](double C) {
                const WaveState snap = rescaled_snapshot(prof, C, dr, r_max);
                if (R <= snap.grid->front())
                    throw std::invalid_argument(
                        "sweep: R is inside the rescaled blow-up zone");
                const Projection pr = projection_onto_generator(snap, R);
                return std::vector<double>{C, pr.lambda,
                                           pr.cos_angle.value_or(kNaN), 0.0};
            };
        } else {
            const double C = o.num("C", 1.0);
            const WaveState snap = rescaled_snapshot(prof, C, dr, r_max);
            auto shared = std::make_shared<const WaveState>(snap);
            columns = {"R", "lambda", "cos_angle", "status"};
            compute = [shared](double R) {
                if (R <= shared->grid->front())
                    throw std::invalid_argument(
                        "sweep: R is inside the rescaled blow-up zone");
                const Projection pr = projection_onto_generator(*shared, R);
                return std::vector<double>{R, pr.lambda,
                                           pr.cos_angle.value_or(kNaN), 0.0};
            };
        }
    } else if (param == "p") {
        const StationaryConfig scfg = stationary_cfg(o);
        columns = {"p", "R_minus_lo", "R_minus_hi", "status"};
        compute = [scfg](double p) {
            const ModelParams mp = derive_params(p, -1);
            const StationaryProfile prof = solve_stationary(-1, mp, scfg);
            if (!prof.R_minus)
                throw numerical_error("sweep: no blow-up bracket found");
            return std::vector<double>{p, prof.R_minus->lo, prof.R_minus->hi, 0.0};
        };
    } else {
        throw std::invalid_argument("sweep: --param must be a, C, R, or p");
    }

    const long jobs = std::clamp<long>(o.integer("jobs", 1), 1, 64);
    Stopwatch sw;
    Manifest mf(make_run_dir(o), o);

    const std::size_t n_cols = columns.size();
    std::vector<std::vector<double>> rows(values.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= values.size()) return;
            try {
                rows[i] = compute(values[i]);
            } catch (const numerical_error&) {
                rows[i].assign(n_cols, kNaN);
                rows[i].front() = values[i];
                rows[i].back() = 2.0;
            } catch (const std::exception&) {
                rows[i].assign(n_cols, kNaN);
                rows[i].front() = values[i];
                rows[i].back() = 1.0;
            }
        }
    };
    std::vector<std::thread> pool;
    for (long t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    io::CsvWriter csv(mf.path("sweep.csv"),
                      std::span<const char* const>(columns.data(), columns.size()));
    for (const auto& row : rows) csv.row(row);
    mf.write(sw.seconds());
    std::printf("sweep: %zu rows over %s\n", rows.size(), param.c_str());
    return 0;
}

void print_usage() {
    std::printf(
        "subwave %s - semilinear wave equation laboratory\n"
        "\n"
        "usage: subwave <command> [--config file] [--key value ...]\n"
        "\n"
        "commands:\n"
        "  profile     --p P --a A [--zeta -1] [--delta 1e-8]\n"
        "  shoot       --p P --a-range LO:HI [--scan 500]\n"
        "  stationary  --p P --zeta {+1,-1} [--r-inf 1e4] [--ladder-k 6]\n"
        "  simulate    --p P --T T --data {self-similar,stationary,bump,file}\n"
        "              [--a A | --C C | --center,--width,--amplitude | --data-file F]\n"
        "              [--R0 0.5] [--dr 2^-10] [--lambda 1] [--r-max 64]\n"
        "              [--record-every N] [--probes \"r0,t0;...\"] [--forcing on]\n"
        "  diagnose    --run DIR [--R R0] [--fit-t-min T] [--char r0,t0,T]\n"
        "  sweep       --param {a,C,R,p} (--values v1,v2,... | --range LO:HI\n"
        "              --scan N) [--jobs J]\n"
        "\n"
        "Output goes to --out, else $SUBWAVE_OUT/<command>, else runs/<command>.\n"
        "Exit codes: 0 ok, 1 invalid configuration, 2 numerical failure.\n",
        kVersion);
}

} // namespace

int run(const std::vector<std::string>& args) {
    if (args.empty() || args[0] == "--help" || args[0] == "-h" ||
        args[0] == "help") {
        print_usage();
        return 0;
    }
    try {
        const Options o = parse_args(args);
        if (o.command == "profile") return cmd_profile(o);
        if (o.command == "shoot") return cmd_shoot(o);
        if (o.command == "stationary") return cmd_stationary(o);
        if (o.command == "simulate") return cmd_simulate(o);
        if (o.command == "diagnose") return cmd_diagnose(o);
        if (o.command == "sweep") return cmd_sweep(o);
        throw std::invalid_argument("unknown command '" + o.command + "'");
    } catch (const numerical_error& e) {
        std::fprintf(stderr, "subwave: numerical failure: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "subwave: %s\n", e.what());
        return 1;
    }
}

} // namespace subwave::cli
