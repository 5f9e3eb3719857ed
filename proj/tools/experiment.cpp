#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"
#include "lvfb/errors.hpp"
#include "lvfb/scalar_waves.hpp"

namespace lvfb::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

namespace {

// ---------------------------------------------------------------- parsing

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("cli.parse_config: " + key + " = '" + v + "' is not a number");
    }
    while (used < v.size() && std::isspace(static_cast<unsigned char>(v[used]))) ++used;
    if (used != v.size() || !std::isfinite(x)) {
        throw ConfigError("cli.parse_config: " + key + " = '" + v + "' is not a finite number");
    }
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x != std::floor(x)) throw ConfigError("cli.parse_config: " + key + " must be an integer");
    return static_cast<long>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("cli.parse_config: " + key + " = '" + v + "' is not a boolean");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        out.push_back(to_double(key, item.substr(b, e - b + 1)));
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += fmt12(v[i]);
    }
    return s;
}

struct Entry {
    std::string key;  // "section.name"
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<json(const ExperimentConfig&)> get;
};

#define LVFB_NUM(name, field) \
    Entry{name, [](ExperimentConfig& c, const std::string& v) { c.field = to_double(name, v); }, \
          [](const ExperimentConfig& c) { return json(c.field); }}
#define LVFB_INT(name, field) \
    Entry{name, [](ExperimentConfig& c, const std::string& v) { c.field = to_long(name, v); }, \
          [](const ExperimentConfig& c) { return json(c.field); }}
#define LVFB_BOOL(name, field) \
    Entry{name, [](ExperimentConfig& c, const std::string& v) { c.field = to_bool(name, v); }, \
          [](const ExperimentConfig& c) { return json(c.field); }}
#define LVFB_STR(name, field) \
    Entry{name, [](ExperimentConfig& c, const std::string& v) { c.field = v; }, \
          [](const ExperimentConfig& c) { return json(c.field); }}

SweepAxis& axis_slot(ExperimentConfig& c, std::size_t i) {
    if (c.axes.size() <= i) c.axes.resize(i + 1);
    return c.axes[i];
}

json axis_key(const ExperimentConfig& c, std::size_t i) { return i < c.axes.size() ? json(c.axes[i].key) : json(""); }
json axis_values(const ExperimentConfig& c, std::size_t i) {
    return i < c.axes.size() ? json(join(c.axes[i].values)) : json("");
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = {
        LVFB_STR("mode", mode),
        LVFB_NUM("params.d", d),
        LVFB_NUM("params.r", r),
        LVFB_NUM("params.h", h),
        LVFB_NUM("params.k", k),
        LVFB_BOOL("params.scalar_mode", scalar_mode),
        LVFB_NUM("stefan.gamma", gamma),
        LVFB_NUM("stefan.g0", g0),
        LVFB_STR("initial.shape", shape),
        LVFB_NUM("initial.amplitude", amplitude),
        LVFB_NUM("initial.v_inf", v_inf),
        LVFB_STR("initial.table", table),
        LVFB_NUM("semiwave.c", c),
        LVFB_INT("semiwave.n", semiwave.n),
        LVFB_NUM("semiwave.s_left", semiwave.s_left),
        LVFB_NUM("semiwave.s_right", semiwave.s_right),
        LVFB_NUM("semiwave.fp_tol", semiwave.fp_tol),
        LVFB_NUM("semiwave.c_tol", semiwave.c_tol),
        LVFB_NUM("semiwave.root_tol", semiwave.root_tol),
        LVFB_INT("semiwave.max_sweeps", semiwave.max_sweeps),
        LVFB_NUM("semiwave.trivial_tol_rel", semiwave.trivial_tol_rel),
        LVFB_NUM("semiwave.residual_tol", semiwave.residual_tol),
        LVFB_BOOL("semiwave.newton_polish", semiwave.newton_polish),
        LVFB_NUM("semiwave.newton_tol", semiwave.newton_tol),
        LVFB_INT("semiwave.max_newton", semiwave.max_newton),
        LVFB_NUM("sim.horizon", horizon),
        LVFB_INT("sim.n_u", sim.n_u),
        LVFB_NUM("sim.dx_v", sim.dx_v),
        LVFB_NUM("sim.dt_max", sim.dt_max),
        LVFB_NUM("sim.cfl", sim.cfl),
        LVFB_NUM("sim.reaction_budget", sim.reaction_budget),
        LVFB_NUM("sim.eps_mono", sim.eps_mono),
        LVFB_NUM("sim.vanish_tol", sim.vanish_tol),
        LVFB_NUM("sim.plateau_tol", sim.plateau_tol),
        LVFB_NUM("sim.trailing_window", sim.trailing_window),
        LVFB_NUM("sim.output_interval", sim.output_interval),
        LVFB_NUM("sim.v_margin", sim.v_margin),
        LVFB_NUM("sim.snapshot_extent", sim.snapshot_extent),
        Entry{"sim.snapshot_times",
              [](ExperimentConfig& c, const std::string& v) { c.sim.snapshot_times = to_list("sim.snapshot_times", v); },
              [](const ExperimentConfig& c) { return json(join(c.sim.snapshot_times)); }},
        LVFB_NUM("gamma_star.horizon", gamma_star.horizon),
        LVFB_NUM("gamma_star.gamma_lo", gamma_star.gamma_lo),
        LVFB_NUM("gamma_star.gamma_hi", gamma_star.gamma_hi),
        LVFB_NUM("gamma_star.rel_tol", gamma_star.rel_tol),
        LVFB_STR("sweep.target", sweep_target),
        Entry{"sweep.axis1", [](ExperimentConfig& c, const std::string& v) { axis_slot(c, 0).key = v; },
              [](const ExperimentConfig& c) { return axis_key(c, 0); }},
        Entry{"sweep.values1",
              [](ExperimentConfig& c, const std::string& v) { axis_slot(c, 0).values = to_list("sweep.values1", v); },
              [](const ExperimentConfig& c) { return axis_values(c, 0); }},
        Entry{"sweep.axis2", [](ExperimentConfig& c, const std::string& v) { axis_slot(c, 1).key = v; },
              [](const ExperimentConfig& c) { return axis_key(c, 1); }},
        Entry{"sweep.values2",
              [](ExperimentConfig& c, const std::string& v) { axis_slot(c, 1).values = to_list("sweep.values2", v); },
              [](const ExperimentConfig& c) { return axis_values(c, 1); }},
        LVFB_STR("output.dir", out_dir),
        LVFB_INT("output.jobs", jobs),
    };
    return table;
}

#undef LVFB_NUM
#undef LVFB_INT
#undef LVFB_BOOL
#undef LVFB_STR

json resolved_config(const ExperimentConfig& cfg) {
    json out = json::object();
    for (const Entry& e : entries()) {
        const auto dot = e.key.find('.');
        if (dot == std::string::npos) {
            out[e.key] = e.get(cfg);
        } else {
            out[e.key.substr(0, dot)][e.key.substr(dot + 1)] = e.get(cfg);
        }
    }
    return out;
}

// Axis overrides used by the sweep.
const std::map<std::string, std::function<void(ExperimentConfig&, double)>>& axis_setters() {
    static const std::map<std::string, std::function<void(ExperimentConfig&, double)>> m = {
        {"gamma", [](ExperimentConfig& c, double x) { c.gamma = x; }},
        {"g0", [](ExperimentConfig& c, double x) { c.g0 = x; }},
        {"c", [](ExperimentConfig& c, double x) { c.c = x; }},
        {"d", [](ExperimentConfig& c, double x) { c.d = x; }},
        {"r", [](ExperimentConfig& c, double x) { c.r = x; }},
        {"h", [](ExperimentConfig& c, double x) { c.h = x; }},
        {"k", [](ExperimentConfig& c, double x) { c.k = x; }},
        {"amplitude", [](ExperimentConfig& c, double x) { c.amplitude = x; }},
        {"v_inf", [](ExperimentConfig& c, double x) { c.v_inf = x; }},
        {"horizon", [](ExperimentConfig& c, double x) { c.horizon = x; }},
    };
    return m;
}

// ---------------------------------------------------------------- output

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_table(const fs::path& dir, const Table& t) {
    std::ofstream f(dir / t.name);
    if (!f) throw ConfigError("cli.run: cannot write " + (dir / t.name).string());
    for (std::size_t i = 0; i < t.header.size(); ++i) f << (i ? "," : "") << t.header[i];
    f << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
        f << "\n";
    }
}

Table profile_table(const SemiWaveProfile& pr) {
    Table t{"profile.csv", {"s", "phi", "psi"}, {}};
    t.rows.reserve(pr.s_grid.size());
    for (std::size_t i = 0; i < pr.s_grid.size(); ++i) {
        t.rows.push_back({fmt12(pr.s_grid[i]), fmt12(pr.phi[i]), fmt12(pr.psi[i])});
    }
    return t;
}

Table trajectory_table(const SimOutcome& o) {
    Table t{"trajectory.csv", {"t", "g", "g_dot", "u_sup", "u_at_0", "v_at_0"}, {}};
    for (const auto& s : o.trajectory) {
        t.rows.push_back({fmt12(s.t), fmt12(s.g), fmt12(s.g_dot), fmt12(s.u_sup), fmt12(s.u_at_0), fmt12(s.v_at_0)});
    }
    return t;
}

std::vector<Table> snapshot_tables(const SimOutcome& o) {
    std::vector<Table> out;
    for (const auto& s : o.snapshots) {
        Table t{"snapshot_t" + fmt12(s.t) + ".csv", {"x", "u", "v"}, {}};
        for (std::size_t j = 0; j < s.x.size(); ++j) t.rows.push_back({fmt12(s.x[j]), fmt12(s.u[j]), fmt12(s.v[j])});
        out.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------- modes

using Artifacts = std::vector<Table>;

json profile_summary(const SemiWaveProfile& pr) {
    json j;
    j["c"] = pr.c;
    j["phi_slope_at_0"] = pr.phi_slope_at_0;
    j["decay_rate"] = std::isfinite(pr.decay_rate) ? json(pr.decay_rate) : json(nullptr);
    j["sweeps"] = pr.sweeps;
    j["newton_iterations"] = pr.newton_iterations;
    j["residual"] = pr.residual;
    return j;
}

json mode_semiwave(const ExperimentConfig& cfg, Artifacts* art) {
    const SemiWaveResult res = solve_semiwave(params_of(cfg), cfg.c, cfg.semiwave);
    json j;
    if (const auto* pr = std::get_if<SemiWaveProfile>(&res)) {
        j["exists"] = true;
        j.update(profile_summary(*pr));
        if (art) art->push_back(profile_table(*pr));
    } else {
        const auto& no = std::get<NoNontrivialSolution>(res);
        j["exists"] = false;
        j["c"] = no.c;
        j["reason"] = no.reason;
        j["sup_phi"] = no.sup_phi;
        j["local_sup_phi"] = no.local_sup_phi;
        j["sweeps"] = no.sweeps;
    }
    return j;
}

json mode_critical_speed(const ExperimentConfig& cfg, Artifacts*) {
    const CriticalSpeedReport r = critical_speed_report(params_of(cfg), cfg.semiwave);
    json j;
    j["c_star"] = r.c_star;
    j["lower_bound"] = r.lower_bound;
    j["upper_bound"] = r.upper_bound;
    j["at_lower_bound"] = r.at_lower_bound;
    j["solves"] = r.solves;
    j["undecided_probes"] = r.undecided_probes;
    return j;
}

json speed_summary(const SpeedForGamma& s, double gamma) {
    json j;
    j["gamma"] = gamma;
    j["c_gamma"] = s.c_gamma;
    j["phi_slope_at_0"] = s.profile.phi_slope_at_0;
    j["gamma_slope_minus_c"] = gamma * s.profile.phi_slope_at_0 - s.c_gamma;
    j["profile_c"] = s.profile.c;
    j["residual"] = s.profile.residual;
    return j;
}

json mode_speed_for_gamma(const ExperimentConfig& cfg, Artifacts* art) {
    const CompetitionParams p = params_of(cfg);
    json j;
    if (p.is_scalar_mode()) {
        // k = 0: the u equation decouples into the Fisher-KPP semi-wave.
        j["gamma"] = cfg.gamma;
        j["c_gamma"] = kpp_speed_for_gamma(1.0, 1.0, 1.0, cfg.gamma, cfg.semiwave.root_tol);
        return j;
    }
    const SpeedForGamma s = speed_for_gamma(p, cfg.gamma, cfg.semiwave);
    if (art) art->push_back(profile_table(s.profile));
    return speed_summary(s, cfg.gamma);
}

json sim_summary(const SimOutcome& o) {
    json j;
    j["classification"] = to_string(o.classification);
    j["classified_at"] = o.classified_at;
    j["final_t"] = o.final_state.t;
    j["final_g"] = o.final_state.g;
    j["final_g_dot"] = o.final_state.g_dot;
    j["speed_estimate"] = o.speed_estimate;
    j["u_at_0"] = o.final_state.u_hat.front();
    j["v_at_0"] = o.final_state.v.front();
    j["u_sup"] = o.u_sup_series.back();
    j["steps"] = o.steps;
    return j;
}

json mode_simulate(const ExperimentConfig& cfg, Artifacts* art) {
    const SimOutcome o = simulate(params_of(cfg), StefanParams{cfg.gamma}, initial_data_of(cfg), cfg.horizon, cfg.sim);
    if (art) {
        art->push_back(trajectory_table(o));
        for (auto& t : snapshot_tables(o)) art->push_back(std::move(t));
    }
    json j{{"gamma", cfg.gamma}, {"g0", cfg.g0}};
    j.update(sim_summary(o));
    return j;
}

json mode_gamma_star(const ExperimentConfig& cfg, Artifacts*) {
    const GammaStarReport r =
        classify_threshold_gamma(params_of(cfg), initial_data_of(cfg), cfg.sim, cfg.gamma_star);
    json j;
    j["g0"] = cfg.g0;
    j["gamma_star"] = r.gamma_star;
    j["gamma_vanishing"] = r.gamma_lo;
    j["gamma_spreading"] = r.gamma_hi;
    j["simulations"] = r.simulations;
    return j;
}

json mode_crosscheck(const ExperimentConfig& cfg, Artifacts* art) {
    const json speed = mode_speed_for_gamma(cfg, art);
    const SimOutcome o = simulate(params_of(cfg), StefanParams{cfg.gamma}, initial_data_of(cfg), cfg.horizon, cfg.sim);
    if (art) art->push_back(trajectory_table(o));
    const double c = speed["c_gamma"].get<double>();
    json j;
    j["gamma"] = cfg.gamma;
    j["c_gamma"] = c;
    j["classification"] = to_string(o.classification);
    j["speed_estimate"] = o.speed_estimate;
    j["relative_discrepancy"] = std::abs(o.speed_estimate - c) / c;
    j["u_at_0"] = o.final_state.u_hat.front();
    j["v_at_0"] = o.final_state.v.front();
    return j;
}

using ModeFn = json (*)(const ExperimentConfig&, Artifacts*);

ModeFn mode_fn(const std::string& mode) {
    if (mode == "semiwave") return mode_semiwave;
    if (mode == "critical-speed") return mode_critical_speed;
    if (mode == "speed-for-gamma") return mode_speed_for_gamma;
    if (mode == "simulate") return mode_simulate;
    if (mode == "gamma-star") return mode_gamma_star;
    if (mode == "crosscheck") return mode_crosscheck;
    return nullptr;
}

std::string cell_value(const json& v) {
    if (v.is_number_float()) return fmt12(v.get<double>());
    if (v.is_number()) return v.dump();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "";
    std::string s = v.get<std::string>();
    std::replace(s.begin(), s.end(), ',', ';');
    return s;
}

json mode_sweep(const ExperimentConfig& cfg, Table& table, int jobs) {
    std::vector<std::vector<double>> cells;
    const auto& a0 = cfg.axes[0];
    for (double x : a0.values) {
        if (cfg.axes.size() == 1) {
            cells.push_back({x});
        } else {
            for (double y : cfg.axes[1].values) cells.push_back({x, y});
        }
    }
    const ModeFn fn = mode_fn(cfg.sweep_target);
    std::vector<json> results(cells.size());
    std::vector<std::string> errors(cells.size());

    auto run_cell = [&](std::size_t i) {
        ExperimentConfig local = cfg;
        local.mode = cfg.sweep_target;
        for (std::size_t a = 0; a < cells[i].size(); ++a) axis_setters().at(cfg.axes[a].key)(local, cells[i][a]);
        try {
            validate(local);
            results[i] = fn(local, nullptr);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };
#ifdef LVFB_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs) if (jobs > 1)
    for (long i = 0; i < static_cast<long>(cells.size()); ++i) run_cell(static_cast<std::size_t>(i));
#else
    (void)jobs;
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
#endif

    // Columns: axis values, status, then the union of the remaining result
    // keys in first appearance order.
    std::vector<std::string> keys;
    for (const json& r : results) {
        if (!r.is_object()) continue;
        for (auto it = r.begin(); it != r.end(); ++it) {
            const bool is_axis = std::any_of(cfg.axes.begin(), cfg.axes.end(),
                                             [&](const SweepAxis& ax) { return ax.key == it.key(); });
            if (!is_axis && std::find(keys.begin(), keys.end(), it.key()) == keys.end()) keys.push_back(it.key());
        }
    }
    table.name = "sweep.csv";
    for (const auto& ax : cfg.axes) table.header.push_back(ax.key);
    table.header.push_back("status");
    for (const auto& k : keys) table.header.push_back(k);
    int failed = 0;
    json rows = json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::vector<std::string> row;
        json jr;
        for (std::size_t a = 0; a < cells[i].size(); ++a) {
            row.push_back(fmt12(cells[i][a]));
            jr[cfg.axes[a].key] = cells[i][a];
        }
        if (!errors[i].empty()) {
            ++failed;
            std::string msg = errors[i];
            std::replace(msg.begin(), msg.end(), ',', ';');
            row.push_back("error: " + msg);
            jr["status"] = "error";
            jr["error"] = errors[i];
        } else {
            row.push_back("ok");
            jr["status"] = "ok";
        }
        for (const auto& k : keys) {
            row.push_back(results[i].is_object() && results[i].contains(k) ? cell_value(results[i][k]) : "");
        }
        if (results[i].is_object()) jr["result"] = results[i];
        rows.push_back(jr);
        table.rows.push_back(std::move(row));
    }
    json j;
    j["target"] = cfg.sweep_target;
    j["cells"] = cells.size();
    j["failed_cells"] = failed;
    j["rows"] = rows;
    return j;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("cli.validate: " + what);
}

}  // namespace

// ---------------------------------------------------------------- public

ExperimentConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("cli.parse_config: ") + e.what());
    }
    std::map<std::string, const Entry*> index;
    for (const Entry& e : entries()) index[e.key] = &e;

    ExperimentConfig cfg;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            const auto it = index.find(name);
            if (it == index.end()) throw ConfigError("cli.parse_config: unknown key '" + name + "'");
            it->second->set(cfg, node.data());
            continue;
        }
        for (const auto& [key, leaf] : node) {
            const std::string full = name + "." + key;
            const auto it = index.find(full);
            if (it == index.end()) throw ConfigError("cli.parse_config: unknown key '" + full + "'");
            it->second->set(cfg, leaf.data());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cli.load_config: cannot open " + path);
    return parse_config(f);
}

CompetitionParams params_of(const ExperimentConfig& cfg) {
    if (cfg.scalar_mode) return CompetitionParams::scalar_mode(cfg.d, cfg.r, cfg.h);
    return CompetitionParams::make(cfg.d, cfg.r, cfg.h, cfg.k);
}

InitialData initial_data_of(const ExperimentConfig& cfg) {
    InitialData init;
    if (cfg.shape == "bump") {
        init = InitialData::bump(cfg.g0, cfg.amplitude, cfg.v_inf);
    } else if (cfg.shape == "cosine") {
        init = InitialData::cosine(cfg.g0, cfg.amplitude, cfg.v_inf);
    } else if (cfg.shape == "table") {
        std::ifstream f(cfg.table);
        if (!f) throw ConfigError("cli.initial_data: cannot open table " + cfg.table);
        std::string line;
        std::getline(f, line);  // header
        std::vector<double> xs, us;
        while (std::getline(f, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const std::vector<double> row = to_list("initial.table", line);
            if (row.size() != 2) throw ConfigError("cli.initial_data: table rows must be x,u");
            xs.push_back(row[0]);
            us.push_back(row[1]);
        }
        if (xs.size() < 3 || xs.front() != 0.0) throw ConfigError("cli.initial_data: table must start at x = 0");
        const double dx = xs.back() / static_cast<double>(xs.size() - 1);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (std::abs(xs[i] - dx * static_cast<double>(i)) > 1e-9 * xs.back()) {
                throw ConfigError("cli.initial_data: table x values must be uniform");
            }
        }
        init.g0 = xs.back();
        init.u0 = us;
        init.v0 = {cfg.v_inf, cfg.v_inf};
        init.v0_length = init.g0;
        init.v_inf = cfg.v_inf;
    } else {
        throw ConfigError("cli.initial_data: unknown shape '" + cfg.shape + "'");
    }
    try {
        init.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("cli.initial_data: ") + e.what());
    }
    return init;
}

void validate(const ExperimentConfig& cfg) {
    require(std::find(kModes.begin(), kModes.end(), cfg.mode) != kModes.end(), "unknown mode '" + cfg.mode + "'");
    try {
        (void)params_of(cfg);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("cli.validate: ") + e.what());
    }
    require(cfg.gamma > 0.0, "stefan.gamma must be positive");
    require(cfg.g0 > 0.0, "stefan.g0 must be positive");
    require(cfg.amplitude > 0.0, "initial.amplitude must be positive");
    require(cfg.v_inf > 0.0, "initial.v_inf must be positive");
    require(cfg.c >= 0.0, "semiwave.c must be nonnegative");
    const SemiWaveConfig& s = cfg.semiwave;
    require(s.n >= 16 && s.n % 2 == 1, "semiwave.n must be odd and at least 16");
    require(s.s_left >= 0.0 && s.s_right >= 0.0, "semiwave extents must be nonnegative");
    for (double tol : {s.fp_tol, s.c_tol, s.root_tol, s.trivial_tol_rel, s.residual_tol, s.newton_tol}) {
        require(tol > 0.0, "every semiwave tolerance must be positive");
    }
    require(s.max_sweeps > 0 && s.max_newton > 0, "iteration caps must be positive");
    require(cfg.horizon > 0.0, "sim.horizon must be positive");
    const SimConfig& m = cfg.sim;
    require(m.n_u >= 16, "sim.n_u must be at least 16");
    require(m.dx_v >= 0.0, "sim.dx_v must be nonnegative");
    for (double tol : {m.dt_max, m.cfl, m.reaction_budget, m.eps_mono, m.vanish_tol, m.plateau_tol,
                       m.trailing_window, m.output_interval, m.v_margin}) {
        require(tol > 0.0, "every sim tolerance must be positive");
    }
    const GammaStarConfig& g = cfg.gamma_star;
    require(g.horizon > 0.0 && g.gamma_lo > 0.0 && g.gamma_hi > g.gamma_lo && g.rel_tol > 0.0,
            "gamma_star needs horizon > 0 and 0 < gamma_lo < gamma_hi, rel_tol > 0");
    require(cfg.jobs >= 1, "output.jobs must be at least 1");
    if (cfg.mode == "simulate" || cfg.mode == "gamma-star" || cfg.mode == "crosscheck") (void)initial_data_of(cfg);
    if (cfg.mode == "sweep") {
        require(!cfg.axes.empty() && cfg.axes.size() <= 2, "sweep needs one or two axes");
        require(cfg.sweep_target != "sweep" && mode_fn(cfg.sweep_target) != nullptr,
                "sweep.target must name a non-sweep mode");
        for (const auto& ax : cfg.axes) {
            require(axis_setters().count(ax.key) == 1, "unknown sweep axis '" + ax.key + "'");
            require(!ax.values.empty(), "sweep axis '" + ax.key + "' has an empty range");
        }
    }
}

int run(const ExperimentConfig& cfg, std::ostream& err) {
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    json summary;
    summary["mode"] = cfg.mode;
    summary["config"] = resolved_config(cfg);
    Artifacts art;
    try {
        if (cfg.mode == "sweep") {
            Table t;
            summary["results"] = mode_sweep(cfg, t, cfg.jobs);
            art.push_back(std::move(t));
        } else {
            summary["results"] = mode_fn(cfg.mode)(cfg, &art);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const UndecidedAtHorizon& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        err << "error: cli.run: cannot create " << dir.string() << ": " << ec.message() << "\n";
        return 1;
    }
    std::ofstream f(dir / "results.json");
    f << summary.dump(2) << "\n";
    for (const Table& t : art) write_table(dir, t);
    return 0;
}

}  // namespace lvfb::cli
