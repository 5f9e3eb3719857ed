#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lvfb/semiwave.hpp"
#include "lvfb/stefan_sim.hpp"

namespace lvfb::cli {

inline const std::vector<std::string> kModes = {"semiwave",   "critical-speed", "speed-for-gamma", "simulate",
                                                "gamma-star", "crosscheck",     "sweep"};

struct SweepAxis {
    std::string key;
    std::vector<double> values;
};

struct ExperimentConfig {
    std::string mode = "speed-for-gamma";

    double d = 1.0, r = 1.0, h = 0.5, k = 0.5;
    bool scalar_mode = false;

    double gamma = 1.0;
    double g0 = 3.0;

    std::string shape = "bump";  // bump | cosine | table
    double amplitude = 1.0;
    double v_inf = 1.0;
    std::string table;  // CSV with columns x,u; x uniform from 0 to g0

    double c = 0.0;  // speed for mode semiwave
    SemiWaveConfig semiwave;

    double horizon = 300.0;
    SimConfig sim;
    GammaStarConfig gamma_star;

    std::string sweep_target = "speed-for-gamma";
    std::vector<SweepAxis> axes;

    std::string out_dir = "out";
    int jobs = 1;
};

/// Parses the key = value text format. Throws ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Throws ConfigError naming the offending key.
void validate(const ExperimentConfig& cfg);

CompetitionParams params_of(const ExperimentConfig& cfg);
InitialData initial_data_of(const ExperimentConfig& cfg);

/// Runs the configured mode, writing results.json and the CSV files into
/// cfg.out_dir. Returns the process exit status: 0 success, 1 config error,
/// 2 solver failure, 3 undecided at horizon.
int run(const ExperimentConfig& cfg, std::ostream& err);

/// printf("%.12g")
std::string fmt12(double x);

}  // namespace lvfb::cli
