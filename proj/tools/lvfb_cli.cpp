#include <iostream>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "lvfb/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Semi-wave speeds and free-boundary simulations for weak-competition Lotka-Volterra"};
    std::string config_path;
    std::string mode;
    std::string out;
    int jobs = 0;
    app.add_option("--config", config_path, "key = value config file")->required();
    app.add_option("--mode", mode, "override the mode from the config");
    app.add_option("--jobs", jobs, "concurrent sweep cells (default 1)");
    app.add_option("--out", out, "output directory");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    lvfb::cli::ExperimentConfig cfg;
    try {
        cfg = lvfb::cli::load_config(config_path);
    } catch (const lvfb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    if (!mode.empty()) cfg.mode = mode;
    if (!out.empty()) cfg.out_dir = out;
    if (jobs != 0) cfg.jobs = jobs;
    return lvfb::cli::run(cfg, std::cerr);
}
