#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lvfb/model.hpp"

namespace lvfb {

enum class Classification { Spreading, Vanishing, Undecided };

std::string to_string(Classification c);

struct StefanParams {
    double gamma = 1.0;
};

/// u0 sampled uniformly on [0, g0] (u0.back() is the value at g0), v0
/// sampled uniformly on [0, v0_length] and equal to v_inf beyond it.
struct InitialData {
    double g0 = 1.0;
    std::vector<double> u0;
    std::vector<double> v0;
    double v0_length = 1.0;
    double v_inf = 1.0;

    /// Throws DomainError when the invariants fail.
    void validate() const;

    static InitialData bump(double g0, double amplitude, double v_level = 1.0, int n_u = 801);
    static InitialData cosine(double g0, double amplitude, double v_level = 1.0, int n_u = 801);
};

struct FreeBoundaryState {
    double t = 0.0;
    double g = 0.0;
    double g_dot = 0.0;
    std::vector<double> u_hat;  // nodes xi_i = i / n_u, u_hat.back() = 0
    std::vector<double> v;      // nodes x_j = j * dx_v on [0, L]
    double dx_v = 0.0;
    double L = 0.0;

    double v_at(double x) const;
    double u_at(double x) const;
    /// g * sum of control-volume weights times u_hat.
    double mass() const;
};

struct SimConfig {
    int n_u = 800;          // intervals on the unit front-fixed grid
    double dx_v = 0.0;      // 0 selects g0 / n_u
    double dt_max = 0.05;
    double cfl = 0.5;       // |g'| dt / (g dxi) bound
    double reaction_budget = 0.5;
    double eps_mono = 1e-10;
    double vanish_tol = 1e-4;
    double plateau_tol = 1e-5;
    double trailing_window = 10.0;
    double output_interval = 0.5;
    bool stop_on_classification = false;
    bool reaction = true;   // test hook: false switches both reaction terms off
    bool evolve_v = true;   // false runs the u equation alone (scalar reference)
    double v_margin = 10.0; // L is doubled when g > L - v_margin
    std::vector<double> snapshot_times;
    double snapshot_extent = 20.0;  // snapshots cover [0, g + extent]
};

struct TrajectorySample {
    double t;
    double g;
    double g_dot;
    double u_sup;
    double u_at_0;
    double v_at_0;
};

struct Snapshot {
    double t;
    std::vector<double> x;
    std::vector<double> u;
    std::vector<double> v;
};

struct SimOutcome {
    Classification classification = Classification::Undecided;
    std::vector<std::pair<double, double>> g_series;
    std::vector<double> u_sup_series;
    std::vector<TrajectorySample> trajectory;
    std::vector<Snapshot> snapshots;
    double speed_estimate = 0.0;
    double classified_at = -1.0;  // time of the first classification, -1 if none
    long steps = 0;
    FreeBoundaryState final_state;
};

FreeBoundaryState initial_state(const CompetitionParams& p, const InitialData& init, const SimConfig& cfg);

/// Upper bound on dt from the CFL rule, the reaction budget and dt_max.
double stable_dt(const FreeBoundaryState& s, const CompetitionParams& p, const SimConfig& cfg);

/// Diagnostics of one step, used by the conservation test.
struct StepReport {
    double front_flux = 0.0;     // diffusive plus advective flux through xi = 1
    double reaction_mass = 0.0;  // g_new * sum of weights times reaction
    double g_dot_used = 0.0;     // front speed used for the moving grid
};

FreeBoundaryState step(const FreeBoundaryState& state, const CompetitionParams& p, const StefanParams& stefan,
                       double dt, const SimConfig& cfg, StepReport* report = nullptr);

SimOutcome simulate(const CompetitionParams& p, const StefanParams& stefan, const InitialData& init, double horizon,
                    const SimConfig& cfg = {});

double spreading_threshold(const CompetitionParams& p);

struct GammaStarConfig {
    double horizon = 300.0;
    double gamma_lo = 0.1;
    double gamma_hi = 10.0;
    double rel_tol = 0.01;  // stop when gamma_hi / gamma_lo < 1 + rel_tol
    int max_expand = 12;
};

struct GammaStarReport {
    double gamma_star = 0.0;
    double gamma_lo = 0.0;  // vanishing
    double gamma_hi = 0.0;  // spreading
    int simulations = 0;
};

/// gamma* by bisection on the spreading predicate. Returns 0 without
/// simulating when g0 is at or above the spreading threshold.
GammaStarReport classify_threshold_gamma(const CompetitionParams& p, const InitialData& init,
                                         const SimConfig& cfg = {}, const GammaStarConfig& gcfg = {});

}  // namespace lvfb
