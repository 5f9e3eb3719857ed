#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lvfb/kernels.hpp"
#include "lvfb/model.hpp"

namespace lvfb {

struct SemiWaveConfig {
    int n = 4001;               // nodes on [-S_left, S_right]; odd so that s = 0 is a node
    double s_left = 0.0;        // 0 selects max(60, 40/|mu_hat_2|)
    double s_right = 0.0;
    double fp_tol = 1e-8;       // sup-norm change between sweeps
    double c_tol = 1e-3;        // bisection width for critical_speed
    double root_tol = 1e-6;     // bisection width for speed_for_gamma
    long max_sweeps = 100000;
    double trivial_tol_rel = 1e-3;  // trivial_tol = trivial_tol_rel * u*
    double residual_tol = 1e-6;
    bool newton_polish = true;
    double newton_tol = 1e-10;
    int max_newton = 30;
    bool check_invariants = true;
    double monotone_slack = 1e-7;  // allowed increase between sweeps
    double collapse_window = 4.0;  // window [0, X] for the local collapse metric
};

struct SemiWaveProfile {
    double c = 0.0;
    std::vector<double> s_grid;
    std::vector<double> phi;  // 0 for s <= 0, increasing to u*
    std::vector<double> psi;  // decreasing from ~1 to v*
    double phi_slope_at_0 = 0.0;
    double decay_rate = 0.0;  // fitted tail exponent, NaN when the fit window is empty
    long sweeps = 0;
    int newton_iterations = 0;
    double residual = 0.0;         // sup discrete defect of the returned profile
    double first_sweep_overshoot = 0.0;
    // Converged monotone iterate before polishing (cooperative variables).
    std::vector<double> iterate_phi;
    std::vector<double> iterate_psi_tilde;
};

struct NoNontrivialSolution {
    double c = 0.0;
    double sup_phi = 0.0;
    double local_sup_phi = 0.0;
    long sweeps = 0;
    std::string reason;  // "collapsed" or "front_escaped"
};

using SemiWaveResult = std::variant<SemiWaveProfile, NoNontrivialSolution>;

/// Working state of the monotone iteration, cooperative variables
/// phi_tilde = phi, psi_tilde = 1 - psi.
struct IterationState {
    std::vector<double> s_grid;
    std::vector<double> phi_tilde;
    std::vector<double> psi_tilde;
    std::pair<std::vector<double>, std::vector<double>> upper;
    std::pair<std::vector<double>, std::vector<double>> lower;
    double beta = 0.0;
    long sweep_count = 0;

    std::size_t origin() const { return (s_grid.size() - 1) / 2; }
};

/// Default half-widths of the truncated domain for speed c.
double default_semiwave_extent(const CompetitionParams& p, double c);

std::vector<double> semiwave_grid(double s_left, double s_right, int n);

/// Upper solution on the symmetric grid of n nodes over [-S, S] (S_left must
/// equal S_right so that s = 0 is a node).
std::pair<std::vector<double>, std::vector<double>> build_upper_solution(const CompetitionParams& p,
                                                                         double s_left,
                                                                         double s_right, int n);

/// State seeded from the upper solution, with the zero pair as lower solution.
IterationState initial_iteration_state(const CompetitionParams& p, const SemiWaveConfig& cfg,
                                       double extent);

/// One application of the integral operator. Output clamped into
/// [0, u*] x [0, h u*]; sweep_count incremented.
IterationState apply_F(const IterationState& state, const CompetitionParams& p, double c,
                       kernels::Backend backend = kernels::Backend::Parallel);

/// Optional warm start: `upper` replaces the default upper solution (it must
/// be an upper solution for speed c on the same grid, e.g. the monotone
/// iterate at a smaller speed); `lower` likewise.
struct WarmStart {
    std::optional<std::pair<std::vector<double>, std::vector<double>>> upper;
    std::optional<std::pair<std::vector<double>, std::vector<double>>> lower;
    double extent = 0.0;  // grid half-width; 0 uses the default for c
};

SemiWaveResult solve_semiwave(const CompetitionParams& p, double c, const SemiWaveConfig& cfg = {},
                              const WarmStart& warm = {});

/// Throws when the result is NoNontrivialSolution.
SemiWaveProfile solve_semiwave_profile(const CompetitionParams& p, double c,
                                       const SemiWaveConfig& cfg = {});

struct CriticalSpeedReport {
    double c_star = 0.0;
    double lower_bound = 0.0;  // 2 sqrt(1-k)
    double upper_bound = 0.0;  // 2 sqrt(u*)
    bool at_lower_bound = false;  // no solution found anywhere in the bracket
    int solves = 0;
    int undecided_probes = 0;  // probes stopped by the sweep cap, counted as nonexistence
};

double critical_speed(const CompetitionParams& p, const SemiWaveConfig& cfg = {});
CriticalSpeedReport critical_speed_report(const CompetitionParams& p, const SemiWaveConfig& cfg = {});

struct SpeedForGamma {
    double c_gamma = 0.0;
    SemiWaveProfile profile;
};

SpeedForGamma speed_for_gamma(const CompetitionParams& p, double gamma, const SemiWaveConfig& cfg = {});

struct PerturbLower {
    double delta;
};
struct PerturbUpper {
    double tau;
};
using PerturbDirection = std::variant<PerturbLower, PerturbUpper>;

/// Transformed constants of the perturbed problem after the sigma scaling.
struct PerturbedSystem {
    CompetitionParams params;
    double gamma;
    double speed_factor;  // c = speed_factor * c_tilde
};

PerturbedSystem perturbed_system(const CompetitionParams& p, double gamma, PerturbDirection dir);

double perturbed_speed(const CompetitionParams& p, double gamma, PerturbDirection dir,
                       const SemiWaveConfig& cfg = {});

struct DecayFit {
    double exponent = 0.0;  // mean of the two component exponents
    double phi_exponent = 0.0;
    double psi_exponent = 0.0;
    double amplitude_ratio = 0.0;  // m/n of the two gap components
    int phi_nodes = 0;
    int psi_nodes = 0;
};

/// Log-linear fit of u* - phi and h u* - psi_tilde over the tail nodes where
/// the gaps lie in [1e-9, 1e-4]. FitError when the exponents differ by more
/// than 10% or a gap changes sign in the window.
DecayFit decay_fit_report(const SemiWaveProfile& profile, const CompetitionParams& p);
double decay_fit(const SemiWaveProfile& profile, const CompetitionParams& p);

/// Sup of phi over [0, x_window].
double local_sup_phi(const std::vector<double>& s_grid, const std::vector<double>& phi, double x_window);

}  // namespace lvfb
