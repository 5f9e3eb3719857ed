#pragma once

// Independent reference implementations for the tests. Nothing here reuses
// the solver code paths it is compared against.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "lvfb/model.hpp"
#include "lvfb/semiwave.hpp"
#include "lvfb/stefan_sim.hpp"

namespace lvfb::oracle {

/// d y'' + adv y' + f(y) = 0, y(0) = 0, y -> target.
/// Kpp:   adv = -c, f(y) = a y (b - y), target = b.
/// Omega: adv = +c, f(w) = r (T - w)(1 - T + w), target T = h u*.
struct ScalarShootSpec {
    enum class Form { Kpp, Omega };
    Form form = Form::Kpp;
    double d = 1.0;
    double c = 0.0;
    double a = 1.0;  // Kpp
    double b = 1.0;  // Kpp
    double r = 1.0;  // Omega
    double target_omega = 0.0;  // Omega: h u*
    double s_max = 40.0;

    static ScalarShootSpec kpp(double d, double a, double b, double c, double s_max = 40.0);
    static ScalarShootSpec omega(double d, double c, double r, double h, double u_star, double s_max = 40.0);

    double target() const;
    double adv() const;
    double f(double y) const;
};

/// Integrates from s = 0 with y'(0) = slope_guess by Dormand-Prince 5(4),
/// tolerance 1e-13, and returns y(S_max) - target. BlowUp when y leaves
/// [-1, 2 target].
double shoot_scalar(const ScalarShootSpec& spec, double slope_guess);

struct ShootProfile {
    double slope = 0.0;
    std::vector<double> s;  // sample points where the trajectory is trusted
    std::vector<double> y;
    int iterations = 0;
};

/// Slope of the connecting orbit by bisection on the overshoot/undershoot
/// outcome, then the trajectory sampled at `samples` (ascending) while the
/// undershooting and overshooting bracket shots differ by at most
/// `trust_spread`.
ShootProfile shoot_profile(const ScalarShootSpec& spec, const std::vector<double>& samples,
                           double slope_tol = 1e-13, double trust_spread = 1e-8);

/// b sqrt(ab / (3d)): slope at 0 of the c = 0 KPP semi-wave.
double kpp_c0_slope(double d, double a, double b);

/// Root of gamma * chi_c'(0) = c for the KPP semi-wave, by shooting.
double kpp_speed_for_gamma_shooting(double d, double a, double b, double gamma, double tol = 1e-9);

struct ResidualReport {
    double sup_residual = 0.0;
    std::size_t node_of_max = 0;
    std::pair<double, double> per_equation{0.0, 0.0};
};

/// Central-difference defect of
///   phi'' - c phi' + phi (1 - phi - k psi)    (s > 0)
///   d psi'' - c psi' + r psi (1 - psi - h phi)
/// in the original variables, skipping the nodes next to s = 0. Only nodes
/// with s >= s_min are reported.
ResidualReport residual(const SemiWaveProfile& profile, const CompetitionParams& p, double c,
                        double s_min = -HUGE_VAL);

/// Same as simulate with a 4x finer u and v grid and an 8x smaller time step.
SimConfig refined_config(const SimConfig& cfg, double g0);
SimOutcome fine_reference_run(const CompetitionParams& p, const StefanParams& stefan, const InitialData& init,
                              double horizon, const SimConfig& cfg = {});

/// Forward Euler for u' = u (1 - u).
double logistic_euler(double initial, double t, double dt);

}  // namespace lvfb::oracle
