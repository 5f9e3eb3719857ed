#pragma once

#include <optional>
#include <vector>

namespace lvfb {

/// Solution of a scalar half-line problem on [0, S_max].
struct ScalarProfile {
    std::vector<double> grid;
    std::vector<double> values;
    double slope_at_0 = 0.0;
    double limit_at_infinity = 0.0;
    double decay_exponent = 0.0;
    int newton_iterations = 0;
    double residual = 0.0;  // sup of the discrete defect at interior nodes
};

struct ScalarSolveOptions {
    int n = 4001;                  // grid nodes
    double s_max = 0.0;            // 0 selects 40/|decay exponent|
    double newton_tol = 1e-12;     // sup-norm of the discrete residual
    int max_newton = 60;
    double tail_tol = 1e-10;
    std::optional<std::vector<double>> initial;  // same size as n, else a saturating exponential
};

/// d chi'' - c chi' + a chi (b - chi) = 0, chi(0) = 0, chi(inf) = b, 0 <= c < 2 sqrt(a b d).
/// decay_exponent holds the exponent in the printed form (c - sqrt(c^2 + 4ab))/(2d);
/// see kpp_decay_exponent_linearized for the rate of the linearized tail.
ScalarProfile solve_kpp(double d, double a, double b, double c, const ScalarSolveOptions& opt = {});

/// d w'' + c w' + r (h u* - w)(1 - h u* + w) = 0, w(0) = 0, w(inf) = h u*.
ScalarProfile solve_omega(double d, double c, double r, double h, double u_star,
                          const ScalarSolveOptions& opt = {});

double kpp_decay_exponent_printed(double d, double a, double b, double c);

/// Root of d m^2 - c m - a b = 0 with m < 0: the linearization of the KPP
/// equation about chi = b.
double kpp_decay_exponent_linearized(double d, double a, double b, double c);

double omega_decay_exponent(double d, double c, double r);

/// One-sided slope at s = 0 of a solution of d y'' + adv y' + g(y) = 0 with
/// y(0) = 0, y(h) = y1, using the ODE to remove the O(h) and O(h^2) terms.
/// g0 = g(0), dg0 = g'(0).
double ode_informed_slope(double y1, double h, double d, double adv, double g0, double dg0);

/// Least-squares fit of log(limit - values) against grid over the nodes
/// where the gap lies in [lo, hi]. Returns the fitted exponent.
double fit_tail_exponent(const std::vector<double>& grid, const std::vector<double>& values,
                         double limit, double lo = 1e-9, double hi = 1e-4);

/// Root c of gamma * chi_c'(0) = c for the KPP semi-wave (the Fisher free
/// boundary spreading speed), by bisection to `tol` on [0, 2 sqrt(abd)).
double kpp_speed_for_gamma(double d, double a, double b, double gamma, double tol = 1e-7,
                           const ScalarSolveOptions& opt = {});

}  // namespace lvfb
