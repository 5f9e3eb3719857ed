#include "lvfb/scalar_waves.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "lvfb/errors.hpp"
#include "lvfb/linalg.hpp"

namespace lvfb {

namespace {

// d y'' + adv y' + g(y) = 0 on [0, S], y(0) = 0, y(S) = target.
struct ScalarBvp {
    double d;
    double adv;
    std::function<double(double)> g;
    std::function<double(double)> dg;
    double target;
    const char* op;
};

double residual_into(const ScalarBvp& bvp, double h, const std::vector<double>& y,
                     std::vector<double>& res) {
    const std::size_t n = y.size();
    const double a = bvp.d / (h * h);
    const double b = bvp.adv / (2.0 * h);
    double sup = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        res[i] = a * (y[i + 1] - 2.0 * y[i] + y[i - 1]) + b * (y[i + 1] - y[i - 1]) + bvp.g(y[i]);
        sup = std::max(sup, std::abs(res[i]));
    }
    return sup;
}

ScalarProfile solve_bvp(const ScalarBvp& bvp, double s_max, double rate, double shift,
                        const ScalarSolveOptions& opt) {
    const int n = opt.n;
    if (n < 16) throw DomainError(std::string(bvp.op) + ": grid needs at least 16 nodes");
    if (!(s_max > 0.0)) throw DomainError(std::string(bvp.op) + ": S_max must be positive");

    ScalarProfile out;
    out.grid.resize(n);
    const double h = s_max / (n - 1);
    for (int i = 0; i < n; ++i) out.grid[i] = h * i;
    out.grid[n - 1] = s_max;

    std::vector<double> y(n);
    if (opt.initial) {
        if (opt.initial->size() != static_cast<std::size_t>(n)) {
            throw DomainError(std::string(bvp.op) + ": initial iterate has wrong size");
        }
        y = *opt.initial;
    } else {
        // Saturating ramp with the tail rate; a straight line over [0, S_max]
        // is too far from the solution for undamped Newton on long domains.
        for (int i = 0; i < n; ++i) {
            y[i] = -bvp.target * std::expm1(rate * std::max(0.0, out.grid[i] - shift));
        }
    }
    y[0] = 0.0;
    y[n - 1] = bvp.target;

    const std::size_t m = n - 2;
    std::vector<double> res(n, 0.0), lower(m), diag(m), upper(m), rhs(m), trial(n), tres(n, 0.0);
    const double a = bvp.d / (h * h);
    const double b = bvp.adv / (2.0 * h);

    double sup = residual_into(bvp, h, y, res);
    int it = 0;
    for (; it < opt.max_newton && sup > opt.newton_tol; ++it) {
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t i = j + 1;
            lower[j] = a - b;
            diag[j] = -2.0 * a + bvp.dg(y[i]);
            upper[j] = a + b;
            rhs[j] = -res[i];
        }
        linalg::solve_tridiagonal(lower, diag, upper, rhs);

        // Backtracking on the sup-norm residual.
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            trial = y;
            for (std::size_t j = 0; j < m; ++j) trial[j + 1] += step * rhs[j];
            const double ts = residual_into(bvp, h, trial, tres);
            if (std::isfinite(ts) && (ts < sup || ts <= opt.newton_tol)) {
                y.swap(trial);
                res.swap(tres);
                sup = ts;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    // Roundoff floor of the second difference: the target is unattainable on
    // very fine grids, accept anything within a few ulps of it.
    const double floor = 64.0 * 2.2e-16 * std::abs(bvp.target) * (a + std::abs(b));
    if (!(sup <= std::max(opt.newton_tol, floor))) {
        throw NonConvergence(std::string(bvp.op) + ": Newton stalled with residual " +
                             std::to_string(sup) + " after " + std::to_string(it) + " iterations");
    }

    out.values = std::move(y);
    out.newton_iterations = it;
    out.residual = sup;
    out.limit_at_infinity = bvp.target;
    out.slope_at_0 = ode_informed_slope(out.values[1], h, bvp.d, bvp.adv, bvp.g(0.0), bvp.dg(0.0));
    return out;
}

void check_profile(const ScalarProfile& p, double tail_tol, const char* op) {
    for (std::size_t i = 1; i < p.values.size(); ++i) {
        if (!(p.values[i] > p.values[i - 1])) {
            // Flat to roundoff at the far end is allowed.
            if (p.limit_at_infinity - p.values[i] < 1e-12 && p.values[i] >= p.values[i - 1] - 1e-14) {
                continue;
            }
            throw NumericalError(std::string(op) + ": profile not increasing at node " + std::to_string(i));
        }
    }
    const double tail = std::abs(p.values[p.values.size() - 2] - p.limit_at_infinity);
    if (tail > std::max(tail_tol, 1e-6)) {
        throw NumericalError(std::string(op) + ": tail not converged (" + std::to_string(tail) + ")");
    }
}

}  // namespace

double kpp_decay_exponent_printed(double d, double a, double b, double c) {
    return (c - std::sqrt(c * c + 4.0 * a * b)) / (2.0 * d);
}

double kpp_decay_exponent_linearized(double d, double a, double b, double c) {
    const double q = a * b;
    const double disc = std::sqrt(c * c + 4.0 * q * d);
    // product of roots is -q/d; the positive root is stable to evaluate
    return -q / (d * ((c + disc) / (2.0 * d)));
}

double omega_decay_exponent(double d, double c, double r) {
    return (-c - std::sqrt(c * c + 4.0 * d * r)) / (2.0 * d);
}

double ode_informed_slope(double y1, double h, double d, double adv, double g0, double dg0) {
    // y(h) = h y' + h^2/2 y'' + h^3/6 y''' with y'' = -(adv y' + g0)/d and
    // y''' = -(adv y'' + dg0 y')/d, solved for y'(0).
    const double coef = h - h * h * adv / (2.0 * d) + h * h * h / 6.0 * (adv * adv / (d * d) - dg0 / d);
    const double shift = -h * h * g0 / (2.0 * d) + h * h * h / 6.0 * (adv * g0 / (d * d));
    return (y1 - shift) / coef;
}

double fit_tail_exponent(const std::vector<double>& grid, const std::vector<double>& values,
                         double limit, double lo, double hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double gap = limit - values[i];
        if (gap >= lo && gap <= hi) {
            const double x = grid[i];
            const double ly = std::log(gap);
            sx += x;
            sy += ly;
            sxx += x * x;
            sxy += x * ly;
            ++cnt;
        }
    }
    if (cnt < 8) throw FitError("scalar_waves.fit_tail_exponent: fewer than 8 nodes in the fit window");
    const double den = cnt * sxx - sx * sx;
    return (cnt * sxy - sx * sy) / den;
}

ScalarProfile solve_kpp(double d, double a, double b, double c, const ScalarSolveOptions& opt) {
    if (!(d > 0.0) || !(a > 0.0) || !(b > 0.0)) {
        throw DomainError("scalar_waves.solve_kpp: d, a, b must be positive");
    }
    if (c < 0.0) throw DomainError("scalar_waves.solve_kpp: c must be nonnegative");
    const double cmax = 2.0 * std::sqrt(a * b * d);
    if (c >= cmax) {
        throw SpeedOutOfRange("scalar_waves.solve_kpp: c = " + std::to_string(c) +
                              " is not below 2 sqrt(abd) = " + std::to_string(cmax));
    }
    const double lin = kpp_decay_exponent_linearized(d, a, b, c);
    // Near the threshold the profile stays small over about half a period of
    // the linearization at 0, so the domain is lengthened by that much.
    const double half_period = M_PI * 2.0 * d / std::sqrt(cmax * cmax - c * c);
    const double s_max = opt.s_max > 0.0 ? opt.s_max : 40.0 / std::abs(lin) + half_period;
    const double shift = std::min(0.5 * s_max, std::max(0.0, half_period - M_PI * std::sqrt(d / (a * b))));

    ScalarBvp bvp{d, -c, [a, b](double y) { return a * y * (b - y); },
                  [a, b](double y) { return a * (b - 2.0 * y); }, b, "scalar_waves.solve_kpp"};
    ScalarProfile out = solve_bvp(bvp, s_max, lin, shift, opt);
    out.decay_exponent = kpp_decay_exponent_printed(d, a, b, c);
    check_profile(out, opt.tail_tol, bvp.op);
    return out;
}

double kpp_speed_for_gamma(double d, double a, double b, double gamma, double tol,
                           const ScalarSolveOptions& opt) {
    if (!(gamma > 0.0)) throw DomainError("scalar_waves.kpp_speed_for_gamma: gamma must be positive");
    double lo = 0.0, hi = 2.0 * std::sqrt(a * b * d);
    while (hi - lo > tol) {
        const double c = 0.5 * (lo + hi);
        if (gamma * solve_kpp(d, a, b, c, opt).slope_at_0 > c) {
            lo = c;
        } else {
            hi = c;
        }
    }
    return 0.5 * (lo + hi);
}

ScalarProfile solve_omega(double d, double c, double r, double h, double u_star,
                          const ScalarSolveOptions& opt) {
    if (!(d > 0.0) || !(r > 0.0)) throw DomainError("scalar_waves.solve_omega: d, r must be positive");
    if (c < 0.0) throw DomainError("scalar_waves.solve_omega: c must be nonnegative");
    const double target = h * u_star;
    if (!(target > 0.0) || !(target < 1.0)) {
        throw DomainError("scalar_waves.solve_omega: requires 0 < h u* < 1");
    }
    const double rate = omega_decay_exponent(d, c, r);
    const double s_max = opt.s_max > 0.0 ? opt.s_max : 40.0 / std::abs(rate);

    ScalarBvp bvp{d, c, [r, target](double w) { return r * (target - w) * (1.0 - target + w); },
                  [r, target](double w) { return r * (2.0 * target - 1.0 - 2.0 * w); }, target,
                  "scalar_waves.solve_omega"};
    ScalarProfile out = solve_bvp(bvp, s_max, rate, 0.0, opt);
    out.decay_exponent = rate;
    check_profile(out, opt.tail_tol, bvp.op);
    return out;
}

}  // namespace lvfb
