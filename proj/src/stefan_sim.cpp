#include "lvfb/stefan_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lvfb/errors.hpp"
#include "lvfb/kernels.hpp"
#include "lvfb/linalg.hpp"

namespace lvfb {

namespace {

double sup_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

// -gamma u_x(g) from the second-order one-sided stencil, u_hat(1) = 0.
double front_speed(const std::vector<double>& U, double g, double gamma) {
    const std::size_t N = U.size() - 1;
    const double dxi = 1.0 / static_cast<double>(N);
    const double dudxi = (-4.0 * U[N - 1] + U[N - 2]) / (2.0 * dxi);
    return -gamma * dudxi / g;
}

// Reaction rate bound used for the explicit terms.
double reaction_rate(const FreeBoundaryState& s, const CompetitionParams& p, const SimConfig& cfg) {
    const double mu = sup_abs(s.u_hat);
    double rate = std::abs(1.0 - 2.0 * mu) + 1.0 + p.k() * (cfg.evolve_v ? sup_abs(s.v) : 1.0);
    if (cfg.evolve_v) {
        const double mv = sup_abs(s.v);
        rate = std::max(rate, p.r() * (1.0 + 2.0 * mv + p.h() * mu));
    }
    return rate;
}

void check_finite(const std::vector<double>& a, const char* what) {
    for (double x : a) {
        if (!std::isfinite(x)) throw NumericalError(std::string("stefan_sim.step: non-finite ") + what);
    }
}

}  // namespace

std::string to_string(Classification c) {
    switch (c) {
        case Classification::Spreading: return "Spreading";
        case Classification::Vanishing: return "Vanishing";
        case Classification::Undecided: return "Undecided";
    }
    return "Undecided";
}

void InitialData::validate() const {
    const char* op = "stefan_sim.InitialData";
    if (!(g0 > 0.0) || !std::isfinite(g0)) throw DomainError(std::string(op) + ": g0 must be positive");
    if (u0.size() < 3) throw DomainError(std::string(op) + ": u0 needs at least 3 samples");
    if (u0.back() != 0.0) throw DomainError(std::string(op) + ": u0(g0) must be 0");
    double max_diff = 0.0;
    for (std::size_t i = 0; i + 1 < u0.size(); ++i) {
        if (!(u0[i] > 0.0) || !std::isfinite(u0[i])) {
            throw DomainError(std::string(op) + ": u0 must be positive on [0, g0)");
        }
        max_diff = std::max(max_diff, std::abs(u0[i + 1] - u0[i]));
    }
    if (std::abs(u0[1] - u0[0]) > 0.05 * max_diff) {
        throw DomainError(std::string(op) + ": u0 must be flat at x = 0");
    }
    if (v0.size() < 2 || !(v0_length > 0.0)) throw DomainError(std::string(op) + ": v0 needs samples on [0, L]");
    for (double x : v0) {
        if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(op) + ": v0 must be positive and finite");
    }
    if (!(v_inf > 0.0) || !std::isfinite(v_inf)) throw DomainError(std::string(op) + ": v_inf must be positive");
}

InitialData InitialData::bump(double g0, double amplitude, double v_level, int n_u) {
    InitialData d;
    d.g0 = g0;
    d.u0.resize(n_u);
    for (int i = 0; i < n_u; ++i) {
        const double x = static_cast<double>(i) / (n_u - 1);
        d.u0[i] = amplitude * (1.0 - x * x);
    }
    d.u0.back() = 0.0;
    d.v0 = {v_level, v_level};
    d.v0_length = g0;
    d.v_inf = v_level;
    return d;
}

InitialData InitialData::cosine(double g0, double amplitude, double v_level, int n_u) {
    InitialData d = bump(g0, amplitude, v_level, n_u);
    for (int i = 0; i + 1 < n_u; ++i) {
        const double x = static_cast<double>(i) / (n_u - 1);
        d.u0[i] = amplitude * std::cos(0.5 * M_PI * x);
    }
    return d;
}

double FreeBoundaryState::v_at(double x) const {
    if (x <= 0.0) return v.front();
    const double q = x / dx_v;
    const std::size_t j = static_cast<std::size_t>(q);
    if (j + 1 >= v.size()) return v.back();
    const double w = q - static_cast<double>(j);
    return (1.0 - w) * v[j] + w * v[j + 1];
}

double FreeBoundaryState::u_at(double x) const {
    if (x >= g) return 0.0;
    const double N = static_cast<double>(u_hat.size() - 1);
    const double q = std::max(0.0, x / g) * N;
    const std::size_t i = std::min(static_cast<std::size_t>(q), u_hat.size() - 2);
    const double w = q - static_cast<double>(i);
    return (1.0 - w) * u_hat[i] + w * u_hat[i + 1];
}

double FreeBoundaryState::mass() const {
    const std::size_t N = u_hat.size() - 1;
    const double dxi = 1.0 / static_cast<double>(N);
    double m = 0.5 * u_hat[0];
    for (std::size_t i = 1; i < N; ++i) m += u_hat[i];
    return g * dxi * m;
}

double spreading_threshold(const CompetitionParams& p) { return M_PI / (2.0 * std::sqrt(1.0 - p.k())); }

FreeBoundaryState initial_state(const CompetitionParams& p, const InitialData& init, const SimConfig& cfg) {
    init.validate();
    if (cfg.n_u < 16) throw DomainError("stefan_sim.initial_state: n_u must be at least 16");
    FreeBoundaryState s;
    s.g = init.g0;
    const int N = cfg.n_u;
    s.u_hat.resize(N + 1);
    const double du0 = init.g0 / static_cast<double>(init.u0.size() - 1);
    for (int i = 0; i <= N; ++i) {
        const double x = init.g0 * static_cast<double>(i) / N;
        const double q = x / du0;
        const std::size_t j = std::min(static_cast<std::size_t>(q), init.u0.size() - 2);
        const double w = q - static_cast<double>(j);
        s.u_hat[i] = (1.0 - w) * init.u0[j] + w * init.u0[j + 1];
    }
    s.u_hat[N] = 0.0;

    s.dx_v = cfg.dx_v > 0.0 ? cfg.dx_v : init.g0 / N;
    const double want = std::max(init.v0_length, init.g0 + 20.0 * std::sqrt(p.d() / p.r()) + cfg.v_margin);
    const std::size_t J = static_cast<std::size_t>(std::ceil(want / s.dx_v));
    s.L = static_cast<double>(J) * s.dx_v;
    s.v.resize(J + 1);
    const double dv0 = init.v0_length / static_cast<double>(init.v0.size() - 1);
    for (std::size_t j = 0; j <= J; ++j) {
        const double x = static_cast<double>(j) * s.dx_v;
        if (x > init.v0_length) {
            s.v[j] = init.v_inf;
            continue;
        }
        const double q = x / dv0;
        const std::size_t m = std::min(static_cast<std::size_t>(q), init.v0.size() - 2);
        const double w = q - static_cast<double>(m);
        s.v[j] = (1.0 - w) * init.v0[m] + w * init.v0[m + 1];
    }
    s.g_dot = front_speed(s.u_hat, s.g, 1.0);  // rescaled by gamma in simulate
    return s;
}

double stable_dt(const FreeBoundaryState& s, const CompetitionParams& p, const SimConfig& cfg) {
    double dt = cfg.dt_max;
    dt = std::min(dt, cfg.reaction_budget / reaction_rate(s, p, cfg));
    const double dxi = 1.0 / static_cast<double>(s.u_hat.size() - 1);
    if (s.g_dot > 0.0) dt = std::min(dt, cfg.cfl * s.g * dxi / s.g_dot);
    return dt;
}

FreeBoundaryState step(const FreeBoundaryState& state, const CompetitionParams& p, const StefanParams& stefan,
                       double dt, const SimConfig& cfg, StepReport* report) {
    if (!(dt > 0.0) || dt > cfg.dt_max + 1e-9) {
        throw DomainError("stefan_sim.step: dt must lie in (0, dt_max]");
    }
    const std::vector<double>& U = state.u_hat;
    const std::vector<double>& V = state.v;
    const std::size_t N = U.size() - 1;
    const double dxi = 1.0 / static_cast<double>(N);
    const double g = state.g;
    const double k = cfg.reaction ? p.k() : 0.0;

    // v sampled at the u nodes, u sampled at the v nodes inside the front.
    std::vector<double> xs(N + 1), Vu(N + 1);
    for (std::size_t i = 0; i <= N; ++i) xs[i] = g * static_cast<double>(i) * dxi;
    kernels::active::lerp_uniform(0.0, state.dx_v, V, xs, V.back(), Vu);

    // Explicit reaction, checked against the hard stability limit.
    std::vector<double> R(N, 0.0);
    double worst = 0.0;
    if (cfg.reaction) {
        for (std::size_t i = 0; i < N; ++i) {
            R[i] = U[i] * (1.0 - U[i] - k * Vu[i]);
            worst = std::max(worst, std::abs(1.0 - 2.0 * U[i] - k * Vu[i]));
        }
    }
    if (dt * worst > 1.0) throw CFLViolation("stefan_sim.step: explicit reaction exceeds the stability budget for u");

    // Explicit advective fluxes through faces i+1/2, i = 0..N-1.
    std::vector<double> adv(N);
    auto advective = [&](double gd) {
        for (std::size_t i = 0; i < N; ++i) {
            const double xi_f = (static_cast<double>(i) + 0.5) * dxi;
            const double right = i + 1 < N ? U[i + 1] : 0.0;
            adv[i] = gd * xi_f * 0.5 * (U[i] + right);
        }
    };

    std::vector<double> lower(N), diag(N), upper(N), sol(N);
    double gd_used = std::max(0.0, state.g_dot);
    double g_new = g;
    double gd_new = gd_used;
    for (int pass = 0; pass < 2; ++pass) {
        g_new = g + dt * gd_used;
        advective(gd_used);
        const double cdiff = 1.0 / (dxi * g_new);
        for (std::size_t i = 0; i < N; ++i) {
            const double vol = i == 0 ? 0.5 * dxi : dxi;
            const double faces = i == 0 ? 1.0 : 2.0;
            diag[i] = vol * g_new / dt + faces * cdiff;
            lower[i] = -cdiff;
            upper[i] = -cdiff;
            const double left_adv = i == 0 ? 0.0 : adv[i - 1];
            sol[i] = vol * g * U[i] / dt + (adv[i] - left_adv) + vol * g_new * R[i];
        }
        linalg::solve_tridiagonal(lower, diag, upper, sol);
        std::vector<double> trial(N + 1, 0.0);
        std::copy(sol.begin(), sol.end(), trial.begin());
        gd_new = front_speed(trial, g_new, stefan.gamma);
        if (pass == 0) gd_used = std::max(0.0, gd_new);
    }
    if (gd_new < -cfg.eps_mono) {
        throw StepRejected("stefan_sim.step: front speed " + std::to_string(gd_new) + " is negative");
    }

    FreeBoundaryState out;
    out.t = state.t + dt;
    out.g = g_new;
    out.g_dot = std::max(0.0, gd_new);
    out.u_hat.assign(N + 1, 0.0);
    std::copy(sol.begin(), sol.end(), out.u_hat.begin());
    check_finite(out.u_hat, "u");
    out.dx_v = state.dx_v;
    out.L = state.L;

    if (report) {
        const double cdiff = 1.0 / (dxi * g_new);
        report->front_flux = dt * (-sol[N - 1] * cdiff + adv[N - 1]);
        double rm = 0.5 * dxi * R[0];
        for (std::size_t i = 1; i < N; ++i) rm += dxi * R[i];
        report->reaction_mass = dt * g_new * rm;
        report->g_dot_used = gd_used;
    }

    if (!cfg.evolve_v) {
        out.v = V;
    } else {
        const std::size_t J = V.size() - 1;
        const double dx = state.dx_v;
        const double h = cfg.reaction ? p.h() : 0.0;
        const double r = p.r();
        // u at the v nodes; zero at and beyond the front.
        const std::size_t jg = std::min(J + 1, static_cast<std::size_t>(std::ceil(g / dx)));
        std::vector<double> q(jg), Uv(jg);
        for (std::size_t j = 0; j < jg; ++j) q[j] = static_cast<double>(j) * dx / g;
        kernels::active::lerp_uniform(0.0, dxi, U, q, 0.0, Uv);

        const double a = p.d() * dt / (dx * dx);
        std::vector<double> lo(J + 1, -a), di(J + 1, 1.0 + 2.0 * a), up(J + 1, -a), rhs(J + 1);
        up[0] = -2.0 * a;
        lo[J] = -2.0 * a;
        double vworst = 0.0;
        for (std::size_t j = 0; j <= J; ++j) {
            const double uj = j < jg ? Uv[j] : 0.0;
            const double rv = cfg.reaction ? r * V[j] * (1.0 - V[j] - h * uj) : 0.0;
            if (cfg.reaction) vworst = std::max(vworst, r * std::abs(1.0 - 2.0 * V[j] - h * uj));
            rhs[j] = V[j] + dt * rv;
        }
        if (dt * vworst > 1.0) {
            throw CFLViolation("stefan_sim.step: explicit reaction exceeds the stability budget for v");
        }
        linalg::solve_tridiagonal(lo, di, up, rhs);
        out.v = std::move(rhs);
        check_finite(out.v, "v");
    }

    // Re-extend the v domain ahead of the front.
    while (out.g > out.L - cfg.v_margin) {
        const std::size_t J = out.v.size() - 1;
        out.v.resize(2 * J + 1, out.v.back());
        out.L = static_cast<double>(2 * J) * out.dx_v;
    }
    return out;
}

namespace {

TrajectorySample sample_of(const FreeBoundaryState& s) {
    return {s.t, s.g, s.g_dot, sup_abs(s.u_hat), s.u_hat.front(), s.v.front()};
}

Snapshot snapshot_of(const FreeBoundaryState& s, double extent) {
    Snapshot snap;
    snap.t = s.t;
    const double xmax = std::min(s.L, s.g + extent);
    const std::size_t n = static_cast<std::size_t>(xmax / s.dx_v) + 1;
    snap.x.resize(n);
    snap.u.resize(n);
    snap.v.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = static_cast<double>(j) * s.dx_v;
        snap.x[j] = x;
        snap.u[j] = s.u_at(x);
        snap.v[j] = s.v[j];
    }
    return snap;
}

double trailing_slope(const std::vector<std::pair<double, double>>& series, double t_from) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& [t, g] : series) {
        if (t < t_from) continue;
        sx += t;
        sy += g;
        sxx += t * t;
        sxy += t * g;
        ++n;
    }
    if (n < 2) return 0.0;
    const double den = n * sxx - sx * sx;
    return den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

}  // namespace

SimOutcome simulate(const CompetitionParams& p, const StefanParams& stefan, const InitialData& init, double horizon,
                    const SimConfig& cfg) {
    if (!(horizon > 0.0)) throw DomainError("stefan_sim.simulate: horizon must be positive");
    if (!(stefan.gamma > 0.0)) throw DomainError("stefan_sim.simulate: gamma must be positive");
    if (!(cfg.output_interval > 0.0)) throw DomainError("stefan_sim.simulate: output_interval must be positive");

    FreeBoundaryState s = initial_state(p, init, cfg);
    s.g_dot *= stefan.gamma;

    SimOutcome out;
    auto record = [&] {
        const TrajectorySample smp = sample_of(s);
        out.trajectory.push_back(smp);
        out.g_series.emplace_back(smp.t, smp.g);
        out.u_sup_series.push_back(smp.u_sup);
    };
    record();

    std::vector<double> snaps = cfg.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    while (next_snap < snaps.size() && snaps[next_snap] <= 0.0) {
        out.snapshots.push_back(snapshot_of(s, cfg.snapshot_extent));
        ++next_snap;
    }

    const double threshold = spreading_threshold(p);
    long out_index = 1;
    const double t_eps = 1e-12 * std::max(1.0, horizon);
    while (s.t < horizon - t_eps) {
        double dt = stable_dt(s, p, cfg);
        double target = std::min(horizon, out_index * cfg.output_interval);
        if (next_snap < snaps.size()) target = std::min(target, snaps[next_snap]);
        if (s.t + dt >= target - t_eps) dt = target - s.t;
        const double g_before = s.g;
        s = step(s, p, stefan, dt, cfg);
        ++out.steps;
        if (s.g < g_before) throw StepRejected("stefan_sim.simulate: front retreated");

        if (std::abs(s.t - target) <= t_eps) s.t = target;
        while (next_snap < snaps.size() && s.t >= snaps[next_snap] - t_eps) {
            out.snapshots.push_back(snapshot_of(s, cfg.snapshot_extent));
            ++next_snap;
        }

        const bool at_output = s.t >= out_index * cfg.output_interval - t_eps || s.t >= horizon - t_eps;
        if (at_output) {
            record();
            while (out_index * cfg.output_interval <= s.t + t_eps) ++out_index;
        }

        if (out.classification == Classification::Undecided) {
            if (s.g > threshold) {
                out.classification = Classification::Spreading;
                out.classified_at = s.t;
            } else if (at_output && s.t >= cfg.trailing_window && out.u_sup_series.back() < cfg.vanish_tol) {
                bool flat = true;
                for (auto it = out.trajectory.rbegin(); it != out.trajectory.rend(); ++it) {
                    if (it->t < s.t - cfg.trailing_window - t_eps) break;
                    if (std::abs(it->g_dot) >= cfg.plateau_tol) {
                        flat = false;
                        break;
                    }
                }
                if (flat) {
                    out.classification = Classification::Vanishing;
                    out.classified_at = s.t;
                }
            }
            if (cfg.stop_on_classification && out.classification != Classification::Undecided) {
                if (!at_output) record();
                break;
            }
        }
    }

    out.speed_estimate = trailing_slope(out.g_series, 0.5 * s.t);
    out.final_state = std::move(s);
    return out;
}

GammaStarReport classify_threshold_gamma(const CompetitionParams& p, const InitialData& init, const SimConfig& cfg,
                                         const GammaStarConfig& gcfg) {
    init.validate();
    GammaStarReport rep;
    if (init.g0 >= spreading_threshold(p)) return rep;
    if (!(gcfg.gamma_lo > 0.0) || !(gcfg.gamma_hi > gcfg.gamma_lo) || !(gcfg.rel_tol > 0.0)) {
        throw DomainError("stefan_sim.classify_threshold_gamma: invalid gamma bracket or tolerance");
    }
    SimConfig run = cfg;
    run.stop_on_classification = true;
    run.snapshot_times.clear();

    auto spreads = [&](double gamma) {
        ++rep.simulations;
        const SimOutcome o = simulate(p, StefanParams{gamma}, init, gcfg.horizon, run);
        if (o.classification == Classification::Undecided) {
            throw UndecidedAtHorizon("stefan_sim.classify_threshold_gamma: gamma = " + std::to_string(gamma) +
                                     " undecided at horizon " + std::to_string(gcfg.horizon));
        }
        return o.classification == Classification::Spreading;
    };

    double lo = gcfg.gamma_lo;
    double hi = gcfg.gamma_hi;
    int expand = 0;
    while (spreads(lo)) {
        if (++expand > gcfg.max_expand) {
            throw BracketError("stefan_sim.classify_threshold_gamma: spreading at every tried lower gamma");
        }
        hi = lo;
        lo *= 0.1;
    }
    expand = 0;
    while (!spreads(hi)) {
        if (++expand > gcfg.max_expand) {
            throw BracketError("stefan_sim.classify_threshold_gamma: vanishing at every tried upper gamma");
        }
        lo = hi;
        hi *= 10.0;
    }
    // Geometric bisection: gamma* can sit anywhere over several decades.
    while (hi / lo > 1.0 + gcfg.rel_tol) {
        const double mid = std::sqrt(lo * hi);
        if (spreads(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    rep.gamma_lo = lo;
    rep.gamma_hi = hi;
    rep.gamma_star = std::sqrt(lo * hi);
    return rep;
}

}  // namespace lvfb
