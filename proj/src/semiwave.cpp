#include "lvfb/semiwave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lvfb/errors.hpp"
#include "lvfb/linalg.hpp"
#include "lvfb/scalar_waves.hpp"

namespace lvfb {

namespace {

using Pair = std::pair<std::vector<double>, std::vector<double>>;

double grid_step(const std::vector<double>& s) { return s[1] - s[0]; }

// Reusable buffers for one solve.
struct Workspace {
    std::vector<double> H, A, B;
    void resize(std::size_t n) {
        H.resize(n);
        A.resize(n);
        B.resize(n);
    }
};

template <class Fn>
void pointwise(std::size_t n, kernels::Backend backend, Fn&& fn) {
    const auto ni = static_cast<long>(n);
    if (backend == kernels::Backend::Parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < ni; ++i) fn(static_cast<std::size_t>(i));
    } else {
        for (long i = 0; i < ni; ++i) fn(static_cast<std::size_t>(i));
    }
}

void forward_scan(kernels::Backend b, std::span<const double> H, kernels::SegmentWeights w, double y0,
                  std::span<double> y) {
    if (b == kernels::Backend::Parallel) {
        kernels::active::forward_exp_scan(H, w, y0, y);
    } else {
        kernels::serial::forward_exp_scan(H, w, y0, y);
    }
}

void backward_scan(kernels::Backend b, std::span<const double> H, kernels::SegmentWeights w,
                   double y_end, std::span<double> y) {
    if (b == kernels::Backend::Parallel) {
        kernels::active::backward_exp_scan(H, w, y_end, y);
    } else {
        kernels::serial::backward_exp_scan(H, w, y_end, y);
    }
}

// out = F(phi, psi_tilde) on the grid with spacing hs and origin i0.
void apply_F_into(const std::vector<double>& phi, const std::vector<double>& psi, std::size_t i0,
                  double hs, const CompetitionParams& p, double c, double beta,
                  kernels::Backend backend, Workspace& ws, std::vector<double>& out_phi,
                  std::vector<double>& out_psi) {
    const std::size_t n = phi.size();
    const double k = p.k();
    const double h = p.h();
    const double r = p.r();
    const double us = p.u_star();
    const double hus = h * us;
    const KernelExponents ke = kernel_exponents(1.0, p.d(), c, beta);
    ws.resize(n);

    // Component 1 on s >= 0, Dirichlet at s = 0.
    const std::size_t m = n - i0;
    std::span<double> H1(ws.H.data(), m);
    std::span<double> A1(ws.A.data(), m);
    std::span<double> B1(ws.B.data(), m);
    pointwise(m, backend, [&](std::size_t j) {
        const double f = phi[i0 + j];
        H1[j] = beta * f + f * (1.0 - k - f + k * psi[i0 + j]);
    });
    const auto wa = kernels::exp_segment_weights(ke.lambda1, hs);
    const auto wb = kernels::exp_segment_weights(-ke.lambda2, hs);
    forward_scan(backend, H1, wa, 0.0, A1);
    backward_scan(backend, H1, wb, H1[m - 1] / ke.lambda2, B1);
    const double b0 = B1[0];
    const double inv1 = 1.0 / (ke.lambda2 - ke.lambda1);
    pointwise(n, backend, [&](std::size_t i) {
        if (i <= i0) {
            out_phi[i] = 0.0;
            return;
        }
        const std::size_t j = i - i0;
        const double sj = hs * static_cast<double>(j);
        const double v = (A1[j] + B1[j] - std::exp(ke.lambda1 * sj) * b0) * inv1;
        out_phi[i] = std::clamp(v, 0.0, us);
    });

    // Component 2 on the whole line.
    std::span<double> H2(ws.H.data(), n);
    std::span<double> A2(ws.A.data(), n);
    std::span<double> B2(ws.B.data(), n);
    pointwise(n, backend, [&](std::size_t i) {
        const double q = psi[i];
        H2[i] = beta * q + r * (1.0 - q) * (h * phi[i] - q);
    });
    const auto wc = kernels::exp_segment_weights(ke.mu1, hs);
    const auto wd = kernels::exp_segment_weights(-ke.mu2, hs);
    forward_scan(backend, H2, wc, H2[0] / (-ke.mu1), A2);
    backward_scan(backend, H2, wd, H2[n - 1] / ke.mu2, B2);
    const double inv2 = 1.0 / (p.d() * (ke.mu2 - ke.mu1));
    bool finite = true;
    pointwise(n, backend, [&](std::size_t i) { out_psi[i] = std::clamp((A2[i] + B2[i]) * inv2, 0.0, hus); });
    for (std::size_t i = 0; i < n && finite; ++i) finite = std::isfinite(out_phi[i]) && std::isfinite(out_psi[i]);
    if (!finite || !std::isfinite(b0)) {
        throw QuadratureError("semiwave.apply_F: kernel integral is not finite (c=" + std::to_string(c) + ")");
    }
}

// Discrete defect of the cooperative system; returns sup over imposed rows.
double fd_residual(const std::vector<double>& phi, const std::vector<double>& psi, std::size_t i0,
                   double hs, const CompetitionParams& p, double c, std::vector<double>* r1 = nullptr,
                   std::vector<double>* r2 = nullptr) {
    const std::size_t n = phi.size();
    const double k = p.k(), h = p.h(), r = p.r(), d = p.d();
    const double a = 1.0 / (hs * hs);
    const double b = c / (2.0 * hs);
    double sup = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double e1 = 0.0;
        if (i > i0) {
            e1 = a * (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) - b * (phi[i + 1] - phi[i - 1]) +
                 phi[i] * (1.0 - k - phi[i] + k * psi[i]);
        }
        const double e2 = d * a * (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) - b * (psi[i + 1] - psi[i - 1]) +
                          r * (1.0 - psi[i]) * (h * phi[i] - psi[i]);
        if (r1) (*r1)[i] = e1;
        if (r2) (*r2)[i] = e2;
        sup = std::max({sup, std::abs(e1), std::abs(e2)});
    }
    return sup;
}

struct NewtonResult {
    int iterations = 0;
    double residual = 0.0;
};

// Newton on the central-difference system with Dirichlet ends
// (phi, psi_tilde) = (0, 0) on the left and (u*, h u*) on the right.
NewtonResult newton_polish(std::vector<double>& phi, std::vector<double>& psi, std::size_t i0, double hs,
                           const CompetitionParams& p, double c, double tol, int max_iter) {
    const std::size_t n = phi.size();
    const double k = p.k(), h = p.h(), r = p.r(), d = p.d();
    phi[n - 1] = p.u_star();
    psi[n - 1] = h * p.u_star();
    psi[0] = 0.0;
    for (std::size_t i = 0; i <= i0; ++i) phi[i] = 0.0;

    const double a = 1.0 / (hs * hs);
    const double b = c / (2.0 * hs);
    const std::size_t m = n - 2;
    std::vector<double> r1(n, 0.0), r2(n, 0.0);
    std::vector<linalg::Block> lower(m), diag(m), upper(m);
    std::vector<linalg::Vec2> rhs(m);
    std::vector<double> tphi, tpsi;

    NewtonResult res;
    res.residual = fd_residual(phi, psi, i0, hs, p, c, &r1, &r2);
    for (int it = 0; it < max_iter && res.residual > tol; ++it) {
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t i = j + 1;
            const double f = phi[i], q = psi[i];
            if (i > i0) {
                lower[j] = {a + b, 0.0, 0.0, d * a + b};
                upper[j] = {a - b, 0.0, 0.0, d * a - b};
                diag[j] = {-2.0 * a + (1.0 - k - 2.0 * f + k * q), k * f, r * h * (1.0 - q),
                           -2.0 * d * a + r * (2.0 * q - h * f - 1.0)};
                rhs[j] = {-r1[i], -r2[i]};
            } else {
                lower[j] = {0.0, 0.0, 0.0, d * a + b};
                upper[j] = {0.0, 0.0, 0.0, d * a - b};
                diag[j] = {1.0, 0.0, r * h * (1.0 - q), -2.0 * d * a + r * (2.0 * q - h * f - 1.0)};
                rhs[j] = {0.0, -r2[i]};
            }
        }
        linalg::solve_block_tridiagonal(lower, diag, upper, rhs);

        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 20; ++ls) {
            tphi = phi;
            tpsi = psi;
            for (std::size_t j = 0; j < m; ++j) {
                tphi[j + 1] += step * rhs[j][0];
                tpsi[j + 1] += step * rhs[j][1];
            }
            const double tr = fd_residual(tphi, tpsi, i0, hs, p, c, &r1, &r2);
            // Near the critical speed the front translation mode is nearly
            // neutral and the residual can rise on the first full step.
            const double allowed = (step == 1.0 && it < 3) ? 10.0 * res.residual : res.residual;
            if (std::isfinite(tr) && tr < allowed) {
                phi.swap(tphi);
                psi.swap(tpsi);
                res.residual = tr;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        res.iterations = it + 1;
        if (!accepted) {
            fd_residual(phi, psi, i0, hs, p, c, &r1, &r2);
            break;
        }
    }
    return res;
}

// First node s >= 0 where phi reaches u*/2, +inf if none.
double front_position(const std::vector<double>& s, const std::vector<double>& phi, std::size_t i0,
                      double level) {
    for (std::size_t i = i0; i < phi.size(); ++i) {
        if (phi[i] >= level) return s[i];
    }
    return std::numeric_limits<double>::infinity();
}

double slope_at_origin(const std::vector<double>& phi, const std::vector<double>& psi, std::size_t i0,
                       double hs, const CompetitionParams& p, double c) {
    const double growth = 1.0 - p.k() + p.k() * psi[i0];
    return ode_informed_slope(phi[i0 + 1], hs, 1.0, -c, 0.0, growth);
}

void check_state(const std::vector<double>& prev_phi, const std::vector<double>& prev_psi,
                 const std::vector<double>& phi, const std::vector<double>& psi, const Pair& lower,
                 double slack, long sweep, double c) {
    const std::size_t n = phi.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (phi[i] > prev_phi[i] + slack || psi[i] > prev_psi[i] + slack) {
            throw NumericalError("semiwave.solve_semiwave: sweep " + std::to_string(sweep) +
                                 " increased the iterate at node " + std::to_string(i) + " (c=" +
                                 std::to_string(c) + ")");
        }
        if (phi[i] < lower.first[i] - slack || psi[i] < lower.second[i] - slack) {
            throw NumericalError("semiwave.solve_semiwave: iterate fell below the lower solution at node " +
                                 std::to_string(i));
        }
        if (i > 0 && (phi[i] < phi[i - 1] - slack || psi[i] < psi[i - 1] - slack)) {
            throw NumericalError("semiwave.solve_semiwave: iterate not monotone in s at node " +
                                 std::to_string(i));
        }
    }
}

double resolve_extent(const CompetitionParams& p, double c, const SemiWaveConfig& cfg, double warm_extent) {
    if (warm_extent > 0.0) return warm_extent;
    if (cfg.s_left > 0.0 || cfg.s_right > 0.0) {
        if (cfg.s_left != cfg.s_right) {
            throw DomainError("semiwave: S_left and S_right must be equal so that s = 0 is a grid node");
        }
        return cfg.s_left;
    }
    return default_semiwave_extent(p, c);
}

}  // namespace

double default_semiwave_extent(const CompetitionParams& p, double c) {
    const auto mu = linearization_roots(p, c);
    return std::max(60.0, 40.0 / std::abs(mu[1]));
}

std::vector<double> semiwave_grid(double s_left, double s_right, int n) {
    if (n < 17 || n % 2 == 0) throw DomainError("semiwave: grid size must be odd and at least 17");
    if (s_left != s_right) throw DomainError("semiwave: S_left and S_right must be equal");
    const std::size_t i0 = static_cast<std::size_t>((n - 1) / 2);
    const double hs = s_right / static_cast<double>(i0);
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) s[i] = hs * (static_cast<double>(i) - static_cast<double>(i0));
    return s;
}

Pair build_upper_solution(const CompetitionParams& p, double s_left, double s_right, int n) {
    const auto s = semiwave_grid(s_left, s_right, n);
    const std::size_t i0 = (s.size() - 1) / 2;
    const int m = static_cast<int>(i0) + 1;
    const double us = p.u_star();

    ScalarSolveOptions ok;
    ok.n = m;
    ok.s_max = s_right;
    const ScalarProfile chi = solve_kpp(1.0, 1.0, us, 0.0, ok);
    ScalarSolveOptions oo;
    oo.n = m;
    oo.s_max = s_left;
    const ScalarProfile om = solve_omega(p.d(), 0.0, p.r(), p.h(), us, oo);

    // Cooperative variables: phi_bar = chi, psi_tilde_bar = h u* - omega(-s).
    Pair up{std::vector<double>(s.size(), 0.0), std::vector<double>(s.size(), p.h() * us)};
    for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j) {
        up.first[i0 + j] = chi.values[j];
        up.second[i0 - j] = p.h() * us - om.values[j];
    }
    return up;
}

IterationState initial_iteration_state(const CompetitionParams& p, const SemiWaveConfig& cfg, double extent) {
    IterationState st;
    st.s_grid = semiwave_grid(extent, extent, cfg.n);
    st.upper = build_upper_solution(p, extent, extent, cfg.n);
    st.lower = {std::vector<double>(cfg.n, 0.0), std::vector<double>(cfg.n, 0.0)};
    st.phi_tilde = st.upper.first;
    st.psi_tilde = st.upper.second;
    st.beta = iteration_beta(p);
    return st;
}

IterationState apply_F(const IterationState& state, const CompetitionParams& p, double c,
                       kernels::Backend backend) {
    if (c < 0.0) throw DomainError("semiwave.apply_F: c must be nonnegative");
    IterationState out = state;
    Workspace ws;
    apply_F_into(state.phi_tilde, state.psi_tilde, state.origin(), grid_step(state.s_grid), p, c, state.beta,
                 backend, ws, out.phi_tilde, out.psi_tilde);
    ++out.sweep_count;
    return out;
}

namespace {

// Monotone iteration plus polishing. Besides the public outcomes it can stop
// early with reason "slope_below_floor" (the iterate's slope at 0 fell below
// slope_floor; the sweeps decrease it, so the fixed point's slope is lower
// still) or "sweep_cap" when cap_is_error is false.
SemiWaveResult solve_core(const CompetitionParams& p, double c, const SemiWaveConfig& cfg, const WarmStart& warm,
                          double slope_floor, bool cap_is_error) {
    if (c < 0.0) throw DomainError("semiwave.solve_semiwave: c must be nonnegative");
    const double extent = resolve_extent(p, c, cfg, warm.extent);
    const auto s = semiwave_grid(extent, extent, cfg.n);
    const std::size_t n = s.size();
    const std::size_t i0 = (n - 1) / 2;
    const double hs = grid_step(s);
    const double us = p.u_star();
    const double beta = iteration_beta(p);
    const double trivial_tol = cfg.trivial_tol_rel * us;
    const double mu2 = std::abs(linearization_roots(p, c)[1]);
    const double escape_at = std::max(0.5 * extent, extent - 20.0 / mu2);

    Pair upper = warm.upper ? *warm.upper : build_upper_solution(p, extent, extent, cfg.n);
    Pair lower = warm.lower ? *warm.lower : Pair{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    if (upper.first.size() != n || lower.first.size() != n) {
        throw DomainError("semiwave.solve_semiwave: warm start does not match the grid");
    }

    std::vector<double> phi = upper.first, psi = upper.second;
    std::vector<double> nphi(n), npsi(n);
    Workspace ws;
    long sweep = 0;
    double change = std::numeric_limits<double>::infinity();
    double overshoot = 0.0;
    for (; sweep < cfg.max_sweeps; ++sweep) {
        apply_F_into(phi, psi, i0, hs, p, c, beta, kernels::Backend::Parallel, ws, nphi, npsi);
        if (sweep == 0) {
            for (std::size_t i = 0; i < n; ++i) {
                overshoot = std::max({overshoot, nphi[i] - phi[i], npsi[i] - psi[i]});
            }
        }
        if (cfg.check_invariants) check_state(phi, psi, nphi, npsi, lower, cfg.monotone_slack, sweep + 1, c);
        change = std::max(kernels::active::max_abs_diff(nphi, phi), kernels::active::max_abs_diff(npsi, psi));
        phi.swap(nphi);
        psi.swap(npsi);
        const double sup = phi[n - 1];  // phi is nondecreasing in s
        if (sup < trivial_tol) {
            return NoNontrivialSolution{c, sup, local_sup_phi(s, phi, cfg.collapse_window), sweep + 1, "collapsed"};
        }
        if (front_position(s, phi, i0, 0.5 * us) > escape_at) {
            return NoNontrivialSolution{c, sup, local_sup_phi(s, phi, cfg.collapse_window), sweep + 1,
                                        "front_escaped"};
        }
        if (change < cfg.fp_tol) {
            ++sweep;
            break;
        }
        if (slope_floor > 0.0 && slope_at_origin(phi, psi, i0, hs, p, c) < slope_floor) {
            return NoNontrivialSolution{c, sup, local_sup_phi(s, phi, cfg.collapse_window), sweep + 1,
                                        "slope_below_floor"};
        }
    }
    if (change >= cfg.fp_tol && !cap_is_error) {
        return NoNontrivialSolution{c, phi[n - 1], local_sup_phi(s, phi, cfg.collapse_window), sweep, "sweep_cap"};
    }
    if (change >= cfg.fp_tol) {
        throw NonConvergence("semiwave.solve_semiwave: " + std::to_string(cfg.max_sweeps) +
                             " sweeps without convergence at c=" + std::to_string(c) +
                             " (last change " + std::to_string(change) + ")");
    }

    SemiWaveProfile prof;
    prof.c = c;
    prof.s_grid = s;
    prof.sweeps = sweep;
    prof.first_sweep_overshoot = overshoot;
    prof.iterate_phi = phi;
    prof.iterate_psi_tilde = psi;

    if (cfg.newton_polish) {
        const NewtonResult nr = newton_polish(phi, psi, i0, hs, p, c, cfg.newton_tol, cfg.max_newton);
        prof.newton_iterations = nr.iterations;
        prof.residual = nr.residual;
        if (nr.residual > cfg.residual_tol) {
            throw NonConvergence("semiwave.solve_semiwave: Newton polish stalled with residual " +
                                 std::to_string(nr.residual) + " at c=" + std::to_string(c));
        }
        for (std::size_t i = 1; i < n; ++i) {
            if (phi[i] < phi[i - 1] - 1e-12 || psi[i] < psi[i - 1] - 1e-12) {
                throw NumericalError("semiwave.solve_semiwave: polished profile not monotone at node " +
                                     std::to_string(i) + " (c=" + std::to_string(c) + ")");
            }
        }
    } else {
        prof.residual = fd_residual(phi, psi, i0, hs, p, c);
    }

    prof.phi_slope_at_0 = slope_at_origin(phi, psi, i0, hs, p, c);
    prof.phi = phi;
    prof.psi.resize(n);
    for (std::size_t i = 0; i < n; ++i) prof.psi[i] = 1.0 - psi[i];
    try {
        prof.decay_rate = decay_fit(prof, p);
    } catch (const FitError&) {
        prof.decay_rate = std::numeric_limits<double>::quiet_NaN();
    }
    return prof;
}

}  // namespace

SemiWaveResult solve_semiwave(const CompetitionParams& p, double c, const SemiWaveConfig& cfg,
                              const WarmStart& warm) {
    return solve_core(p, c, cfg, warm, 0.0, true);
}

SemiWaveProfile solve_semiwave_profile(const CompetitionParams& p, double c, const SemiWaveConfig& cfg) {
    auto res = solve_semiwave(p, c, cfg);
    if (auto* none = std::get_if<NoNontrivialSolution>(&res)) {
        throw NonConvergence("semiwave.solve_semiwave: no nontrivial solution at c=" + std::to_string(c) +
                             " (" + none->reason + ")");
    }
    return std::get<SemiWaveProfile>(std::move(res));
}

namespace {

Pair iterate_of(const SemiWaveProfile& prof) { return {prof.iterate_phi, prof.iterate_psi_tilde}; }

double bracket_extent(const CompetitionParams& p, double c_lo, double c_hi, const SemiWaveConfig& cfg) {
    if (cfg.s_left > 0.0 || cfg.s_right > 0.0) return resolve_extent(p, c_lo, cfg, 0.0);
    return std::max(default_semiwave_extent(p, c_lo), default_semiwave_extent(p, c_hi));
}

}  // namespace

CriticalSpeedReport critical_speed_report(const CompetitionParams& p, const SemiWaveConfig& cfg) {
    CriticalSpeedReport rep;
    double lo = 2.0 * std::sqrt(1.0 - p.k());
    double hi = 2.0 * std::sqrt(p.u_star());
    rep.lower_bound = lo;
    rep.upper_bound = hi;
    if (hi - lo <= 0.0) {
        rep.c_star = lo;
        rep.at_lower_bound = true;
        return rep;
    }
    const double extent = bracket_extent(p, lo, hi, cfg);
    // No polishing inside the predicate: only existence matters.
    SemiWaveConfig pc = cfg;
    pc.newton_polish = false;

    std::optional<SemiWaveProfile> below;
    auto exists = [&](double c) {
        WarmStart ws;
        ws.extent = extent;
        if (below) ws.upper = iterate_of(*below);
        ++rep.solves;
        auto res = solve_core(p, c, pc, ws, 0.0, false);
        if (auto* prof = std::get_if<SemiWaveProfile>(&res)) {
            below = std::move(*prof);
            return true;
        }
        // A sweep cap hit counts as nonexistence on this domain: the front
        // is still drifting outward.
        if (std::get<NoNontrivialSolution>(res).reason == "sweep_cap") ++rep.undecided_probes;
        return false;
    };

    if (exists(hi)) {
        throw BracketError("semiwave.critical_speed: a semi-wave exists at the upper bracket end c=" +
                           std::to_string(hi));
    }
    below.reset();
    if (!exists(lo)) {
        rep.c_star = lo;
        rep.at_lower_bound = true;
        return rep;
    }
    while (hi - lo >= cfg.c_tol) {
        const double mid = 0.5 * (lo + hi);
        if (exists(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    rep.c_star = 0.5 * (lo + hi);
    return rep;
}

double critical_speed(const CompetitionParams& p, const SemiWaveConfig& cfg) {
    return critical_speed_report(p, cfg).c_star;
}

SpeedForGamma speed_for_gamma(const CompetitionParams& p, double gamma, const SemiWaveConfig& cfg) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw DomainError("semiwave.speed_for_gamma: gamma must be positive");
    }
    double lo = 0.0;
    double hi = 2.0 * std::sqrt(p.u_star());
    const double extent = bracket_extent(p, lo, hi, cfg);

    std::optional<SemiWaveProfile> below;  // profile at the largest c with p(c) > 0
    auto solve_at = [&](double c) -> std::optional<SemiWaveProfile> {
        WarmStart ws;
        ws.extent = extent;
        if (below && below->c <= c) ws.upper = iterate_of(*below);
        // The iterate slope and the polished slope differ by O(h^2); the 2%
        // margin keeps every decision near the root on the polished value.
        auto res = solve_core(p, c, cfg, ws, 0.98 * c / gamma, true);
        if (auto* prof = std::get_if<SemiWaveProfile>(&res)) return std::move(*prof);
        return std::nullopt;
    };

    below = solve_at(0.0);
    if (!below) throw NonConvergence("semiwave.speed_for_gamma: no semi-wave at c=0");
    while (hi - lo >= cfg.root_tol) {
        const double mid = 0.5 * (lo + hi);
        auto prof = solve_at(mid);
        const double pval = prof ? gamma * prof->phi_slope_at_0 - mid : -mid;
        if (pval > 0.0) {
            lo = mid;
            below = std::move(prof);
        } else {
            hi = mid;
        }
    }
    const double root = 0.5 * (lo + hi);
    auto prof = solve_at(root);
    if (!prof) {
        // The root sits at the collapse edge; report the last existing profile.
        return {below->c, std::move(*below)};
    }
    return {root, std::move(*prof)};
}

PerturbedSystem perturbed_system(const CompetitionParams& p, double gamma, PerturbDirection dir) {
    const double eps = std::visit([](auto v) {
        if constexpr (std::is_same_v<decltype(v), PerturbLower>) {
            return v.delta;
        } else {
            return v.tau;
        }
    }, dir);
    if (!(eps >= 0.0) || !(eps < 0.5)) throw DomainError("semiwave.perturbed_speed: eps must lie in [0, 0.5)");
    const double sp2 = 1.0 + 2.0 * eps;
    const double sm2 = 1.0 - 2.0 * eps;
    const bool lower = std::holds_alternative<PerturbLower>(dir);
    // Lower: u grows at 1-2eps, v at 1+2eps; Upper: the reverse.
    const double ug = lower ? sm2 : sp2;
    const double vg = lower ? sp2 : sm2;
    const double u_eps = (ug - p.k() * vg) / (1.0 - p.h() * p.k());
    const double v_eps = (vg - p.h() * ug) / (1.0 - p.h() * p.k());
    if (!(u_eps > 0.0) || !(v_eps > 0.0)) {
        throw DomainError("semiwave.perturbed_speed: perturbed equilibrium is not positive (eps=" +
                          std::to_string(eps) + ")");
    }
    // phi(s) = ug * phi~(sqrt(ug) s), psi(s) = vg * psi~(sqrt(ug) s).
    const double r_t = p.r() * vg / ug;
    const double h_t = p.h() * ug / vg;
    const double k_t = p.k() * vg / ug;
    const double gamma_t = gamma * ug;
    const double factor = std::sqrt(ug);
    if (p.is_scalar_mode()) {
        return {CompetitionParams::scalar_mode(p.d(), r_t, h_t), gamma_t, factor};
    }
    return {CompetitionParams::make(p.d(), r_t, h_t, k_t), gamma_t, factor};
}

double perturbed_speed(const CompetitionParams& p, double gamma, PerturbDirection dir, const SemiWaveConfig& cfg) {
    const PerturbedSystem sys = perturbed_system(p, gamma, dir);
    return sys.speed_factor * speed_for_gamma(sys.params, sys.gamma, cfg).c_gamma;
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    int count = 0;
};

LineFit fit_gap(const std::vector<double>& s, const std::vector<double>& vals, std::size_t from, double limit,
                double lo, double hi, const char* what) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    bool seen = false;
    for (std::size_t i = from; i < s.size(); ++i) {
        const double gap = limit - vals[i];
        if (gap <= hi) seen = true;
        if (!seen) continue;
        if (gap < -lo) {
            throw FitError(std::string("semiwave.decay_fit: ") + what + " gap changes sign in the tail");
        }
        if (gap >= lo && gap <= hi) {
            const double ly = std::log(gap);
            sx += s[i];
            sy += ly;
            sxx += s[i] * s[i];
            sxy += s[i] * ly;
            ++cnt;
        }
    }
    if (cnt < 8) throw FitError(std::string("semiwave.decay_fit: too few tail nodes for ") + what);
    LineFit f;
    f.count = cnt;
    f.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / cnt;
    return f;
}

}  // namespace

DecayFit decay_fit_report(const SemiWaveProfile& prof, const CompetitionParams& p) {
    const std::size_t i0 = (prof.s_grid.size() - 1) / 2;
    std::vector<double> psi_t(prof.psi.size());
    for (std::size_t i = 0; i < psi_t.size(); ++i) psi_t[i] = 1.0 - prof.psi[i];
    const double us = p.u_star();
    const LineFit fp = fit_gap(prof.s_grid, prof.phi, i0, us, 1e-9, 1e-4, "phi");
    const LineFit fq = fit_gap(prof.s_grid, psi_t, i0, p.h() * us, 1e-9, 1e-4, "psi");
    DecayFit out;
    out.phi_exponent = fp.slope;
    out.psi_exponent = fq.slope;
    out.phi_nodes = fp.count;
    out.psi_nodes = fq.count;
    out.exponent = 0.5 * (fp.slope + fq.slope);
    out.amplitude_ratio = std::exp(fp.intercept - fq.intercept);
    if (std::abs(fp.slope - fq.slope) > 0.1 * std::abs(out.exponent)) {
        throw FitError("semiwave.decay_fit: component exponents differ (" + std::to_string(fp.slope) + " vs " +
                       std::to_string(fq.slope) + ")");
    }
    return out;
}

double decay_fit(const SemiWaveProfile& prof, const CompetitionParams& p) {
    return decay_fit_report(prof, p).exponent;
}

double local_sup_phi(const std::vector<double>& s, const std::vector<double>& phi, double x_window) {
    double m = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] >= 0.0 && s[i] <= x_window) m = std::max(m, phi[i]);
    }
    return m;
}

}  // namespace lvfb
