// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lvfb/dynamics.hpp"
#include "lvfb/errors.hpp"
#include "lvfb/scalar_waves.hpp"
#include "lvfb/semiwave.hpp"
#include "lvfb/stefan_sim.hpp"
#include "oracle.hpp"

using namespace lvfb;

namespace {

const CompetitionParams P = CompetitionParams::make(1, 1, 0.5, 0.5);
constexpr double kUs = 2.0 / 3.0;

// Pinned tolerances.
constexpr double kResidualTol = 1e-6;
constexpr double kSolveSeconds = 30.0;
const double kCStarLo = 2.0 * std::sqrt(0.5), kCStarHi = 2.0 * std::sqrt(kUs);
constexpr double kCStarStability = 2e-3;
constexpr double kCrossRel = 0.05;
constexpr double kCoarseSeconds = 300.0;
constexpr double kLimitTol = 0.02;
constexpr double kVanishSup = 1e-4;
constexpr double kVanishV = 0.99;
constexpr double kVanishFrontSlack = 0.1;
constexpr double kDecayRel = 0.05;
constexpr double kScalarRel = 0.02;
constexpr double kSlopeTol = 1e-4;
constexpr double kOrderSlack = 1e-6;
constexpr double kRatioTol = 1e-12;
constexpr double kBoxSlack = 0.02;

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9f", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Shared expensive results.
struct Shared {
    double c_star = NAN;
    bool have_cross_run = false;
    SimOutcome cross_run;
} shared;

const SimOutcome& cross_run() {
    if (!shared.have_cross_run) {
        shared.cross_run = simulate(P, StefanParams{1.0}, InitialData::bump(3.0, 1.0), 300.0);
        shared.have_cross_run = true;
    }
    return shared.cross_run;
}

double c_star() {
    if (std::isnan(shared.c_star)) shared.c_star = critical_speed(P);
    return shared.c_star;
}

bool monotone(const std::vector<double>& a, double slack, bool up) {
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (up && a[i] < a[i - 1] - slack) return false;
        if (!up && a[i] > a[i - 1] + slack) return false;
    }
    return true;
}

bool c1_residual(std::ostream& out) {
    bool ok = true;
    for (double c : {0.0, 0.5, 1.0}) {
        const auto t0 = std::chrono::steady_clock::now();
        const SemiWaveProfile pr = solve_semiwave_profile(P, c);
        const double secs = seconds_since(t0);
        const double res = oracle::residual(pr, P, c).sup_residual;
        const bool mono = monotone(pr.phi, 0.0, true) && monotone(pr.psi, 0.0, false);
        const bool lim = std::abs(pr.phi.back() - kUs) < 1e-6 && std::abs(pr.psi.back() - kUs) < 1e-6;
        out << " c=" << c << " residual=" << res << " t=" << secs << "s";
        ok = ok && res <= kResidualTol && mono && lim && secs <= kSolveSeconds;
    }
    return ok;
}

bool c2_critical_speed(std::ostream& out) {
    const double cs = c_star();
    SemiWaveConfig tight;
    tight.fp_tol = 1e-9;
    const double ct = critical_speed(P, tight);
    out << " c*=" << fmt(cs) << " tight=" << fmt(ct) << " bracket [" << fmt(kCStarLo) << ", " << fmt(kCStarHi) << "]";
    return cs >= kCStarLo - 1e-12 && cs <= kCStarHi + 1e-12 && std::abs(cs - ct) <= kCStarStability;
}

bool c3_monotonicity(std::ostream& out) {
    std::vector<double> slopes;
    for (double c : {0.0, 0.25, 0.5, 0.75, 1.0}) slopes.push_back(solve_semiwave_profile(P, c).phi_slope_at_0);
    bool ok = true;
    for (std::size_t i = 1; i < slopes.size(); ++i) ok = ok && slopes[i] < slopes[i - 1];
    out << " slopes " << slopes.front() << ".." << slopes.back();
    const double cs = c_star();
    std::vector<double> cg;
    for (double g : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 32.0, 128.0}) cg.push_back(speed_for_gamma(P, g).c_gamma);
    for (std::size_t i = 0; i < cg.size(); ++i) {
        ok = ok && cg[i] < cs;
        if (i > 0) ok = ok && cg[i] > cg[i - 1] && (cs - cg[i]) < (cs - cg[i - 1]);
    }
    out << " c_gamma " << cg.front() << ".." << cg.back() << " < c*=" << cs;
    return ok;
}

bool c4_collapse(std::ostream& out) {
    const double cs = c_star();
    // The converged monotone iterate; Newton is not needed for this metric.
    SemiWaveConfig cfg;
    cfg.newton_polish = false;
    std::vector<double> sups;
    for (double eps : {0.1, 0.05, 0.025}) {
        const SemiWaveProfile pr = solve_semiwave_profile(P, cs - eps, cfg);
        sups.push_back(local_sup_phi(pr.s_grid, pr.phi, cfg.collapse_window));
        out << " eps=" << eps << " sup=" << sups.back();
    }
    return sups[1] < sups[0] && sups[2] < sups[1] && sups[2] < 1e-3 * kUs;
}

bool c5_cross_check(std::ostream& out) {
    SemiWaveConfig fine;
    fine.n = 16001;
    const double cg = speed_for_gamma(P, 1.0, fine).c_gamma;
    const auto t0 = std::chrono::steady_clock::now();
    const SimOutcome& coarse = cross_run();
    const double coarse_secs = seconds_since(t0);
    const SimOutcome ref = oracle::fine_reference_run(P, StefanParams{1.0}, InitialData::bump(3.0, 1.0), 300.0);
    const double e_coarse = std::abs(coarse.speed_estimate - cg) / cg;
    const double e_fine = std::abs(ref.speed_estimate - cg) / cg;
    out << " c_gamma=" << cg << " coarse=" << coarse.speed_estimate << " (" << e_coarse << ", " << coarse_secs
        << "s) fine=" << ref.speed_estimate << " (" << e_fine << ")";
    return e_coarse <= kCrossRel && e_fine < e_coarse && coarse_secs <= kCoarseSeconds;
}

bool c6_dichotomy(std::ostream& out) {
    bool ok = true;
    SimConfig stop;
    stop.stop_on_classification = true;
    for (double g : {0.01, 1.0, 100.0}) {
        ok = ok && simulate(P, StefanParams{g}, InitialData::bump(3.0, 1.0), 50.0, stop).classification ==
                       Classification::Spreading;
    }
    const SimOutcome v = simulate(P, StefanParams{1e-3}, InitialData::bump(1.0, 1.0), 60.0);
    const double th = spreading_threshold(P);
    ok = ok && v.classification == Classification::Vanishing && v.u_sup_series.back() < kVanishSup &&
         v.final_state.v.front() > kVanishV && v.final_state.g <= th + kVanishFrontSlack;
    out << " (b) sup u=" << v.u_sup_series.back() << " g(T)=" << v.final_state.g;
    const InitialData one = InitialData::bump(1.0, 1.0);
    const GammaStarReport r = classify_threshold_gamma(P, one);
    const GammaStarConfig gc;
    const auto up = simulate(P, StefanParams{1.2 * r.gamma_star}, one, gc.horizon, stop).classification;
    const auto dn = simulate(P, StefanParams{0.8 * r.gamma_star}, one, gc.horizon, stop).classification;
    out << " (c) gamma*=" << r.gamma_star << " 1.2x " << to_string(up) << " 0.8x " << to_string(dn);
    return ok && up == Classification::Spreading && dn == Classification::Vanishing;
}

bool c7_limits(std::ostream& out) {
    const SimOutcome& o = cross_run();
    const double u0 = o.final_state.u_hat.front(), v0 = o.final_state.v.front();
    bool ok = std::abs(u0 - kUs) <= kLimitTol && std::abs(v0 - kUs) <= kLimitTol;
    out << " u(0,T)=" << u0 << " v(0,T)=" << v0;
    const SimOutcome v = simulate(P, StefanParams{1e-3}, InitialData::bump(1.0, 1.0), 60.0);
    double worst = 0.0;
    for (double x = 0.0; x <= 3.0; x += 0.05) {
        worst = std::max({worst, v.final_state.u_at(x), 1.0 - v.final_state.v_at(x)});
    }
    // Distance to (0, 1) must also shrink over the run.
    const double early = std::max(v.trajectory[v.trajectory.size() / 4].u_sup,
                                  1.0 - v.trajectory[v.trajectory.size() / 4].v_at_0);
    out << " vanishing dist " << early << " -> " << worst;
    return ok && worst < early && worst < 1e-2;
}

bool c8_perturbed(std::ostream& out) {
    const double cg = speed_for_gamma(P, 1.0).c_gamma;
    double prev_lo = HUGE_VAL, prev_hi = HUGE_VAL;
    bool ok = true;
    for (double eps : {0.04, 0.02, 0.01}) {
        const double lo = perturbed_speed(P, 1.0, PerturbLower{eps});
        const double hi = perturbed_speed(P, 1.0, PerturbUpper{eps});
        out << " eps=" << eps << " [" << lo << ", " << hi << "]";
        ok = ok && lo < cg && cg < hi && (cg - lo) < prev_lo && (hi - cg) < prev_hi;
        prev_lo = cg - lo;
        prev_hi = hi - cg;
    }
    out << " c_gamma=" << cg;
    return ok;
}

bool c9_decay(std::ostream& out) {
    const double mu = decay_fit(solve_semiwave_profile(P, 0.0), P);
    const double ref = -1.0 / std::sqrt(3.0);
    out << " fit=" << mu << " closed form=" << ref;
    return std::abs(mu - ref) <= kDecayRel * std::abs(ref);
}

bool c10_scalar(std::ostream& out) {
    const auto p0 = CompetitionParams::scalar_mode(1, 1, 0.5);
    const double c = kpp_speed_for_gamma(1, 1, 1, 1.0, 1e-8);
    const SimOutcome o = simulate(p0, StefanParams{1.0}, InitialData::bump(3.0, 1.0), 300.0);
    const double rel = std::abs(o.speed_estimate - c) / c;
    const double slope = solve_kpp(1, 1, 1, 0.0).slope_at_0;
    const double ref = oracle::kpp_c0_slope(1, 1, 1);
    out << " c=" << c << " sim=" << o.speed_estimate << " rel=" << rel << " slope=" << slope;
    return rel <= kScalarRel && std::abs(slope - ref) <= kSlopeTol;
}

bool c11_comparison(std::ostream& out) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> amp(0.2, 0.9), gap(1.05, 1.5), g0d(1.0, 2.5), vd(0.6, 1.0);
    SimConfig cfg;
    cfg.dx_v = 0.004;
    cfg.output_interval = 0.5;
    cfg.snapshot_times = {0.5, 1.0, 2.0, 4.0, 8.0, 12.0};
    double worst = -HUGE_VAL;
    for (int trial = 0; trial < 5; ++trial) {
        const double a = amp(rng), g0 = g0d(rng), vb = vd(rng);
        const double b = std::min(1.0, a * gap(rng)), g0b = g0 * gap(rng), va = vb * gap(rng);
        const SimOutcome A = simulate(P, StefanParams{1.0}, InitialData::bump(g0, a, va), 12.0, cfg);
        const SimOutcome B = simulate(P, StefanParams{1.0}, InitialData::bump(g0b, b, vb), 12.0, cfg);
        for (std::size_t i = 0; i < A.g_series.size(); ++i) {
            worst = std::max(worst, A.g_series[i].second - B.g_series[i].second);
        }
        for (std::size_t k = 0; k < A.snapshots.size(); ++k) {
            const auto& sa = A.snapshots[k];
            const auto& sb = B.snapshots[k];
            for (std::size_t j = 0; j < std::min(sa.x.size(), sb.x.size()); ++j) {
                worst = std::max({worst, sa.u[j] - sb.u[j], sb.v[j] - sa.v[j]});
            }
        }
    }
    out << " worst order violation " << worst;
    return worst <= kOrderSlack;
}

bool c12_sandwich(std::ostream& out) {
    double worst = 0.0;
    for (auto [h, k] : {std::pair{0.5, 0.5}, {0.3, 0.6}, {0.9, 0.2}}) {
        const auto it = sandwich(CompetitionParams::make(1, 1, h, k), 10);
        for (int i = 0; i + 2 <= 10; ++i) {
            const double g0 = it.upper_u[i] - it.lower_u[i];
            if (g0 < 1e-3) break;
            worst = std::max(worst, std::abs((it.upper_u[i + 2] - it.lower_u[i + 2]) / g0 - h * k));
        }
    }
    const auto box = sandwich(P, 6);
    bool inside = true;
    for (const auto& s : cross_run().trajectory) {
        if (s.t < 200.0) continue;
        inside = inside && s.u_at_0 >= box.lower_u[6] - kBoxSlack && s.u_at_0 <= box.upper_u[6] + kBoxSlack &&
                 s.v_at_0 >= box.lower_v[6] - kBoxSlack && s.v_at_0 <= box.upper_v[6] + kBoxSlack;
    }
    out << " ratio error " << worst << " box u in [" << box.lower_u[6] << ", " << box.upper_u[6] << "]";
    return worst <= kRatioTol && inside;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<bool(std::ostream&)>>> checks = {
        {"semiwave residual", c1_residual},      {"critical speed bracket", c2_critical_speed},
        {"slope and speed monotonicity", c3_monotonicity}, {"collapse near critical speed", c4_collapse},
        {"simulated front speed vs c_gamma", c5_cross_check}, {"spreading-vanishing dichotomy", c6_dichotomy},
        {"long-time limits", c7_limits},        {"perturbed speed sandwich", c8_perturbed},
        {"tail decay rate", c9_decay},          {"scalar consistency", c10_scalar},
        {"comparison principle", c11_comparison}, {"sandwich recurrence", c12_sandwich},
    };
    int failures = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        std::ostringstream detail;
        bool ok = false;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            ok = checks[i].second(detail);
        } catch (const std::exception& e) {
            detail << " exception: " << e.what();
        }
        std::printf("%s %2zu %s:%s [%.1fs]\n", ok ? "PASS" : "FAIL", i + 1, checks[i].first.c_str(),
                    detail.str().c_str(), seconds_since(t0));
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
