#include "lvfb/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lvfb/errors.hpp"

namespace lvfb {

namespace {

bool in_open_unit(double x) { return x > 0.0 && x < 1.0; }

void check_positive(double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string("model_core: ") + name + " must be positive and finite");
    }
}

// Largest root first for the '+' branch.
std::pair<double, double> quadratic_roots(double a, double c, double q) {
    // a x^2 - c x - q = 0 with a > 0, q > 0
    const double disc = std::sqrt(c * c + 4.0 * a * q);
    // Stable evaluation: the root with the same sign as c uses the sum.
    double minus;
    double plus;
    if (c >= 0.0) {
        plus = (c + disc) / (2.0 * a);
        minus = -q / (a * plus);
    } else {
        minus = (c - disc) / (2.0 * a);
        plus = -q / (a * minus);
    }
    return {minus, plus};
}

double bisect(const CompetitionParams& p, double c, double lo, double hi) {
    double flo = linearization_determinant(p, c, lo);
    double fhi = linearization_determinant(p, c, hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw NumericalError("model_core.linearization_roots: bracket [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "] does not change sign");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
        const double fm = linearization_determinant(p, c, mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

CompetitionParams CompetitionParams::make(double d, double r, double h, double k) {
    check_positive(d, "d");
    check_positive(r, "r");
    if (!in_open_unit(h) || !in_open_unit(k)) {
        throw DomainError("model_core: weak competition requires 0 < h < 1 and 0 < k < 1 (got h=" +
                          std::to_string(h) + ", k=" + std::to_string(k) + ")");
    }
    return CompetitionParams(d, r, h, k, false);
}

CompetitionParams CompetitionParams::scalar_mode(double d, double r, double h) {
    check_positive(d, "d");
    check_positive(r, "r");
    if (!in_open_unit(h)) {
        throw DomainError("model_core: scalar mode requires 0 < h < 1 (got h=" + std::to_string(h) + ")");
    }
    return CompetitionParams(d, r, h, 0.0, true);
}

CompetitionParams nondimensionalize(double a1, double a2, double b1, double b2,
                                    double c1, double c2, double d1, double d2) {
    for (double x : {a1, a2, b1, b2, c1, c2, d1, d2}) check_positive(x, "raw coefficient");
    const double d = d2 / d1;
    const double r = a2 / a1;
    const double k = a2 * c1 / (a1 * b2);
    const double h = a1 * c2 / (a2 * b1);
    return CompetitionParams::make(d, r, h, k);
}

Equilibria equilibria(const CompetitionParams& p) {
    return {p.u_star(), p.v_star()};
}

KernelExponents kernel_exponents(double d1, double d2, double c, double beta) {
    check_positive(beta, "beta");
    check_positive(d1, "d1");
    check_positive(d2, "d2");
    const auto [l1, l2] = quadratic_roots(d1, c, beta);
    const auto [m1, m2] = quadratic_roots(d2, c, beta);
    return {l1, l2, m1, m2};
}

double linearization_determinant(const CompetitionParams& p, double c, double mu) {
    const double us = p.u_star();
    const double vs = p.v_star();
    const double a = mu * mu - c * mu - us;
    const double b = p.d() * mu * mu - c * mu - p.r() * vs;
    return a * b - p.k() * p.h() * p.r() * us * vs;
}

std::array<double, 4> linearization_roots(const CompetitionParams& p, double c) {
    if (c < 0.0) throw DomainError("model_core.linearization_roots: c must be nonnegative");
    const auto [m1m, m1p] = quadratic_roots(1.0, c, p.u_star());
    const auto [m2m, m2p] = quadratic_roots(p.d(), c, p.r() * p.v_star());

    if (p.k() == 0.0) {
        // Decoupled: the determinant factors exactly.
        std::array<double, 4> roots{m1m, m2m, m1p, m2p};
        std::sort(roots.begin(), roots.end());
        return roots;
    }

    const double lo_minus = std::min(m1m, m2m);
    const double hi_minus = std::max(m1m, m2m);
    const double lo_plus = std::min(m1p, m2p);
    const double hi_plus = std::max(m1p, m2p);

    double left = lo_minus;
    for (double step = 1.0; linearization_determinant(p, c, left) <= 0.0; step *= 2.0) {
        left = lo_minus - step;
        if (step > 1e12) throw NumericalError("model_core.linearization_roots: no left bracket");
    }
    double right = hi_plus;
    for (double step = 1.0; linearization_determinant(p, c, right) <= 0.0; step *= 2.0) {
        right = hi_plus + step;
        if (step > 1e12) throw NumericalError("model_core.linearization_roots: no right bracket");
    }

    return {bisect(p, c, left, lo_minus), bisect(p, c, hi_minus, 0.0), bisect(p, c, 0.0, lo_plus),
            bisect(p, c, hi_plus, right)};
}

SpectralRoots spectral_roots(const CompetitionParams& p, double c, double beta) {
    return {kernel_exponents(1.0, p.d(), c, beta), linearization_roots(p, c)};
}

double iteration_beta(const CompetitionParams& p) {
    return std::max(1.0 + p.k(), p.r() * (1.0 + p.h()));
}

}  // namespace lvfb
