#pragma once

#include <array>

namespace lvfb {

/// Nondimensional constants of the competition system
///
///   u_t = u_xx + u(1 - u - k v),   v_t = d v_xx + r v(1 - v - h u).
///
/// Construction enforces the weak-competition regime 0 < h, k < 1. The
/// decoupled case k = 0 is only reachable through scalar_mode(), which is
/// used for Fisher-KPP consistency runs.
class CompetitionParams {
public:
    static CompetitionParams make(double d, double r, double h, double k);
    static CompetitionParams scalar_mode(double d, double r, double h);

    double d() const { return d_; }
    double r() const { return r_; }
    double h() const { return h_; }
    double k() const { return k_; }
    bool is_scalar_mode() const { return scalar_; }

    double u_star() const { return (1.0 - k_) / (1.0 - h_ * k_); }
    double v_star() const { return (1.0 - h_) / (1.0 - h_ * k_); }

    friend bool operator==(const CompetitionParams&, const CompetitionParams&) = default;

private:
    CompetitionParams(double d, double r, double h, double k, bool scalar)
        : d_(d), r_(r), h_(h), k_(k), scalar_(scalar) {}

    double d_;
    double r_;
    double h_;
    double k_;
    bool scalar_;
};

struct Equilibria {
    double u_star;
    double v_star;
};

/// Roots of d1 l^2 - c l - beta = 0 and d2 m^2 - c m - beta = 0, the
/// exponents of the Green's kernels of the cooperative iteration.
struct KernelExponents {
    double lambda1;  // < 0
    double lambda2;  // > 0
    double mu1;      // < 0
    double mu2;      // > 0
};

/// The four real roots of the linearization determinant at (u*, h u*),
/// ordered hat_mu[0] < hat_mu[1] < 0 < hat_mu[2] < hat_mu[3].
struct SpectralRoots {
    KernelExponents kernel;
    std::array<double, 4> hat_mu;
};

/// Raw Lotka-Volterra coefficients to the nondimensional tuple. Throws
/// DomainError when the result is not weak competition.
CompetitionParams nondimensionalize(double a1, double a2, double b1, double b2,
                                    double c1, double c2, double d1, double d2);

Equilibria equilibria(const CompetitionParams& p);

KernelExponents kernel_exponents(double d1, double d2, double c, double beta);

/// P1(mu) = (mu^2 - c mu - u*)(d mu^2 - c mu - r v*) - k h r u* v*.
double linearization_determinant(const CompetitionParams& p, double c, double mu);

/// Bracketed bisection on the four sign-alternating intervals delimited by
/// the roots of the two diagonal quadratics. Throws NumericalError if a
/// bracket does not change sign.
std::array<double, 4> linearization_roots(const CompetitionParams& p, double c);

SpectralRoots spectral_roots(const CompetitionParams& p, double c, double beta);

/// beta = max{1 + k, r(1 + h)}; makes beta*phi + f(phi) monotone on the
/// invariant rectangle [0, u*] x [0, h u*].
double iteration_beta(const CompetitionParams& p);

}  // namespace lvfb
