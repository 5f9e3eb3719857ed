#include "lvfb/dynamics.hpp"

#include <cmath>

#include "lvfb/errors.hpp"

namespace lvfb {

SandwichIterates sandwich_from(const CompetitionParams& p, int n, double upper_u, double upper_v, double lower_u,
                               double lower_v) {
    if (n < 0) throw DomainError("dynamics.sandwich: n must be nonnegative");
    SandwichIterates s;
    s.n = n;
    s.upper_u.resize(n + 1);
    s.upper_v.resize(n + 1);
    s.lower_u.resize(n + 1);
    s.lower_v.resize(n + 1);
    s.upper_u[0] = upper_u;
    s.upper_v[0] = upper_v;
    s.lower_u[0] = lower_u;
    s.lower_v[0] = lower_v;
    const double h = p.h(), k = p.k();
    for (int i = 0; i < n; ++i) {
        s.upper_u[i + 1] = 1.0 - k * s.lower_v[i];
        s.upper_v[i + 1] = 1.0 - h * s.lower_u[i];
        s.lower_u[i + 1] = 1.0 - k * s.upper_v[i];
        s.lower_v[i + 1] = 1.0 - h * s.upper_u[i];
    }
    return s;
}

SandwichIterates sandwich(const CompetitionParams& p, int n) {
    return sandwich_from(p, n, 1.0, 1.0, 1.0 - p.k(), 1.0 - p.h());
}

double logistic_upper_bound(double initial, double t) {
    if (!(initial > 0.0)) throw DomainError("dynamics.logistic_upper_bound: initial must be positive");
    if (t < 0.0) throw DomainError("dynamics.logistic_upper_bound: t must be nonnegative");
    // initial e^t / (1 + initial (e^t - 1)) written to survive large t
    return initial / (initial + (1.0 - initial) * std::exp(-t));
}

DichotomyPredicates dichotomy_predicates(const CompetitionParams& p, double g0, double gamma) {
    if (!(g0 > 0.0)) throw DomainError("dynamics.dichotomy_predicates: g0 must be positive");
    if (!(gamma > 0.0)) throw DomainError("dynamics.dichotomy_predicates: gamma must be positive");
    DichotomyPredicates d;
    d.spreading_threshold = M_PI / (2.0 * std::sqrt(1.0 - p.k()));
    d.small_threshold = M_PI / 2.0;
    d.guaranteed_spreading = g0 >= d.spreading_threshold;
    d.small_domain = g0 < d.small_threshold;
    d.indeterminate = !d.guaranteed_spreading && !d.small_domain;
    return d;
}

}  // namespace lvfb
