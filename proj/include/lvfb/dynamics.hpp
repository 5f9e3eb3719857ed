#pragma once

#include <vector>

#include "lvfb/model.hpp"

namespace lvfb {

struct SandwichIterates {
    int n = 0;
    std::vector<double> upper_u;
    std::vector<double> upper_v;
    std::vector<double> lower_u;
    std::vector<double> lower_v;
};

/// The affine recurrence
///   upper_u[i+1] = 1 - k lower_v[i],  upper_v[i+1] = 1 - h lower_u[i],
///   lower_u[i+1] = 1 - k upper_v[i],  lower_v[i+1] = 1 - h upper_u[i],
/// seeded with upper = (1, 1) and lower = (1 - k, 1 - h). Entries 0..n.
SandwichIterates sandwich(const CompetitionParams& p, int n);

/// Same recurrence from an arbitrary seed.
SandwichIterates sandwich_from(const CompetitionParams& p, int n, double upper_u, double upper_v, double lower_u,
                               double lower_v);

/// Closed-form solution of u' = u(1 - u).
double logistic_upper_bound(double initial, double t);

struct DichotomyPredicates {
    bool guaranteed_spreading = false;  // g0 >= pi / (2 sqrt(1 - k)), boundary included
    bool small_domain = false;          // g0 < pi / 2
    // Neither holds: the theory gives no gamma* > 0 guarantee for this g0.
    bool indeterminate = false;
    double spreading_threshold = 0.0;
    double small_threshold = 0.0;
};

DichotomyPredicates dichotomy_predicates(const CompetitionParams& p, double g0, double gamma);

}  // namespace lvfb
