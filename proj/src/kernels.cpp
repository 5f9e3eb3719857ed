#include "lvfb/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef LVFB_HAVE_OPENMP
#include <omp.h>
#endif

namespace lvfb::kernels {

namespace {

// E1(x) = (e^x - 1)/x, E2(x) = (e^x (x - 1) + 1)/x^2, by series near 0.
void exp_moments(double x, double& e1, double& e2) {
    if (std::abs(x) < 0.05) {
        // E1 = sum x^n/(n+1)!, E2 = sum x^n/(n! (n+2))
        double term = 1.0;  // x^n / n!
        e1 = 0.0;
        e2 = 0.0;
        for (int n = 0; n < 14; ++n) {
            e1 += term / (n + 1);
            e2 += term / (n + 2);
            term *= x / (n + 1);
        }
        return;
    }
    const double ex = std::exp(x);
    e1 = std::expm1(x) / x;
    e2 = (ex * (x - 1.0) + 1.0) / (x * x);
}

}  // namespace

SegmentWeights exp_segment_weights(double rate, double h) {
    const double x = rate * h;
    double e1 = 0.0;
    double e2 = 0.0;
    exp_moments(x, e1, e2);
    return {std::exp(x), h * e2, h * (e1 - e2)};
}

namespace serial {

void forward_exp_scan(std::span<const double> H, SegmentWeights w, double y0, std::span<double> y) {
    const std::size_t n = H.size();
    if (n == 0) return;
    y[0] = y0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        y[i + 1] = w.decay * y[i] + w.w_far * H[i] + w.w_near * H[i + 1];
    }
}

void backward_exp_scan(std::span<const double> H, SegmentWeights w, double y_end,
                       std::span<double> y) {
    const std::size_t n = H.size();
    if (n == 0) return;
    y[n - 1] = y_end;
    for (std::size_t i = n - 1; i-- > 0;) {
        y[i] = w.decay * y[i + 1] + w.w_far * H[i + 1] + w.w_near * H[i];
    }
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_value(std::span<const double> a) {
    double m = -HUGE_VAL;
    for (double x : a) m = std::max(m, x);
    return m;
}

void lerp_uniform(double x0, double dx, std::span<const double> f, std::span<const double> q,
                  double right, std::span<double> out) {
    const std::size_t n = f.size();
    const double last = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double t = (q[i] - x0) / dx;
        if (t <= 0.0) {
            out[i] = f[0];
        } else if (t >= last) {
            out[i] = t > last ? right : f[n - 1];
        } else {
            const auto j = static_cast<std::size_t>(t);
            const double a = t - static_cast<double>(j);
            out[i] = f[j] + a * (f[j + 1] - f[j]);
        }
    }
}

}  // namespace serial

namespace omp {

// Blocked scan: each block is scanned from a zero carry in parallel, carries
// are chained serially, then each block adds decay^m * carry.
void forward_exp_scan(std::span<const double> H, SegmentWeights w, double y0, std::span<double> y) {
    const std::size_t n = H.size();
    if (n == 0) return;
    const std::size_t nb = (n + kScanBlock - 1) / kScanBlock;
    const auto nbi = static_cast<long>(nb);

#pragma omp parallel for schedule(static)
    for (long b = 0; b < nbi; ++b) {
        const std::size_t s = static_cast<std::size_t>(b) * kScanBlock;
        const std::size_t e = std::min(n, s + kScanBlock);
        y[s] = (s == 0) ? y0 : w.w_far * H[s - 1] + w.w_near * H[s];
        for (std::size_t i = s; i + 1 < e; ++i) {
            y[i + 1] = w.decay * y[i] + w.w_far * H[i] + w.w_near * H[i + 1];
        }
    }

    // carry[b] = true y at the last node of block b-1
    std::vector<double> carry(nb, 0.0);
    const double block_decay = std::pow(w.decay, static_cast<double>(kScanBlock));
    for (std::size_t b = 1; b < nb; ++b) {
        const double local = y[b * kScanBlock - 1];
        carry[b] = (b == 1) ? local : local + block_decay * carry[b - 1];
    }

#pragma omp parallel for schedule(static)
    for (long b = 1; b < nbi; ++b) {
        const std::size_t s = static_cast<std::size_t>(b) * kScanBlock;
        const std::size_t e = std::min(n, s + kScanBlock);
        double f = w.decay * carry[static_cast<std::size_t>(b)];
        for (std::size_t i = s; i < e; ++i) {
            y[i] += f;
            f *= w.decay;
        }
    }
}

void backward_exp_scan(std::span<const double> H, SegmentWeights w, double y_end,
                       std::span<double> y) {
    const std::size_t n = H.size();
    if (n == 0) return;
    // Blocks are laid out from the right end so that the last block holds y_end.
    const std::size_t nb = (n + kScanBlock - 1) / kScanBlock;
    const auto nbi = static_cast<long>(nb);
    auto block_hi = [&](std::size_t b) { return n - b * kScanBlock; };  // exclusive
    auto block_lo = [&](std::size_t b) {
        const std::size_t hi = n - b * kScanBlock;
        return hi > kScanBlock ? hi - kScanBlock : 0;
    };

#pragma omp parallel for schedule(static)
    for (long bl = 0; bl < nbi; ++bl) {
        const auto b = static_cast<std::size_t>(bl);
        const std::size_t lo = block_lo(b);
        const std::size_t top = block_hi(b) - 1;
        y[top] = (b == 0) ? y_end : w.w_far * H[top + 1] + w.w_near * H[top];
        for (std::size_t i = top; i-- > lo;) {
            y[i] = w.decay * y[i + 1] + w.w_far * H[i + 1] + w.w_near * H[i];
        }
    }

    // carry[b] = true value at the node just right of block b
    std::vector<double> carry(nb, 0.0);
    for (std::size_t b = 1; b < nb; ++b) {
        const std::size_t right = block_hi(b);  // first node of block b-1
        if (b == 1) {
            carry[b] = y[right];
        } else {
            const double m = static_cast<double>(block_hi(b - 1) - right);
            carry[b] = y[right] + std::pow(w.decay, m) * carry[b - 1];
        }
    }

#pragma omp parallel for schedule(static)
    for (long bl = 1; bl < nbi; ++bl) {
        const auto b = static_cast<std::size_t>(bl);
        const std::size_t lo = block_lo(b);
        double f = w.decay * carry[b];
        for (std::size_t i = block_hi(b); i-- > lo;) {
            y[i] += f;
            f *= w.decay;
        }
    }
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    const auto n = static_cast<long>(a.size());
#pragma omp parallel for reduction(max : m) schedule(static)
    for (long i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_value(std::span<const double> a) {
    double m = -HUGE_VAL;
    const auto n = static_cast<long>(a.size());
#pragma omp parallel for reduction(max : m) schedule(static)
    for (long i = 0; i < n; ++i) m = std::max(m, a[i]);
    return m;
}

void lerp_uniform(double x0, double dx, std::span<const double> f, std::span<const double> q,
                  double right, std::span<double> out) {
    const std::size_t n = f.size();
    const double last = static_cast<double>(n - 1);
    const auto nq = static_cast<long>(q.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < nq; ++i) {
        const double t = (q[i] - x0) / dx;
        if (t <= 0.0) {
            out[i] = f[0];
        } else if (t >= last) {
            out[i] = t > last ? right : f[n - 1];
        } else {
            const auto j = static_cast<std::size_t>(t);
            const double a = t - static_cast<double>(j);
            out[i] = f[j] + a * (f[j + 1] - f[j]);
        }
    }
}

}  // namespace omp

}  // namespace lvfb::kernels
