#include "lvfb/linalg.hpp"

#include <cmath>

#include "lvfb/errors.hpp"

namespace lvfb::linalg {

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    std::vector<double> c(n);
    double beta = diag[0];
    rhs[0] /= beta;
    for (std::size_t i = 1; i < n; ++i) {
        c[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i + 1] * rhs[i + 1];
}

namespace {

Block mul(const Block& a, const Block& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Vec2 mul(const Block& a, const Vec2& x) {
    return {a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]};
}

Block inverse(const Block& a) {
    const double det = a[0] * a[3] - a[1] * a[2];
    const double scale = std::abs(a[0] * a[3]) + std::abs(a[1] * a[2]);
    if (det == 0.0 || std::abs(det) < 1e-300 || std::abs(det) < 1e-15 * scale) {
        throw NumericalError("linalg.solve_block_tridiagonal: singular pivot block");
    }
    return {a[3] / det, -a[1] / det, -a[2] / det, a[0] / det};
}

Block sub(const Block& a, const Block& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

}  // namespace

void solve_block_tridiagonal(std::span<const Block> lower, std::span<const Block> diag,
                             std::span<const Block> upper, std::span<Vec2> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    std::vector<Block> c(n);
    Block inv = inverse(diag[0]);
    rhs[0] = mul(inv, rhs[0]);
    for (std::size_t i = 1; i < n; ++i) {
        c[i] = mul(inv, upper[i - 1]);
        inv = inverse(sub(diag[i], mul(lower[i], c[i])));
        const Vec2 lx = mul(lower[i], rhs[i - 1]);
        rhs[i] = mul(inv, Vec2{rhs[i][0] - lx[0], rhs[i][1] - lx[1]});
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        const Vec2 cx = mul(c[i + 1], rhs[i + 1]);
        rhs[i][0] -= cx[0];
        rhs[i][1] -= cx[1];
    }
}

}  // namespace lvfb::linalg
