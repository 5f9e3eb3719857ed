#pragma once

#include <array>
#include <span>
#include <vector>

namespace lvfb::linalg {

/// Solves a tridiagonal system in place (Thomas algorithm, no pivoting).
/// lower[0] and upper[n-1] are ignored. rhs is overwritten with the solution.
/// Callers guarantee diagonal dominance (all uses here are M-matrices).
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

using Block = std::array<double, 4>;  // row-major 2x2
using Vec2 = std::array<double, 2>;

/// Block-tridiagonal solve with 2x2 blocks. Same conventions as the scalar
/// version. Throws NumericalError on a singular pivot block.
void solve_block_tridiagonal(std::span<const Block> lower, std::span<const Block> diag,
                             std::span<const Block> upper, std::span<Vec2> rhs);

}  // namespace lvfb::linalg
