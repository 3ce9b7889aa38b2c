#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace critwave {

/// Pre-factored constant-coefficient tridiagonal operator for repeated solves
/// with the Thomas algorithm. Rows 0 and n-1 carry their own coefficients so
/// that Neumann (mirror) and Dirichlet closures fit the same structure.
class TridiagonalFactor {
public:
    TridiagonalFactor() = default;
    TridiagonalFactor(std::vector<double> lower, std::vector<double> diag,
                      std::vector<double> upper);

    std::size_t size() const noexcept { return inv_pivot_.size(); }

    /// Solves A x = rhs in place.
    void solve(std::span<double> rhs) const;

private:
    std::vector<double> lower_;
    std::vector<double> upper_star_;  // modified super-diagonal
    std::vector<double> inv_pivot_;
};

}  // namespace critwave
