#include "critwave/tridiagonal.hpp"

#include "critwave/errors.hpp"

namespace critwave {

TridiagonalFactor::TridiagonalFactor(std::vector<double> lower, std::vector<double> diag,
                                     std::vector<double> upper)
    : lower_(std::move(lower)) {
    const std::size_t n = diag.size();
    if (lower_.size() != n || upper.size() != n || n == 0) {
        throw StructuralError("tridiagonal bands must have equal, nonzero length");
    }
    upper_star_.resize(n);
    inv_pivot_.resize(n);
    double pivot = diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) pivot = diag[i] - lower_[i] * upper_star_[i - 1];
        if (pivot == 0.0) throw StructuralError("singular tridiagonal system");
        inv_pivot_[i] = 1.0 / pivot;
        upper_star_[i] = upper[i] * inv_pivot_[i];
    }
}

void TridiagonalFactor::solve(std::span<double> rhs) const {
    const std::size_t n = inv_pivot_.size();
    if (rhs.size() != n) throw StructuralError("tridiagonal rhs size mismatch");
    rhs[0] *= inv_pivot_[0];
    for (std::size_t i = 1; i < n; ++i) {
        rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) * inv_pivot_[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] -= upper_star_[i] * rhs[i + 1];
    }
}

}  // namespace critwave
