#include "critwave/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "critwave/errors.hpp"

namespace critwave {

CompetitionParams CompetitionParams::critical(double d, double r) {
    CompetitionParams p{1.0, 1.0, d, r};
    p.validate();
    return p;
}

void CompetitionParams::validate() const {
    auto positive = [](double value, const char* name) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw ValidationError(std::string(name) + " must be a finite number > 0 (got " +
                                  std::to_string(value) + ")");
        }
    };
    positive(a, "a");
    positive(b, "b");
    positive(d, "d");
    positive(r, "r");
}

DerivedSpeeds wave_speeds(const CompetitionParams& p) {
    p.validate();
    return {2.0, 2.0 * std::sqrt(p.d * p.r), std::min(0.5 / p.d, 0.5 * p.d), std::max(1.0, p.d)};
}

Grid1D::Grid1D(double x_min, double x_max, std::size_t n)
    : x_min_(x_min), x_max_(x_max), n_(n), dx_(0.0) {
    if (!(x_min < x_max)) throw ValidationError("grid requires x_min < x_max");
    if (n < 3) throw ValidationError("grid requires at least 3 nodes");
    dx_ = (x_max - x_min) / static_cast<double>(n - 1);
}

Grid1D Grid1D::symmetric(double half_width, double dx) {
    if (!(half_width > 0.0) || !(dx > 0.0)) {
        throw ValidationError("symmetric grid requires half_width > 0 and dx > 0");
    }
    const auto cells_per_side = static_cast<std::size_t>(std::ceil(half_width / dx));
    const double half = static_cast<double>(cells_per_side) * dx;
    return Grid1D(-half, half, 2 * cells_per_side + 1);
}

std::vector<double> Grid1D::nodes() const {
    std::vector<double> xs(n_);
    for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
    return xs;
}

std::size_t Grid1D::nearest(double xq) const noexcept {
    const double k = std::round((xq - x_min_) / dx_);
    if (k <= 0.0) return 0;
    if (k >= static_cast<double>(n_ - 1)) return n_ - 1;
    return static_cast<std::size_t>(k);
}

void FieldState::check_shape(const Grid1D& grid) const {
    if (u.size() != grid.size() || v.size() != grid.size()) {
        throw StructuralError("field sample count (" + std::to_string(u.size()) + ", " +
                              std::to_string(v.size()) + ") does not match grid size " +
                              std::to_string(grid.size()));
    }
}

bool FieldState::within_unit_box() const noexcept {
    auto in_box = [](double s) { return s >= 0.0 && s <= 1.0; };
    return std::all_of(u.begin(), u.end(), in_box) && std::all_of(v.begin(), v.end(), in_box);
}

ResidualFields residual_operators(std::span<const FieldState> snapshots,
                                  const Grid1D& grid,
                                  const CompetitionParams& p) {
    if (snapshots.size() != 3) {
        throw StructuralError("residual_operators needs exactly three snapshots");
    }
    for (const auto& s : snapshots) s.check_shape(grid);
    const double h0 = snapshots[1].t - snapshots[0].t;
    const double h1 = snapshots[2].t - snapshots[1].t;
    if (!(h0 > 0.0) || std::abs(h1 - h0) > 1e-9 * std::max(h0, h1)) {
        throw StructuralError("snapshots must be strictly increasing and equally spaced in time");
    }
    const double inv_2dt = 0.5 / h0;
    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    const auto& prev = snapshots[0];
    const auto& mid = snapshots[1];
    const auto& next = snapshots[2];

    const std::size_t n = grid.size();
    ResidualFields out;
    out.offset = 1;
    out.n1.resize(n - 2);
    out.n2.resize(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double u = mid.u[i];
        const double v = mid.v[i];
        const double u_t = (next.u[i] - prev.u[i]) * inv_2dt;
        const double v_t = (next.v[i] - prev.v[i]) * inv_2dt;
        const double u_xx = (mid.u[i - 1] - 2.0 * u + mid.u[i + 1]) * inv_dx2;
        const double v_xx = (mid.v[i - 1] - 2.0 * v + mid.v[i + 1]) * inv_dx2;
        const auto rates = reaction_rhs(u, v, p);
        out.n1[i - 1] = u_t - u_xx - rates.du;
        out.n2[i - 1] = v_t - p.d * v_xx - rates.dv;
    }
    return out;
}

}  // namespace critwave
