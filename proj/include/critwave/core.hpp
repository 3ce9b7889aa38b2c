#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace critwave {

/// Coefficients of the two-species competition-diffusion system
///
///   u_t = u_xx + u (1 - u - a v)
///   v_t = d v_xx + r v (1 - v - b u)
///
/// The critical case is a = b = 1.
struct CompetitionParams {
    double a = 1.0;
    double b = 1.0;
    double d = 1.0;
    double r = 1.0;

    static CompetitionParams critical(double d, double r);

    bool is_critical() const noexcept { return a == 1.0 && b == 1.0; }
    double dr() const noexcept { return d * r; }

    /// Throws ValidationError naming the offending coefficient.
    void validate() const;

    friend bool operator==(const CompetitionParams&, const CompetitionParams&) = default;
};

struct DerivedSpeeds {
    double c_u;     // 2
    double c_v;     // 2 sqrt(d r)
    double k_star;  // min(1/(2d), d/2)
    double d_star;  // max(1, d)
};

DerivedSpeeds wave_speeds(const CompetitionParams& p);

struct ReactionRates {
    double du;
    double dv;
};

inline ReactionRates reaction_rhs(double u, double v, const CompetitionParams& p) noexcept {
    return {u * (1.0 - u - p.a * v), p.r * v * (1.0 - v - p.b * u)};
}

/// Uniform grid on [x_min, x_max] with n nodes (both ends included).
class Grid1D {
public:
    Grid1D(double x_min, double x_max, std::size_t n);

    /// Symmetric grid [-half_width, half_width] with spacing close to `dx` and an
    /// odd node count so that x = 0 is a node.
    static Grid1D symmetric(double half_width, double dx);

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    std::size_t size() const noexcept { return n_; }
    double dx() const noexcept { return dx_; }
    double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }
    std::vector<double> nodes() const;

    /// Index of the node nearest to `x` (clamped to the grid).
    std::size_t nearest(double x) const noexcept;

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    double x_min_;
    double x_max_;
    std::size_t n_;
    double dx_;
};

enum class Species { u, v };

/// Time-stamped samples of (u, v) on a grid.
struct FieldState {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;

    std::span<const double> field(Species s) const noexcept {
        return s == Species::u ? std::span<const double>(u) : std::span<const double>(v);
    }

    /// Throws StructuralError when sample counts disagree with the grid.
    void check_shape(const Grid1D& grid) const;

    /// True when every sample lies in [0, 1].
    bool within_unit_box() const noexcept;

    friend bool operator==(const FieldState&, const FieldState&) = default;
};

/// Interior-only discrete residuals; entry i corresponds to grid node offset + i.
struct ResidualFields {
    std::size_t offset = 1;
    std::vector<double> n1;
    std::vector<double> n2;
};

/// Second-order central differences of
///   N1 = u_t - u_xx - u (1 - u - a v),  N2 = v_t - d v_xx - r v (1 - v - b u)
/// at the middle of three equally spaced snapshots. Boundary nodes are omitted.
ResidualFields residual_operators(std::span<const FieldState> snapshots,
                                  const Grid1D& grid,
                                  const CompetitionParams& p);

}  // namespace critwave
