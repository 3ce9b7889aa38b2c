#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "critwave/analytic.hpp"
#include "critwave/core.hpp"
#include "critwave/solver.hpp"

namespace critwave {

/// Sign changes of (field - m), in increasing x.
struct Crossings {
    std::vector<double> positions;

    std::size_t count() const noexcept { return positions.size(); }
    bool empty() const noexcept { return positions.empty(); }
    /// Rightmost crossing: the front position.
    double front() const { return positions.back(); }
};

Crossings level_set(std::span<const double> field, const Grid1D& grid, double m);
Crossings level_set(const FieldState& state, const Grid1D& grid, Species species, double m);

/// Observer recording the rightmost m-crossing of one species (NaN when absent).
Observer front_observer(std::string name, Species species, double m);
/// Observer recording a field value at the node nearest x.
Observer point_observer(std::string name, Species species, double x);

struct FrontTrace {
    double level = 0.5;
    std::vector<double> times;
    std::vector<double> positions;
};

/// Front series from a trace observer record, dropping samples without a crossing.
FrontTrace front_trace(const SimulationTrace& trace, const std::string& record, double level);

struct FitWindow {
    double t_min = -std::numeric_limits<double>::infinity();
    double t_max = std::numeric_limits<double>::infinity();
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_norm = 0.0;  // root-mean-square residual
    double t_min = 0.0;          // window actually used
    double t_max = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares y = slope x + intercept; throws StructuralError
/// for fewer than two points or degenerate abscissae.
FitResult least_squares(std::span<const double> x, std::span<const double> y);

/// Slope of position vs time over the window (at least 10 points).
FitResult fit_speed(const FrontTrace& front, FitWindow window = {});

/// Slope of (position - c t) vs ln t; the window must satisfy t_max / t_min >= 5.
FitResult fit_log_shift(const FrontTrace& front, double c, FitWindow window = {});

struct BumpTrace {
    std::vector<double> times;
    std::vector<double> u0;            // u(t, 0)
    std::vector<double> one_minus_v0;  // 1 - v(t, 0)
    double cone_slope = 0.0;
};

BumpTrace bump_trace(const SimulationTrace& trace, const std::string& u_record,
                     const std::string& v_record);

struct BumpMetrics {
    FitResult u0;            // log-log fit of u(t, 0)
    FitResult one_minus_v0;  // log-log fit of 1 - v(t, 0)
    double k_star = 0.0;
    /// u(t, 0) lies between c_low t^(-1/2) and c_high t^(-k*) on the window.
    double c_low = 0.0;
    double c_high = 0.0;
    /// max / min of u(t, 0) sqrt(t) over the window.
    double sqrt_t_band = 0.0;
    std::vector<std::string> warnings;
};

/// Samples before `onset` are skipped; samples below 1e-14 truncate the window.
BumpMetrics bump_metrics(const BumpTrace& bump, double d, double onset = 50.0);

/// Slope of ln f(t,x) - ln f(t,0) against -x^2/(4t) over |x| <= radius_factor sqrt(t).
FitResult gaussian_factor_fit(const FieldState& state, const Grid1D& grid, Species species,
                              double radius_factor = 2.0);

/// Sup over x >= 0 of |field - wave(x - x_f)| where x_f is the field's rightmost
/// 1/2-crossing, refined by cubic interpolation. Throws StructuralError without a front.
double profile_distance(const FieldState& state, const Grid1D& grid, const KppWave& wave,
                        Species species);

enum class StrongWeakRegime { undetermined, llw, acceleration };

const char* to_string(StrongWeakRegime regime);

/// Speed formulas of the strong-weak system (a < 1 < b).
struct StrongWeakSpeeds {
    double a = 0.5;
    double rd = 1.0;
    double c_nlp = 0.0;
    std::optional<double> c_llw;
    std::optional<double> selected;
    StrongWeakRegime regime = StrongWeakRegime::undetermined;

    /// c - sqrt(c^2 - 4(1 - a)) + 2 sqrt(a), for c >= 2 sqrt(1 - a).
    double f(double c) const;
    /// Inverse of f on (2 sqrt(a), 2 (sqrt(1 - a) + sqrt(a))].
    double f_inverse(double y) const;
};

StrongWeakSpeeds strongweak_speeds(double a, double d, double r,
                                   std::optional<double> c_llw_estimate = std::nullopt);

}  // namespace critwave
