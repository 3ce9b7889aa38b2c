#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace critwave {

/// Wave (U, V)(xi) from (alpha, 1 - alpha) at -inf to (beta, 1 - beta) at +inf.
struct TwParams {
    double alpha = 1.0;
    double beta = 0.0;
    double c = 1.0;
    double d = 1.0;
    double r = 1.0;

    void validate() const;
};

/// W = alpha - U, P = U', R = V - 1 + alpha, Q = V'.
struct TwState {
    double W = 0.0;
    double P = 0.0;
    double R = 0.0;
    double Q = 0.0;

    std::array<double, 4> array() const noexcept { return {W, P, R, Q}; }
    static TwState from(const std::array<double, 4>& a) noexcept { return {a[0], a[1], a[2], a[3]}; }
    friend bool operator==(const TwState&, const TwState&) = default;
};

/// W' = -P, P' = -cP - (alpha - W)(W - R), R' = Q, Q' = -(c/d)Q - (r/d)(R + 1 - alpha)(W - R).
TwState tw_field(const TwState& s, const TwParams& p);

/// Rest state at +inf: W = R = alpha - beta, P = Q = 0.
TwState target_state(const TwParams& p);

struct EquilibriumLinearization {
    std::array<std::array<double, 4>, 4> J{};
    std::array<std::complex<double>, 4> eigenvalues{};
    std::array<std::array<std::complex<double>, 4>, 4> eigenvectors{};  // eigenvectors[k] pairs with eigenvalues[k]
};

/// Jacobian of tw_field at the origin and its eigen-decomposition.
EquilibriumLinearization equilibrium_jacobian(double alpha, double c, double d, double r);

enum class Termination { span_end, divergence, target_reached };
std::string to_string(Termination t);

struct Trajectory {
    std::vector<double> xi;  // strictly increasing
    std::vector<TwState> states;
    Termination reason = Termination::span_end;
};

struct ShootControls {
    double rtol = 1e-9;
    double atol = 1e-12;
    double blowup = 1e3;
    /// Radius of the ball around the target that ends the shot; 0 disables it.
    double target_radius = 1e-6;
};

/// Adaptive Dormand-Prince integration of tw_field over [xi_start, xi_end].
/// Throws StiffnessError on step-size underflow.
Trajectory shoot(const TwParams& p, const TwState& init, double xi_start, double xi_end,
                 const ShootControls& ctl = {});

/// Strict sign alternations of W - R, ignoring samples with |W - R| < dead_band.
std::size_t sign_changes(const Trajectory& traj, double dead_band = 1e-12);

/// U'V' < 0 at every sample with xi in the last `fraction` of the trajectory.
bool ultimately_monotone(const Trajectory& traj, double fraction = 0.2);

/// 0 < alpha - W < 1 and 0 < R + 1 - alpha < 1 at every sample.
bool within_wave_bounds(const Trajectory& traj, const TwParams& p);

/// Smallest distance to the target over the last half of the trajectory.
double connection_residual(const Trajectory& traj, const TwParams& p);

enum class SearchLabel { nonexistent, no_candidate_found, candidate_found };
std::string to_string(SearchLabel l);

struct SearchControls {
    std::size_t ensemble = 64;
    std::uint64_t seed = 20240601;
    double span = 60.0;
    /// Distance of the starting points from the origin.
    double start_radius = 1e-6;
    /// Weight of the random kernel-orthogonal part of each starting direction.
    double jitter = 0.05;
    /// Residual below which a qualifying trajectory counts as a connection.
    double candidate_threshold = 1e-2;
    std::size_t jobs = 1;
    ShootControls shoot{};
};

struct SearchResult {
    SearchLabel label = SearchLabel::no_candidate_found;
    std::string reason;
    double best_residual = std::numeric_limits<double>::infinity();
    Trajectory best;  // empty unless some trajectory qualified
    std::size_t shots = 0;
    std::size_t qualified = 0;  // passed the bounds and monotonicity filters
    std::size_t unstable_dimension = 0;
};

/// Starting points near the origin along unstable eigendirections plus
/// kernel-orthogonal jitter, deterministic in `ctl.seed`.
std::vector<TwState> ensemble_starts(const TwParams& p, const SearchControls& ctl);

SearchResult monotone_wave_search(const TwParams& p, const SearchControls& ctl = {});

}  // namespace critwave
