#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "critwave/core.hpp"
#include "critwave/tridiagonal.hpp"

namespace critwave {

enum class Boundary { no_flux, absorbing };

struct SolverConfig {
    double dt = 0.05;
    double t_end = 100.0;
    double dx = 0.1;
    Boundary boundary = Boundary::no_flux;
    /// Observers run every `snapshot_stride` steps.
    std::size_t snapshot_stride = 20;
    /// Full fields are kept every `field_stride` observations (first and last always).
    std::size_t field_stride = 1;
    double domain_margin = 60.0;
    /// Half-width of the computational domain; 0 selects the automatic size.
    double half_width = 0.0;
    /// Disables the reaction sub-step (pure diffusion runs).
    bool reaction = true;
    /// Leading steps that use two backward-Euler half steps instead of
    /// Crank-Nicolson, damping the grid-scale modes of rough initial data.
    std::size_t startup_steps = 2;

    /// Largest admissible step: 0.2 / max(1, r).
    static double max_stable_dt(const CompetitionParams& p);

    /// Throws ConfigError on step-rule or range violations.
    void validate(const CompetitionParams& p) const;

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// u0 or v0: nothing, indicator of intervals, B exp(-q|x|), or a piecewise-linear
/// list of (x, value) samples (zero outside the sampled range).
struct ZeroInit {
    friend bool operator==(const ZeroInit&, const ZeroInit&) = default;
};
struct IndicatorInit {
    std::vector<std::pair<double, double>> intervals{{-1.0, 1.0}};
    double height = 1.0;
    friend bool operator==(const IndicatorInit&, const IndicatorInit&) = default;
};
struct ExponentialTailInit {
    double B = 1.0;
    double q = 1.0;
    friend bool operator==(const ExponentialTailInit&, const ExponentialTailInit&) = default;
};
struct SamplesInit {
    std::vector<double> x;
    std::vector<double> value;
    friend bool operator==(const SamplesInit&, const SamplesInit&) = default;
};
using SpeciesInit = std::variant<ZeroInit, IndicatorInit, ExponentialTailInit, SamplesInit>;

double evaluate_init(const SpeciesInit& init, double x);
/// Radius of the support (0 for exponential tails, which have none).
double support_radius(const SpeciesInit& init);

struct InitialData {
    SpeciesInit u = IndicatorInit{};
    SpeciesInit v = IndicatorInit{};

    void validate() const;
    FieldState sample(const Grid1D& grid) const;

    friend bool operator==(const InitialData&, const InitialData&) = default;
};

struct Observer {
    std::string name;
    std::function<double(const FieldState&, const Grid1D&)> evaluate;
};

struct SimulationTrace {
    CompetitionParams params;
    SolverConfig config;
    Grid1D grid{0.0, 1.0, 3};
    std::vector<FieldState> snapshots;
    std::vector<double> observed_times;
    std::vector<std::string> observer_names;
    std::vector<std::vector<double>> records;

    const std::vector<double>& record(const std::string& name) const;
    const FieldState& final_state() const { return snapshots.back(); }
    /// Stored snapshot whose time is closest to t.
    const FieldState& snapshot_near(double t) const;
};

enum class DiffusionScheme { crank_nicolson, backward_euler_halves };

/// Operator-split integrator: half reaction step (Heun), Crank-Nicolson
/// diffusion, half reaction step. One instance per run (holds scratch space).
class Solver {
public:
    Solver(const CompetitionParams& p, const SolverConfig& cfg, Grid1D grid);

    const Grid1D& grid() const noexcept { return grid_; }

    FieldState step(const FieldState& state,
                    DiffusionScheme scheme = DiffusionScheme::crank_nicolson);
    /// In-place variant used by `run`.
    void advance(FieldState& state, DiffusionScheme scheme = DiffusionScheme::crank_nicolson);

private:
    void react_half(FieldState& state) const;
    void diffuse(std::vector<double>& field, double diffusivity, DiffusionScheme scheme,
                 const TridiagonalFactor& implicit_part);
    void check_state(FieldState& state) const;

    CompetitionParams params_;
    SolverConfig cfg_;
    Grid1D grid_;
    // I - (dt/2) D L: the implicit half of Crank-Nicolson and also one
    // backward-Euler step of length dt/2.
    TridiagonalFactor implicit_u_, implicit_v_;
    std::vector<double> scratch_;
};

/// Grid satisfying x_max >= max(c_u, c_v) t_end + margin (+ initial support).
Grid1D solver_grid(const CompetitionParams& p, const SolverConfig& cfg, const InitialData& init);

SimulationTrace run(const CompetitionParams& p, const InitialData& init, const SolverConfig& cfg,
                    const std::vector<Observer>& observers = {});

/// Pulled-front speed of the discretized linear problem w_t = D w_xx + r w as
/// advanced by this scheme, and the decay rate that selects it. Tends to
/// (2 sqrt(D r), sqrt(r / D)) as dx, dt -> 0.
struct LinearSpreading {
    double speed;
    double rate;
};
LinearSpreading discrete_linear_spreading(double D, double r, double dx, double dt);

}  // namespace critwave
