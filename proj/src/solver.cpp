#include "critwave/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "critwave/errors.hpp"

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace critwave {

namespace {

constexpr double clamp_tolerance = 1e-12;
constexpr double boundary_front_level = 1e-4;
constexpr std::size_t boundary_band = 10;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

TridiagonalFactor diffusion_factor(const Grid1D& grid, Boundary boundary, double mu_implicit) {
    const std::size_t n = grid.size();
    std::vector<double> lower(n, -mu_implicit), diag(n, 1.0 + 2.0 * mu_implicit),
        upper(n, -mu_implicit);
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
    if (boundary == Boundary::no_flux) {
        upper[0] = -2.0 * mu_implicit;
        lower[n - 1] = -2.0 * mu_implicit;
    } else {
        diag[0] = diag[n - 1] = 1.0;
        upper[0] = lower[n - 1] = 0.0;
    }
    return TridiagonalFactor(std::move(lower), std::move(diag), std::move(upper));
}

void check_species(const SpeciesInit& init, const char* name) {
    std::visit(overloaded{
                   [](const ZeroInit&) {},
                   [name](const IndicatorInit& ind) {
                       if (!(ind.height >= 0.0 && ind.height <= 1.0)) {
                           throw ValidationError(std::string(name) +
                                                 ": indicator height must lie in [0, 1]");
                       }
                       for (auto [lo, hi] : ind.intervals) {
                           if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
                               throw ValidationError(std::string(name) +
                                                     ": indicator intervals need lo < hi");
                           }
                       }
                   },
                   [name](const ExponentialTailInit& e) {
                       if (!(e.B > 0.0 && e.B <= 1.0) || !(e.q > 0.0)) {
                           throw ValidationError(std::string(name) +
                                                 ": exponential tail needs 0 < B <= 1, q > 0");
                       }
                   },
                   [name](const SamplesInit& s) {
                       if (s.x.size() != s.value.size() || s.x.size() < 2) {
                           throw ValidationError(std::string(name) +
                                                 ": samples need matching x/value lists (>= 2)");
                       }
                       for (std::size_t i = 0; i < s.x.size(); ++i) {
                           if (i > 0 && !(s.x[i] > s.x[i - 1])) {
                               throw ValidationError(std::string(name) +
                                                     ": sample positions must increase");
                           }
                           if (!(s.value[i] >= 0.0 && s.value[i] <= 1.0)) {
                               throw ValidationError(std::string(name) +
                                                     ": sample values must lie in [0, 1]");
                           }
                       }
                   },
               },
               init);
}

}  // namespace

double SolverConfig::max_stable_dt(const CompetitionParams& p) {
    return 0.2 / std::max(1.0, p.r);
}

void SolverConfig::validate(const CompetitionParams& p) const {
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(t_end > 0.0)) throw ConfigError("t_end must be > 0");
    if (!(dx > 0.0)) throw ConfigError("dx must be > 0");
    if (snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
    if (field_stride < 1) throw ConfigError("field_stride must be >= 1");
    if (!(domain_margin >= 0.0)) throw ConfigError("domain_margin must be >= 0");
    if (!(half_width >= 0.0)) throw ConfigError("half_width must be >= 0");
    const double limit = max_stable_dt(p);
    if (reaction && dt > limit * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "dt = " << dt << " violates the stability rule dt <= 0.2/max(1, r) = " << limit;
        throw ConfigError(os.str());
    }
}

double evaluate_init(const SpeciesInit& init, double x) {
    return std::visit(
        overloaded{
            [](const ZeroInit&) { return 0.0; },
            [x](const IndicatorInit& ind) {
                double value = 0.0;
                for (auto [lo, hi] : ind.intervals) {
                    if (x > lo && x < hi) return ind.height;
                    if (x == lo || x == hi) value = 0.5 * ind.height;
                }
                return value;
            },
            [x](const ExponentialTailInit& e) { return e.B * std::exp(-e.q * std::abs(x)); },
            [x](const SamplesInit& s) {
                if (x < s.x.front() || x > s.x.back()) return 0.0;
                const auto it = std::upper_bound(s.x.begin(), s.x.end(), x);
                if (it == s.x.end()) return s.value.back();
                const std::size_t i = static_cast<std::size_t>(it - s.x.begin());
                const double w = (x - s.x[i - 1]) / (s.x[i] - s.x[i - 1]);
                return (1.0 - w) * s.value[i - 1] + w * s.value[i];
            },
        },
        init);
}

double support_radius(const SpeciesInit& init) {
    return std::visit(overloaded{
                          [](const ZeroInit&) { return 0.0; },
                          [](const IndicatorInit& ind) {
                              double r = 0.0;
                              for (auto [lo, hi] : ind.intervals) {
                                  r = std::max({r, std::abs(lo), std::abs(hi)});
                              }
                              return r;
                          },
                          [](const ExponentialTailInit&) { return 0.0; },
                          [](const SamplesInit& s) {
                              return std::max(std::abs(s.x.front()), std::abs(s.x.back()));
                          },
                      },
                      init);
}

void InitialData::validate() const {
    check_species(u, "u0");
    check_species(v, "v0");
}

FieldState InitialData::sample(const Grid1D& grid) const {
    FieldState s;
    s.t = 0.0;
    s.u.resize(grid.size());
    s.v.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        s.u[i] = evaluate_init(u, grid.x(i));
        s.v[i] = evaluate_init(v, grid.x(i));
    }
    return s;
}

const std::vector<double>& SimulationTrace::record(const std::string& name) const {
    for (std::size_t i = 0; i < observer_names.size(); ++i) {
        if (observer_names[i] == name) return records[i];
    }
    throw StructuralError("no observer named '" + name + "' in trace");
}

const FieldState& SimulationTrace::snapshot_near(double t) const {
    if (snapshots.empty()) throw StructuralError("trace holds no snapshots");
    auto best = snapshots.begin();
    for (auto it = snapshots.begin(); it != snapshots.end(); ++it) {
        if (std::abs(it->t - t) < std::abs(best->t - t)) best = it;
    }
    return *best;
}

Solver::Solver(const CompetitionParams& p, const SolverConfig& cfg, Grid1D grid)
    : params_(p), cfg_(cfg), grid_(std::move(grid)) {
    p.validate();
    cfg.validate(p);
    const double inv_dx2 = 1.0 / (grid_.dx() * grid_.dx());
    const double mu_u = cfg_.dt * inv_dx2;
    const double mu_v = p.d * cfg_.dt * inv_dx2;
    implicit_u_ = diffusion_factor(grid_, cfg_.boundary, 0.5 * mu_u);
    implicit_v_ = diffusion_factor(grid_, cfg_.boundary, 0.5 * mu_v);
    scratch_.resize(grid_.size());
}

void Solver::react_half(FieldState& s) const {
    const double h = 0.5 * cfg_.dt;
    const std::size_t n = s.u.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double u0 = s.u[i], v0 = s.v[i];
        const auto k1 = reaction_rhs(u0, v0, params_);
        const double u1 = u0 + h * k1.du, v1 = v0 + h * k1.dv;
        const auto k2 = reaction_rhs(u1, v1, params_);
        s.u[i] = u0 + 0.5 * h * (k1.du + k2.du);
        s.v[i] = v0 + 0.5 * h * (k1.dv + k2.dv);
    }
}

void Solver::diffuse(std::vector<double>& f, double diffusivity, DiffusionScheme scheme,
                     const TridiagonalFactor& implicit_part) {
    const std::size_t n = f.size();
    if (scheme == DiffusionScheme::backward_euler_halves) {
        implicit_part.solve(f);
        if (cfg_.boundary == Boundary::absorbing) f[0] = f[n - 1] = 0.0;
        implicit_part.solve(f);
        if (cfg_.boundary == Boundary::absorbing) f[0] = f[n - 1] = 0.0;
        return;
    }
    const double half_mu = 0.5 * diffusivity * cfg_.dt / (grid_.dx() * grid_.dx());
    auto& rhs = scratch_;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        rhs[i] = f[i] + half_mu * (f[i - 1] - 2.0 * f[i] + f[i + 1]);
    }
    if (cfg_.boundary == Boundary::no_flux) {
        rhs[0] = f[0] + half_mu * 2.0 * (f[1] - f[0]);
        rhs[n - 1] = f[n - 1] + half_mu * 2.0 * (f[n - 2] - f[n - 1]);
    } else {
        rhs[0] = rhs[n - 1] = 0.0;
    }
    implicit_part.solve(rhs);
    f.swap(rhs);
}

void Solver::check_state(FieldState& s) const {
    auto check = [&](std::vector<double>& f, const char* name) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            double& value = f[i];
            if (!std::isfinite(value)) {
                std::ostringstream os;
                os << "non-finite " << name << " at x = " << grid_.x(i) << ", t = " << s.t;
                throw NumericalBlowup(os.str(), s.t);
            }
            if (value < 0.0 || value > 1.0) {
                const double excess = value < 0.0 ? -value : value - 1.0;
                if (excess > clamp_tolerance) {
                    std::ostringstream os;
                    os.precision(17);
                    os << name << " = " << value << " leaves [0, 1] beyond the clamp tolerance at x = "
                       << grid_.x(i) << ", t = " << s.t;
                    throw NumericalBlowup(os.str(), s.t);
                }
                value = std::clamp(value, 0.0, 1.0);
            }
            // subnormals carry no information here and slow every later step
            if (value < std::numeric_limits<double>::min()) value = 0.0;
        }
    };
    check(s.u, "u");
    check(s.v, "v");
}

void Solver::advance(FieldState& s, DiffusionScheme scheme) {
    s.check_shape(grid_);
    if (cfg_.reaction) react_half(s);
    diffuse(s.u, 1.0, scheme, implicit_u_);
    diffuse(s.v, params_.d, scheme, implicit_v_);
    if (cfg_.reaction) react_half(s);
    s.t += cfg_.dt;
    check_state(s);
}

FieldState Solver::step(const FieldState& state, DiffusionScheme scheme) {
    FieldState next = state;
    advance(next, scheme);
    return next;
}

Grid1D solver_grid(const CompetitionParams& p, const SolverConfig& cfg, const InitialData& init) {
    cfg.validate(p);
    double half = cfg.half_width;
    if (half == 0.0) {
        const auto speeds = wave_speeds(p);
        const double c = cfg.reaction ? std::max(speeds.c_u, speeds.c_v) : 0.0;
        half = c * cfg.t_end + cfg.domain_margin +
               std::max(support_radius(init.u), support_radius(init.v));
        half = std::max(half, 10.0 * cfg.dx + 1.0);
    }
    return Grid1D::symmetric(half, cfg.dx);
}

namespace {

// Far-field tails decay through the subnormal range, where x86 arithmetic is
// an order of magnitude slower. Flush them for the duration of a run.
class FlushSubnormals {
public:
#if defined(__SSE2__)
    FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
    ~FlushSubnormals() { _mm_setcsr(saved_); }

private:
    unsigned saved_;
#endif
};

// A front has reached the boundary once the field there departs from its
// initial value (0 for compact data, 1 for a resident species).
void check_boundary_clearance(const FieldState& s, const FieldState& initial, const Grid1D& grid) {
    const std::size_t n = grid.size();
    const std::size_t band = std::min(boundary_band, n / 2);
    for (Species sp : {Species::u, Species::v}) {
        const auto f = s.field(sp);
        const auto f0 = initial.field(sp);
        for (std::size_t k = 0; k < band; ++k) {
            if (std::abs(f[k] - f0[k]) > boundary_front_level ||
                std::abs(f[n - 1 - k] - f0[n - 1 - k]) > boundary_front_level) {
                std::ostringstream os;
                os << (sp == Species::u ? "u" : "v") << " front within " << boundary_band
                   << " cells of the domain boundary at t = " << s.t
                   << "; enlarge half_width or domain_margin";
                throw DomainTooSmall(os.str());
            }
        }
    }
}

}  // namespace

SimulationTrace run(const CompetitionParams& p, const InitialData& init, const SolverConfig& cfg,
                    const std::vector<Observer>& observers) {
    p.validate();
    init.validate();
    SimulationTrace trace;
    trace.params = p;
    trace.config = cfg;
    trace.grid = solver_grid(p, cfg, init);
    Solver solver(p, cfg, trace.grid);
    const FlushSubnormals flush;

    for (const auto& o : observers) trace.observer_names.push_back(o.name);
    trace.records.resize(observers.size());

    FieldState state = init.sample(trace.grid);
    const FieldState initial = state;
    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(cfg.t_end / cfg.dt - 1e-9)));
    std::size_t observation = 0;
    auto observe = [&](bool last) {
        trace.observed_times.push_back(state.t);
        for (std::size_t i = 0; i < observers.size(); ++i) {
            trace.records[i].push_back(observers[i].evaluate(state, trace.grid));
        }
        if (observation % cfg.field_stride == 0 || last) trace.snapshots.push_back(state);
        ++observation;
    };
    observe(steps == 0);
    for (std::size_t k = 1; k <= steps; ++k) {
        const auto scheme = k <= cfg.startup_steps ? DiffusionScheme::backward_euler_halves
                                                   : DiffusionScheme::crank_nicolson;
        solver.advance(state, scheme);
        state.t = static_cast<double>(k) * cfg.dt;  // no accumulated round-off in t
        const bool last = k == steps;
        if (k % cfg.snapshot_stride == 0 || last) {
            if (cfg.boundary == Boundary::no_flux) check_boundary_clearance(state, initial, trace.grid);
            observe(last);
        }
    }
    return trace;
}

LinearSpreading discrete_linear_spreading(double D, double r, double dx, double dt) {
    if (!(D > 0.0) || !(r > 0.0) || !(dx > 0.0) || !(dt > 0.0)) {
        throw ValidationError("discrete_linear_spreading requires positive arguments");
    }
    const double z = 0.5 * r * dt;
    const double heun = 1.0 + z + 0.5 * z * z;
    const double log_reaction = 2.0 * std::log(heun);
    auto speed = [&](double lam) {
        const double lap = (2.0 * std::cosh(lam * dx) - 2.0) / (dx * dx);
        const double a = 0.5 * dt * D * lap;
        if (a >= 1.0) return std::numeric_limits<double>::infinity();
        return (log_reaction + std::log((1.0 + a) / (1.0 - a))) / (lam * dt);
    };
    // coarse scan then golden-section refinement of the convex minimum
    const double lam0 = std::sqrt(r / D);
    double best = lam0, best_speed = speed(lam0);
    for (double lam = 0.05 * lam0; lam < 5.0 * lam0; lam += 0.01 * lam0) {
        const double s = speed(lam);
        if (s < best_speed) {
            best_speed = s;
            best = lam;
        }
    }
    double lo = best - 0.01 * lam0, hi = best + 0.01 * lam0;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = speed(x1), f2 = speed(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * lam0; ++it) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - g * (hi - lo); f1 = speed(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + g * (hi - lo); f2 = speed(x2);
        }
    }
    const double lam = 0.5 * (lo + hi);
    return {speed(lam), lam};
}

}  // namespace critwave
