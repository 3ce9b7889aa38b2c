#include "critwave/phase_plane.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "critwave/errors.hpp"
#include "critwave/ode.hpp"

namespace critwave {

void TwParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in [0, 1]");
    if (alpha == beta) throw ValidationError("beta must differ from alpha");
    if (!std::isfinite(c)) throw ValidationError("c must be finite");
    if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError("d must be > 0");
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("r must be > 0");
}

TwState tw_field(const TwState& s, const TwParams& p) {
    const double gap = s.W - s.R;
    return {-s.P, -p.c * s.P - (p.alpha - s.W) * gap, s.Q,
            -(p.c / p.d) * s.Q - (p.r / p.d) * (s.R + 1.0 - p.alpha) * gap};
}

TwState target_state(const TwParams& p) {
    const double w = p.alpha - p.beta;
    return {w, 0.0, w, 0.0};
}

EquilibriumLinearization equilibrium_jacobian(double alpha, double c, double d, double r) {
    if (!(d > 0.0) || !(r > 0.0)) throw ValidationError("d and r must be > 0");
    EquilibriumLinearization lin;
    const double k = (r / d) * (1.0 - alpha);
    lin.J = {{{0.0, -1.0, 0.0, 0.0},
              {-alpha, -c, alpha, 0.0},
              {0.0, 0.0, 0.0, 1.0},
              {-k, 0.0, k, -c / d}}};
    Eigen::Matrix4d m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = lin.J[i][j];
    const Eigen::EigenSolver<Eigen::Matrix4d> es(m);
    for (int k2 = 0; k2 < 4; ++k2) {
        lin.eigenvalues[k2] = es.eigenvalues()(k2);
        for (int i = 0; i < 4; ++i) lin.eigenvectors[k2][i] = es.eigenvectors()(i, k2);
    }
    return lin;
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::span_end: return "span_end";
        case Termination::divergence: return "divergence";
        case Termination::target_reached: return "target_reached";
    }
    return "unknown";
}

std::string to_string(SearchLabel l) {
    switch (l) {
        case SearchLabel::nonexistent: return "nonexistent";
        case SearchLabel::no_candidate_found: return "no-candidate-found";
        case SearchLabel::candidate_found: return "candidate-found";
    }
    return "unknown";
}

namespace {

double distance(const TwState& a, const TwState& b) {
    return std::hypot(a.W - b.W, a.P - b.P, std::hypot(a.R - b.R, a.Q - b.Q));
}

double norm(const TwState& s) { return std::hypot(s.W, s.P, std::hypot(s.R, s.Q)); }

}  // namespace

Trajectory shoot(const TwParams& p, const TwState& init, double xi_start, double xi_end,
                 const ShootControls& ctl) {
    if (!(xi_end > xi_start)) throw ValidationError("shooting span must satisfy xi_end > xi_start");
    const auto a0 = init.array();
    if (!std::all_of(a0.begin(), a0.end(), [](double v) { return std::isfinite(v); })) {
        throw ValidationError("initial state must be finite");
    }
    const TwState target = target_state(p);
    Trajectory traj;
    ode::Controls oc;
    oc.rtol = ctl.rtol;
    oc.atol = ctl.atol;
    auto rhs = [&](double, const ode::State<4>& y) { return tw_field(TwState::from(y), p).array(); };
    auto observe = [&](double xi, const ode::State<4>& y) {
        const TwState s = TwState::from(y);
        traj.xi.push_back(xi);
        traj.states.push_back(s);
        if (!(norm(s) <= ctl.blowup)) {
            traj.reason = Termination::divergence;
            return ode::Verdict::stop;
        }
        if (ctl.target_radius > 0.0 && distance(s, target) < ctl.target_radius) {
            traj.reason = Termination::target_reached;
            return ode::Verdict::stop;
        }
        return ode::Verdict::proceed;
    };
    ode::integrate<4>(rhs, xi_start, a0, xi_end, oc, observe);
    return traj;
}

std::size_t sign_changes(const Trajectory& traj, double dead_band) {
    std::size_t count = 0;
    int last = 0;
    for (const auto& s : traj.states) {
        const double g = s.W - s.R;
        if (std::abs(g) < dead_band) continue;
        const int sign = g > 0.0 ? 1 : -1;
        if (last != 0 && sign != last) ++count;
        last = sign;
    }
    return count;
}

bool ultimately_monotone(const Trajectory& traj, double fraction) {
    if (traj.xi.empty()) return false;
    const double from = traj.xi.back() - fraction * (traj.xi.back() - traj.xi.front());
    for (std::size_t i = 0; i < traj.xi.size(); ++i) {
        if (traj.xi[i] < from) continue;
        // U' = P, V' = Q
        if (!(traj.states[i].P * traj.states[i].Q < 0.0)) return false;
    }
    return true;
}

bool within_wave_bounds(const Trajectory& traj, const TwParams& p) {
    for (const auto& s : traj.states) {
        const double u = p.alpha - s.W;
        const double v = s.R + 1.0 - p.alpha;
        if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) return false;
    }
    return true;
}

double connection_residual(const Trajectory& traj, const TwParams& p) {
    if (traj.xi.empty()) return std::numeric_limits<double>::infinity();
    const TwState target = target_state(p);
    const double from = 0.5 * (traj.xi.front() + traj.xi.back());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.xi.size(); ++i) {
        if (traj.xi[i] >= from) best = std::min(best, distance(traj.states[i], target));
    }
    return best;
}

std::vector<TwState> ensemble_starts(const TwParams& p, const SearchControls& ctl) {
    const auto lin = equilibrium_jacobian(p.alpha, p.c, p.d, p.r);
    std::vector<std::array<double, 4>> directions;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto lambda = lin.eigenvalues[k];
        if (!(lambda.real() > 1e-12)) continue;
        if (std::abs(lambda.imag()) <= 1e-12) {
            std::array<double, 4> e;
            for (int i = 0; i < 4; ++i) e[i] = lin.eigenvectors[k][i].real();
            directions.push_back(e);
        } else if (lambda.imag() > 0.0) {
            std::array<double, 4> re, im;
            for (int i = 0; i < 4; ++i) {
                re[i] = lin.eigenvectors[k][i].real();
                im[i] = lin.eigenvectors[k][i].imag();
            }
            directions.push_back(re);
            directions.push_back(im);
        }
    }
    if (directions.empty()) return {};

    std::mt19937_64 rng(ctl.seed);
    std::normal_distribution<double> normal;
    std::vector<TwState> starts;
    for (std::size_t n = 0; n < ctl.ensemble; ++n) {
        std::array<double, 4> dir{};
        for (const auto& e : directions) {
            const double a = normal(rng);
            for (int i = 0; i < 4; ++i) dir[i] += a * e[i];
        }
        std::array<double, 4> jitter;
        for (auto& j : jitter) j = normal(rng);
        const double along_kernel = 0.5 * (jitter[0] + jitter[2]);  // projection on (1,0,1,0)
        jitter[0] -= along_kernel;
        jitter[2] -= along_kernel;
        const double jn = std::hypot(jitter[0], jitter[1], std::hypot(jitter[2], jitter[3]));
        const double dn = std::hypot(dir[0], dir[1], std::hypot(dir[2], dir[3]));
        for (int i = 0; i < 4; ++i) dir[i] = dir[i] / dn + ctl.jitter * jitter[i] / jn;
        const double total = std::hypot(dir[0], dir[1], std::hypot(dir[2], dir[3]));
        for (auto& x : dir) x *= ctl.start_radius / total;
        starts.push_back(TwState::from(dir));
    }
    return starts;
}

SearchResult monotone_wave_search(const TwParams& p, const SearchControls& ctl) {
    p.validate();
    SearchResult res;
    if (p.c == 0.0) {
        res.label = SearchLabel::nonexistent;
        res.reason = "no standing wave exists (c = 0)";
        return res;
    }
    if (p.d == 1.0) {
        res.label = SearchLabel::nonexistent;
        res.reason = "no traveling wave exists when d = 1";
        return res;
    }
    const auto starts = ensemble_starts(p, ctl);
    if (starts.empty()) {
        res.reason = "empty unstable subspace at the origin";
        return res;
    }
    const auto lin = equilibrium_jacobian(p.alpha, p.c, p.d, p.r);
    for (const auto& l : lin.eigenvalues) res.unstable_dimension += l.real() > 1e-12 ? 1 : 0;

    struct Shot {
        Trajectory traj;
        double residual = std::numeric_limits<double>::infinity();
        bool qualified = false;
    };
    std::vector<Shot> shots(starts.size());
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < starts.size(); i += stride) {
            Shot& s = shots[i];
            try {
                s.traj = shoot(p, starts[i], 0.0, ctl.span, ctl.shoot);
            } catch (const StiffnessError&) {
                continue;
            }
            s.qualified = within_wave_bounds(s.traj, p) && ultimately_monotone(s.traj, 0.2);
            if (s.qualified) s.residual = connection_residual(s.traj, p);
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(ctl.jobs, starts.size()));
    if (jobs == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(work, j, jobs);
    }

    res.shots = shots.size();
    for (auto& s : shots) {
        if (!s.qualified) continue;
        ++res.qualified;
        if (s.residual < res.best_residual) {
            res.best_residual = s.residual;
            res.best = s.traj;
        }
    }
    if (res.best_residual < ctl.candidate_threshold) {
        res.label = SearchLabel::candidate_found;
        res.reason = "a monotone trajectory approaches the target equilibrium";
    } else {
        res.reason = res.qualified == 0 ? "no trajectory passed the bounds and monotonicity filters"
                                        : "qualified trajectories stay away from the target equilibrium";
    }
    return res;
}

}  // namespace critwave
