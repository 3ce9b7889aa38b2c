#include "critwave/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "critwave/errors.hpp"

namespace critwave {

namespace {

constexpr double bump_floor = 1e-14;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

double cubic_root_in_cell(std::span<const double> f, const Grid1D& grid, std::size_t i, double m) {
    // Lagrange cubic through four nodes around [x_i, x_{i+1}], clipped at the ends.
    const std::size_t n = f.size();
    const std::size_t first = std::min(i > 0 ? i - 1 : 0, n - 4);
    std::array<double, 4> xs, ys;
    for (std::size_t k = 0; k < 4; ++k) {
        xs[k] = grid.x(first + k);
        ys[k] = f[first + k] - m;
    }
    auto p = [&](double x) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            double term = ys[j];
            for (std::size_t k = 0; k < 4; ++k) {
                if (k != j) term *= (x - xs[k]) / (xs[j] - xs[k]);
            }
            sum += term;
        }
        return sum;
    };
    double lo = grid.x(i), hi = grid.x(i + 1);
    double flo = p(lo);
    if (sign_of(flo) == sign_of(p(hi))) {
        return lo + grid.dx() * (f[i] - m) / (f[i] - f[i + 1]);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = p(mid);
        if (sign_of(fm) == sign_of(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<std::size_t> window_indices(const std::vector<double>& times, FitWindow w) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] >= w.t_min && times[i] <= w.t_max) idx.push_back(i);
    }
    return idx;
}

}  // namespace

Crossings level_set(std::span<const double> field, const Grid1D& grid, double m) {
    if (!(m > 0.0 && m < 1.0)) throw ValidationError("level must lie in (0, 1)");
    if (field.size() != grid.size()) throw StructuralError("field size does not match the grid");
    Crossings out;
    std::size_t prev = field.size();  // last node with nonzero sign
    for (std::size_t i = 0; i < field.size(); ++i) {
        const int s = sign_of(field[i] - m);
        if (s == 0) continue;
        if (prev < field.size() && sign_of(field[prev] - m) != s) {
            if (i == prev + 1) {
                const double frac = (field[prev] - m) / (field[prev] - field[i]);
                out.positions.push_back(grid.x(prev) + frac * grid.dx());
            } else {
                out.positions.push_back(0.5 * (grid.x(prev + 1) + grid.x(i - 1)));
            }
        }
        prev = i;
    }
    return out;
}

Crossings level_set(const FieldState& state, const Grid1D& grid, Species species, double m) {
    return level_set(state.field(species), grid, m);
}

Observer front_observer(std::string name, Species species, double m) {
    return {std::move(name), [species, m](const FieldState& s, const Grid1D& g) {
                const auto c = level_set(s, g, species, m);
                return c.empty() ? std::numeric_limits<double>::quiet_NaN() : c.front();
            }};
}

Observer point_observer(std::string name, Species species, double x) {
    return {std::move(name), [species, x](const FieldState& s, const Grid1D& g) {
                return s.field(species)[g.nearest(x)];
            }};
}

FrontTrace front_trace(const SimulationTrace& trace, const std::string& record, double level) {
    const auto& values = trace.record(record);
    FrontTrace out;
    out.level = level;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isfinite(values[i])) {
            out.times.push_back(trace.observed_times[i]);
            out.positions.push_back(values[i]);
        }
    }
    return out;
}

FitResult least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw StructuralError("least squares: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw StructuralError("least squares needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw StructuralError("least squares: abscissae are all equal");
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.slope * x[i] + f.intercept);
        ss += e * e;
    }
    f.residual_norm = std::sqrt(ss / static_cast<double>(n));
    f.points = n;
    return f;
}

FitResult fit_speed(const FrontTrace& front, FitWindow window) {
    const auto idx = window_indices(front.times, window);
    if (idx.size() < 10) {
        std::ostringstream os;
        os << "fit_speed needs at least 10 points in the window, found " << idx.size();
        throw StructuralError(os.str());
    }
    std::vector<double> t, x;
    for (auto i : idx) {
        t.push_back(front.times[i]);
        x.push_back(front.positions[i]);
    }
    auto fit = least_squares(t, x);
    fit.t_min = t.front();
    fit.t_max = t.back();
    return fit;
}

FitResult fit_log_shift(const FrontTrace& front, double c, FitWindow window) {
    const auto idx = window_indices(front.times, window);
    std::vector<double> lt, y;
    double t_lo = 0.0, t_hi = 0.0;
    for (auto i : idx) {
        const double t = front.times[i];
        if (!(t > 0.0)) continue;
        if (lt.empty()) t_lo = t;
        t_hi = t;
        lt.push_back(std::log(t));
        y.push_back(front.positions[i] - c * t);
    }
    if (lt.size() < 3 || t_hi < 5.0 * t_lo) {
        throw StructuralError("fit_log_shift needs at least 3 points spanning t_max / t_min >= 5");
    }
    auto fit = least_squares(lt, y);
    fit.t_min = t_lo;
    fit.t_max = t_hi;
    return fit;
}

BumpTrace bump_trace(const SimulationTrace& trace, const std::string& u_record,
                     const std::string& v_record) {
    BumpTrace b;
    b.times = trace.observed_times;
    b.u0 = trace.record(u_record);
    for (double v : trace.record(v_record)) b.one_minus_v0.push_back(1.0 - v);
    return b;
}

BumpMetrics bump_metrics(const BumpTrace& bump, double d, double onset) {
    if (!(d > 0.0)) throw ValidationError("bump_metrics: d must be positive");
    if (bump.u0.size() != bump.times.size() || bump.one_minus_v0.size() != bump.times.size()) {
        throw StructuralError("bump trace series lengths differ");
    }
    BumpMetrics m;
    m.k_star = std::min(0.5 / d, 0.5 * d);

    auto collect = [&](const std::vector<double>& series, const char* name,
                       std::vector<double>& lt, std::vector<double>& ly, std::vector<double>& ts,
                       std::vector<double>& vs) {
        for (std::size_t i = 0; i < series.size(); ++i) {
            const double t = bump.times[i];
            if (t < onset) continue;
            if (series[i] < bump_floor) {
                std::ostringstream os;
                os << name << " fell below " << bump_floor << " at t = " << t
                   << "; window truncated";
                m.warnings.push_back(os.str());
                break;
            }
            lt.push_back(std::log(t));
            ly.push_back(std::log(series[i]));
            ts.push_back(t);
            vs.push_back(series[i]);
        }
        if (lt.size() < 2) {
            throw StructuralError(std::string("bump_metrics: too few usable samples of ") + name);
        }
        auto fit = least_squares(lt, ly);
        fit.t_min = ts.front();
        fit.t_max = ts.back();
        return fit;
    };

    std::vector<double> lt, ly, ts, us;
    m.u0 = collect(bump.u0, "u(t,0)", lt, ly, ts, us);
    m.c_low = std::numeric_limits<double>::infinity();
    double band_lo = std::numeric_limits<double>::infinity(), band_hi = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double s = us[i] * std::sqrt(ts[i]);
        m.c_low = std::min(m.c_low, s);
        m.c_high = std::max(m.c_high, us[i] * std::pow(ts[i], m.k_star));
        band_lo = std::min(band_lo, s);
        band_hi = std::max(band_hi, s);
    }
    m.sqrt_t_band = band_hi / band_lo;

    std::vector<double> lt2, ly2, ts2, vs2;
    m.one_minus_v0 = collect(bump.one_minus_v0, "1-v(t,0)", lt2, ly2, ts2, vs2);
    return m;
}

FitResult gaussian_factor_fit(const FieldState& state, const Grid1D& grid, Species species,
                              double radius_factor) {
    if (!(state.t > 0.0)) throw ValidationError("gaussian_factor_fit needs t > 0");
    const auto f = state.field(species);
    const double f0 = f[grid.nearest(0.0)];
    if (!(f0 > 0.0)) throw StructuralError("gaussian_factor_fit: field vanishes at x = 0");
    const double radius = radius_factor * std::sqrt(state.t);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        if (std::abs(x) > radius || !(f[i] > 0.0)) continue;
        xs.push_back(-x * x / (4.0 * state.t));
        ys.push_back(std::log(f[i]) - std::log(f0));
    }
    return least_squares(xs, ys);
}

double profile_distance(const FieldState& state, const Grid1D& grid, const KppWave& wave,
                        Species species) {
    const auto f = state.field(species);
    const auto crossings = level_set(f, grid, 0.5);
    if (crossings.empty()) throw StructuralError("profile_distance: no 1/2-level front");
    const double linear = crossings.front();
    auto cell = static_cast<std::size_t>(std::floor((linear - grid.x(0)) / grid.dx()));
    cell = std::min(cell, grid.size() - 2);
    const double front = (f[cell] - 0.5) * (f[cell + 1] - 0.5) <= 0.0
                             ? cubic_root_in_cell(f, grid, cell, 0.5)
                             : linear;
    const double shift = front - wave.position_of_level(0.5);
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        if (x < 0.0) continue;
        sup = std::max(sup, std::abs(f[i] - wave.value(x - shift)));
    }
    return sup;
}

const char* to_string(StrongWeakRegime regime) {
    switch (regime) {
        case StrongWeakRegime::llw: return "llw";
        case StrongWeakRegime::acceleration: return "acceleration";
        case StrongWeakRegime::undetermined: break;
    }
    return "undetermined";
}

double StrongWeakSpeeds::f(double c) const {
    const double c_min = 2.0 * std::sqrt(1.0 - a);
    if (!(c >= c_min)) {
        std::ostringstream os;
        os << "f(c) requires c >= 2 sqrt(1 - a) = " << c_min;
        throw ValidationError(os.str());
    }
    // c^2 - 4(1 - a) without cancellation on either side of c = 2; exact at c = 2
    const double disc = c >= 2.0 ? (c - 2.0) * (c + 2.0) + 4.0 * a : (c - c_min) * (c + c_min);
    return c + (2.0 * std::sqrt(a) - std::sqrt(disc));
}

double StrongWeakSpeeds::f_inverse(double y) const {
    const double sa = std::sqrt(a);
    const double y_max = 2.0 * (std::sqrt(1.0 - a) + sa);
    if (!(y > 2.0 * sa && y <= y_max * (1.0 + 1e-15))) {
        throw ValidationError("f_inverse requires 2 sqrt(a) < y <= 2 (sqrt(1 - a) + sqrt(a))");
    }
    // y/2 - sqrt(a) + 2(1 - a)/(y - 2 sqrt(a)), written as c_min + (s - c_min)^2 / (2 s)
    const double c_min = 2.0 * std::sqrt(1.0 - a);
    const double s = y - 2.0 * sa;
    return c_min + (s - c_min) * (s - c_min) / (2.0 * s);
}

StrongWeakSpeeds strongweak_speeds(double a, double d, double r,
                                   std::optional<double> c_llw_estimate) {
    if (!(a > 0.0 && a < 1.0)) throw ValidationError("strong-weak speeds require 0 < a < 1");
    if (!(d > 0.0) || !(r > 0.0)) throw ValidationError("strong-weak speeds require d, r > 0");
    StrongWeakSpeeds s;
    s.a = a;
    s.rd = r * d;
    const double srd = std::sqrt(s.rd), sa = std::sqrt(a);
    if (!(srd > sa)) throw ValidationError("c_nlp requires r d > a");
    s.c_nlp = srd - sa + (1.0 - a) / (srd - sa);
    if (!c_llw_estimate) return s;

    const double c = *c_llw_estimate;
    const double lo = 2.0 * std::sqrt(1.0 - a);
    if (!(s.rd > 1.0)) throw ValidationError("regime selection requires r d > 1");
    if (!(c >= lo && c <= 2.0)) {
        std::ostringstream os;
        os << "c_llw estimate " << c << " outside [2 sqrt(1 - a), 2] = [" << lo << ", 2]";
        throw ValidationError(os.str());
    }
    s.c_llw = c;
    if (2.0 * srd < s.f(c)) {
        s.regime = StrongWeakRegime::acceleration;
        s.selected = s.c_nlp;
    } else {
        s.regime = StrongWeakRegime::llw;
        s.selected = c;
    }
    return s;
}

}  // namespace critwave
