#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>

#include "critwave/errors.hpp"

namespace critwave::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Controls {
    double rtol = 1e-9;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_max = std::numeric_limits<double>::infinity();
    double h_min = 1e-12;
    std::size_t max_steps = 2'000'000;
};

/// What the step observer asks the integrator to do next.
enum class Verdict { proceed, stop };

/// Dormand-Prince 5(4) with PI-free classical step control. Integrates from
/// `t0` towards `t1` (either direction). `observe(t, y)` is called on the
/// initial point and after every accepted step; returning Verdict::stop ends
/// the integration early. Returns the final (t, y).
template <std::size_t N, typename Rhs, typename Observe>
std::pair<double, State<N>> integrate(Rhs&& rhs, double t0, const State<N>& y0, double t1,
                                      const Controls& ctl, Observe&& observe) {
    // Butcher tableau
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double dir = t1 >= t0 ? 1.0 : -1.0;
    double t = t0;
    State<N> y = y0;
    if (observe(t, y) == Verdict::stop || t0 == t1) return {t, y};

    double h = std::min(std::abs(ctl.h_init), ctl.h_max);
    State<N> k1 = rhs(t, y);
    State<N> k2, k3, k4, k5, k6, k7, tmp, y_new;

    for (std::size_t step = 0; step < ctl.max_steps; ++step) {
        const double remaining = std::abs(t1 - t);
        bool last = false;
        if (h >= remaining) {
            h = remaining;
            last = true;
        }
        const double hs = dir * h;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
        k2 = rhs(t + c2 * hs, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        k3 = rhs(t + c3 * hs, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs(t + c4 * hs, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs(t + c5 * hs, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        k6 = rhs(t + hs, tmp);
        for (std::size_t i = 0; i < N; ++i)
            y_new[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                    b6 * k6[i]);
        k7 = rhs(t + hs, y_new);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            const double scale = ctl.atol + ctl.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            err = std::max(err, std::abs(e) / scale);
        }
        if (!std::isfinite(err)) err = 1e10;

        if (err <= 1.0) {
            t = last ? t1 : t + hs;
            y = y_new;
            k1 = k7;  // FSAL
            if (observe(t, y) == Verdict::stop || last) return {t, y};
        }
        const double factor =
            err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h = std::min(h * factor, ctl.h_max);
        if (h < ctl.h_min) {
            throw StiffnessError("step size underflow at t = " + std::to_string(t), t);
        }
    }
    throw StiffnessError("maximum number of steps exceeded at t = " + std::to_string(t), t);
}

}  // namespace critwave::ode
