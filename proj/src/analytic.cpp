#include "critwave/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "critwave/errors.hpp"
#include "critwave/ode.hpp"
#include "critwave/special.hpp"

namespace critwave {

namespace {

constexpr double inv_sqrt_pi = 0.56418958354775628695;  // 1/sqrt(pi)

struct ExpTailTerms {
    // s = (B/2) (first + second); both terms carry the same sign convention as
    // the two integrals of the closed form (left and right half-lines).
    double first;
    double second;
    double gauss;  // exp(-x^2 / (4 D t))
};

ExpTailTerms exp_tail_terms(double t, double ax, const ExpTailKernel& k) {
    const double tau = k.D * t;
    const double sq = std::sqrt(tau);
    const double z1 = k.q * sq - ax / (2.0 * sq);
    const double z2 = k.q * sq + ax / (2.0 * sq);
    const double gauss = std::exp(-ax * ax / (4.0 * tau));
    ExpTailTerms out{};
    out.gauss = gauss;
    out.second = gauss == 0.0 ? 0.0 : gauss * erfcx(z2);
    if (z1 >= 0.0) {
        out.first = gauss == 0.0 ? 0.0 : gauss * erfcx(z1);
    } else {
        out.first = std::exp(k.q * k.q * tau - k.q * ax) * std::erfc(z1);
    }
    return out;
}

}  // namespace

void ExpTailKernel::validate() const {
    if (!(B > 0.0) || !(q > 0.0) || !(D > 0.0)) {
        throw ValidationError("exponential-tail kernel requires B > 0, q > 0 and D > 0");
    }
}

void IndicatorKernel::validate() const {
    if (!(B > 0.0) || !(half_width > 0.0)) {
        throw ValidationError("indicator kernel requires B > 0 and half_width > 0");
    }
}

double exp_tail_heat(double t, double x, const ExpTailKernel& k) {
    const double ax = std::abs(x);
    if (t <= 0.0) return k.B * std::exp(-k.q * ax);
    const auto terms = exp_tail_terms(t, ax, k);
    return 0.5 * k.B * (terms.first + terms.second);
}

PointSample exp_tail_heat_sample(double t, double x, const ExpTailKernel& k) {
    if (!(t > 0.0)) throw DomainError("exp_tail_heat_sample requires t > 0");
    const double ax = std::abs(x);
    const auto terms = exp_tail_terms(t, ax, k);
    PointSample s;
    s.value = 0.5 * k.B * (terms.first + terms.second);
    s.d_t = k.q * k.q * k.D * s.value -
            k.B * k.q * std::sqrt(k.D / (std::numbers::pi * t)) * terms.gauss;
    const double dx_abs = 0.5 * k.B * k.q * (terms.second - terms.first);
    s.d_x = x >= 0.0 ? dx_abs : -dx_abs;
    s.d_xx = s.d_t / k.D;
    return s;
}

double log_exp_tail_heat(double t, double x, const ExpTailKernel& k) {
    const double ax = std::abs(x);
    if (t <= 0.0) return std::log(k.B) - k.q * ax;
    const double tau = k.D * t;
    const double sq = std::sqrt(tau);
    const double z1 = k.q * sq - ax / (2.0 * sq);
    const double z2 = k.q * sq + ax / (2.0 * sq);
    const double log_half_b = std::log(0.5 * k.B);
    if (z1 >= 0.0) {
        return log_half_b - ax * ax / (4.0 * tau) + std::log(erfcx(z1) + erfcx(z2));
    }
    return log_half_b + k.q * k.q * tau - k.q * ax +
           std::log(std::erfc(z1) + std::exp(-z1 * z1) * erfcx(z2));
}

double indicator_heat(double t, double x, const IndicatorKernel& k) {
    const double ax = std::abs(x);
    if (t <= 0.0) {
        if (ax < k.half_width) return k.B;
        return ax == k.half_width ? 0.5 * k.B : 0.0;
    }
    const double s = 2.0 * std::sqrt(t);
    const double zp = (ax + k.half_width) / s;
    const double zm = (ax - k.half_width) / s;
    if (zm >= 0.0) {
        // erfc difference avoids the cancellation of erf(zp) - erf(zm) near 1
        return 0.5 * k.B * (std::erfc(zm) - std::erfc(zp));
    }
    return 0.5 * k.B * (std::erf(zp) - std::erf(zm));
}

PointSample indicator_heat_sample(double t, double x, const IndicatorKernel& k) {
    if (!(t > 0.0)) throw DomainError("indicator_heat_sample requires t > 0");
    PointSample s;
    s.value = indicator_heat(t, x, k);
    const double rt = std::sqrt(t);
    const double zp = (x + k.half_width) / (2.0 * rt);
    const double zm = (x - k.half_width) / (2.0 * rt);
    const double ep = std::exp(-zp * zp);
    const double em = std::exp(-zm * zm);
    s.d_t = k.B * inv_sqrt_pi / (2.0 * t) * (zm * em - zp * ep);
    s.d_x = k.B * inv_sqrt_pi / (2.0 * rt) * (ep - em);
    s.d_xx = s.d_t;
    return s;
}

double log_indicator_heat(double t, double x, const IndicatorKernel& k) {
    const double ax = std::abs(x);
    if (t <= 0.0) return std::log(indicator_heat(0.0, x, k));
    const double s = 2.0 * std::sqrt(t);
    const double zp = (ax + k.half_width) / s;
    const double zm = (ax - k.half_width) / s;
    if (zm < 5.0) return std::log(indicator_heat(t, x, k));
    return std::log(0.5 * k.B) - zm * zm +
           std::log(erfcx(zm) - std::exp(-ax * k.half_width / t) * erfcx(zp));
}

LogSample exp_tail_heat_log_sample(double t, double x, const ExpTailKernel& k) {
    if (!(t > 0.0)) throw DomainError("exp_tail_heat_log_sample requires t > 0");
    const double ax = std::abs(x);
    const double tau = k.D * t;
    const double sq = std::sqrt(tau);
    const double z1 = k.q * sq - ax / (2.0 * sq);
    const double z2 = k.q * sq + ax / (2.0 * sq);
    LogSample s;
    s.log_value = log_exp_tail_heat(t, x, k);
    s.rel_t = k.q * k.q * k.D - k.B * k.q * std::sqrt(k.D / (std::numbers::pi * t)) *
                                    std::exp(-ax * ax / (4.0 * tau) - s.log_value);
    // (T2 - T1) / (T2 + T1) with log T2 - log T1 = 2 q x + log erfc(z2) - log erfc(z1)
    const double log_ratio = 2.0 * k.q * ax + log_erfc(z2) - log_erfc(z1);
    const double rel_x_abs = k.q * std::tanh(0.5 * log_ratio);
    s.rel_x = x >= 0.0 ? rel_x_abs : -rel_x_abs;
    s.rel_xx = s.rel_t / k.D;
    return s;
}

LogSample indicator_heat_log_sample(double t, double x, const IndicatorKernel& k) {
    if (!(t > 0.0)) throw DomainError("indicator_heat_log_sample requires t > 0");
    const double rt = std::sqrt(t);
    const double zp = (x + k.half_width) / (2.0 * rt);
    const double zm = (x - k.half_width) / (2.0 * rt);
    LogSample s;
    s.log_value = log_indicator_heat(t, x, k);
    const double ep = std::exp(-zp * zp - s.log_value);
    const double em = std::exp(-zm * zm - s.log_value);
    s.rel_t = k.B * inv_sqrt_pi / (2.0 * t) * (zm * em - zp * ep);
    s.rel_x = k.B * inv_sqrt_pi / (2.0 * rt) * (ep - em);
    s.rel_xx = s.rel_t;
    return s;
}

double g_weight(double t, const WeightG& w) {
    return std::exp(1.0 / (w.delta * std::pow(1.0 + t, w.delta)));
}

double g_weight_derivative(double t, const WeightG& w) {
    return -std::pow(1.0 + t, -(1.0 + w.delta)) * g_weight(t, w);
}

double kpp_decay_rate(double d, double r_eff, double c) {
    if (!(d > 0.0) || !(r_eff > 0.0) || !(c > 0.0)) {
        throw ValidationError("kpp_decay_rate requires d, r_eff, c > 0");
    }
    // -c + sqrt(c^2 + 4 d r) rewritten to avoid cancellation when c^2 >> 4 d r
    return 2.0 * r_eff / (c + std::sqrt(c * c + 4.0 * d * r_eff));
}

namespace {

struct Hermite5 {
    double h;
    double y0, d0, s0;  // value, first and second derivative at the left node
    double y1, d1, s1;

    // Returns value, first and second derivative at local coordinate u in [0, 1].
    std::array<double, 3> eval(double u) const {
        const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
        const double H0 = 1 - 10 * u3 + 15 * u4 - 6 * u5;
        const double H1 = u - 6 * u3 + 8 * u4 - 3 * u5;
        const double H2 = 0.5 * (u2 - 3 * u3 + 3 * u4 - u5);
        const double H3 = 10 * u3 - 15 * u4 + 6 * u5;
        const double H4 = -4 * u3 + 7 * u4 - 3 * u5;
        const double H5 = 0.5 * (u3 - 2 * u4 + u5);

        const double dH0 = -30 * u2 + 60 * u3 - 30 * u4;
        const double dH1 = 1 - 18 * u2 + 32 * u3 - 15 * u4;
        const double dH2 = 0.5 * (2 * u - 9 * u2 + 12 * u3 - 5 * u4);
        const double dH3 = 30 * u2 - 60 * u3 + 30 * u4;
        const double dH4 = -12 * u2 + 28 * u3 - 15 * u4;
        const double dH5 = 0.5 * (3 * u2 - 8 * u3 + 5 * u4);

        const double ddH0 = -60 * u + 180 * u2 - 120 * u3;
        const double ddH1 = -36 * u + 96 * u2 - 60 * u3;
        const double ddH2 = 0.5 * (2 - 18 * u + 36 * u2 - 20 * u3);
        const double ddH3 = 60 * u - 180 * u2 + 120 * u3;
        const double ddH4 = -24 * u + 84 * u2 - 60 * u3;
        const double ddH5 = 0.5 * (6 * u - 24 * u2 + 20 * u3);

        const double hd0 = h * d0, hd1 = h * d1, hs0 = h * h * s0, hs1 = h * h * s1;
        const double v = y0 * H0 + hd0 * H1 + hs0 * H2 + y1 * H3 + hd1 * H4 + hs1 * H5;
        const double dv =
            (y0 * dH0 + hd0 * dH1 + hs0 * dH2 + y1 * dH3 + hd1 * dH4 + hs1 * dH5) / h;
        const double ddv = (y0 * ddH0 + hd0 * ddH1 + hs0 * ddH2 + y1 * ddH3 + hd1 * ddH4 +
                            hs1 * ddH5) /
                           (h * h);
        return {v, dv, ddv};
    }
};

}  // namespace

WaveSample KppWave::sample(double xi) const {
    // w = 1 - V satisfies d w'' = -c w' + r w (1 - w)
    auto w_second = [this](double w, double dw) { return (r_eff_ * w * (1.0 - w) - c_ * dw) / d_; };
    if (xi <= xi_.front()) {
        const double w = w_.front() * std::exp(lambda_ * (xi - xi_.front()));
        return {1.0 - w, w, -lambda_ * w, -lambda_ * lambda_ * w};
    }
    if (xi >= xi_.back()) {
        const double v_end = 1.0 - w_.back();
        const double v = v_end * std::exp(-right_rate_ * (xi - xi_.back()));
        return {v, 1.0 - v, -right_rate_ * v, right_rate_ * right_rate_ * v};
    }
    const auto it = std::upper_bound(xi_.begin(), xi_.end(), xi);
    const std::size_t i = static_cast<std::size_t>(it - xi_.begin()) - 1;
    const Hermite5 seg{xi_[i + 1] - xi_[i],
                       w_[i], dw_[i], w_second(w_[i], dw_[i]),
                       w_[i + 1], dw_[i + 1], w_second(w_[i + 1], dw_[i + 1])};
    const auto [w, dw, ddw] = seg.eval((xi - xi_[i]) / seg.h);
    return {1.0 - w, w, -dw, -ddw};
}

double KppWave::position_of_level(double level) const {
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
    const double target = 1.0 - level;  // in terms of w, which increases with xi
    if (target <= w_.front()) {
        return xi_.front() + std::log(target / w_.front()) / lambda_;
    }
    if (target >= w_.back()) {
        const double v_end = 1.0 - w_.back();
        return xi_.back() + std::log(v_end / level) / right_rate_;
    }
    const auto it = std::lower_bound(w_.begin(), w_.end(), target);
    std::size_t i = static_cast<std::size_t>(it - w_.begin());
    double lo = xi_[i - 1], hi = xi_[i];
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (sample(mid).one_minus < target) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

KppWave kpp_profile(double d, double r_eff, double c) {
    if (!(d > 0.0) || !(r_eff > 0.0)) throw ValidationError("kpp_profile requires d, r_eff > 0");
    const double c_min = 2.0 * std::sqrt(d * r_eff);
    // the minimal wave is requested as 2 sqrt(d r) computed elsewhere; allow rounding slack
    if (!(c >= c_min * (1.0 - 1e-12))) {
        throw NoMonotoneWave("no monotone KPP wave for c = " + std::to_string(c) +
                             " below the minimal speed " + std::to_string(c_min));
    }
    KppWave wave;
    wave.d_ = d;
    wave.r_eff_ = r_eff;
    wave.c_ = c;
    wave.lambda_ = kpp_decay_rate(d, r_eff, c);

    constexpr double w_start = 1e-10;
    constexpr double v_stop = 1e-8;
    ode::Controls ctl;
    ctl.rtol = 1e-12;
    ctl.atol = 1e-16;
    ctl.h_init = 1e-3;
    ctl.h_max = 0.05 * std::min(1.0, std::sqrt(d / r_eff));

    auto rhs = [d, r_eff, c](double, const ode::State<2>& y) -> ode::State<2> {
        return {y[1], (r_eff * y[0] * (1.0 - y[0]) - c * y[1]) / d};
    };
    std::vector<double> xs, ws, dws;
    bool overshoot = false;
    auto observe = [&](double xi, const ode::State<2>& y) {
        xs.push_back(xi);
        ws.push_back(y[0]);
        dws.push_back(y[1]);
        if (y[1] < 0.0 || y[0] > 1.0) {
            overshoot = true;
            return ode::Verdict::stop;
        }
        return 1.0 - y[0] < v_stop ? ode::Verdict::stop : ode::Verdict::proceed;
    };
    const double span = 400.0 / std::min(wave.lambda_, 1.0) + 4000.0;
    ode::integrate<2>(rhs, 0.0, ode::State<2>{w_start, wave.lambda_ * w_start}, span, ctl, observe);
    if (overshoot || 1.0 - ws.back() >= v_stop) {
        throw NoMonotoneWave("KPP shooting did not produce a monotone front for c = " +
                             std::to_string(c));
    }
    wave.xi_ = std::move(xs);
    wave.w_ = std::move(ws);
    wave.dw_ = std::move(dws);
    const double end_v = 1.0 - wave.w_.back();
    wave.right_rate_ = wave.dw_.back() / end_v;

    // normalize V(0) = 1/2
    const double shift = wave.position_of_level(0.5);
    for (double& x : wave.xi_) x -= shift;
    wave.M_ = wave.w_.front() * std::exp(-wave.lambda_ * wave.xi_.front());
    return wave;
}

}  // namespace critwave
