#include <cmath>
#include <numbers>

#include "critwave/analytic.hpp"
#include "critwave/errors.hpp"
#include "critwave/special.hpp"
#include "doctest.h"

using namespace critwave;

TEST_CASE("erfcx against high-precision values") {
    const std::pair<double, double> table[] = {
        {-3.0, 16205.988853999586625}, {-0.5, 1.9523604891825570933},
        {0.0, 1.0},                    {0.3, 0.73459933456765515237},
        {1.0, 0.42758357615580700441}, {3.9, 0.14031418160068970328},
        {4.0, 0.13699945762506138989}, {4.1, 0.13383411641865221245},
        {10.0, 0.056140992743822585858}, {30.0, 0.018795888861416751497},
        {300.0, 0.0018806214973780644895},
    };
    for (auto [x, expected] : table) {
        CAPTURE(x);
        CHECK(erfcx(x) == doctest::Approx(expected).epsilon(1e-13));
    }
    CHECK(log_erfc(30.0) == doctest::Approx(std::log(0.018795888861416751497) - 900.0).epsilon(1e-14));
    CHECK(log_add_exp(-1000.0, -1000.0) == doctest::Approx(-1000.0 + std::log(2.0)));
}

TEST_CASE("exponential-tail kernel matches direct convolution") {
    struct Row {
        double t, x;
        ExpTailKernel k;
        double expected;
    };
    const Row rows[] = {
        {1.0, 0.0, {1.0, 1.0, 1.0}, 0.42758357615580700441},
        {0.5, 2.0, {0.3, 0.7, 2.0}, 0.096315207917986097521},
        {10.0, -3.0, {1.0, 0.45, 1.0}, 0.28300837993501396942},
        {3.0, 25.0, {0.5, 0.2, 0.5}, 0.0035772991861572899163},
    };
    for (const auto& row : rows) {
        CAPTURE(row.t);
        CAPTURE(row.x);
        CHECK(exp_tail_heat(row.t, row.x, row.k) == doctest::Approx(row.expected).epsilon(1e-12));
        CHECK(log_exp_tail_heat(row.t, row.x, row.k) ==
              doctest::Approx(std::log(row.expected)).epsilon(1e-12));
    }
    CHECK(log_exp_tail_heat(1e4, 1000.0, {1.0, 0.3, 1.0}) ==
          doctest::Approx(-28.946027060905679737).epsilon(1e-12));
    CHECK(log_exp_tail_heat(100.0, 400.0, {1.0, 0.3, 1.0}) == doctest::Approx(-111.0).epsilon(1e-12));
}

TEST_CASE("kernels reduce to their initial data at t = 0") {
    const ExpTailKernel e{0.7, 0.4, 1.5};
    CHECK(exp_tail_heat(0.0, 2.0, e) == doctest::Approx(0.7 * std::exp(-0.8)));
    CHECK(exp_tail_heat(0.0, -2.0, e) == doctest::Approx(0.7 * std::exp(-0.8)));
    const IndicatorKernel f{0.5, 1.0};
    CHECK(indicator_heat(0.0, 0.3, f) == 0.5);
    CHECK(indicator_heat(0.0, 1.0, f) == 0.25);
    CHECK(indicator_heat(0.0, 1.5, f) == 0.0);
}

TEST_CASE("indicator kernel values and logarithms") {
    CHECK(indicator_heat(1.0, 0.0, {0.5, 1.0}) == doctest::Approx(0.26024993890652326884).epsilon(1e-13));
    CHECK(indicator_heat(4.0, 3.0, {0.5, 1.0}) == doctest::Approx(0.080550228784167082915).epsilon(1e-13));
    CHECK(indicator_heat(0.2, 1.0, {1.0, 2.0}) == doctest::Approx(0.94307580027869296362).epsilon(1e-13));
    CHECK(log_indicator_heat(1e6, 5000.0, {0.5, 1.0}) ==
          doctest::Approx(-14.423266444133732796).epsilon(1e-11));
    CHECK(log_indicator_heat(1e4, 1000.0, {0.5, 1.0}) ==
          doctest::Approx(-30.870274013605447448).epsilon(1e-11));
}

TEST_CASE("indicator kernel conserves mass") {
    const IndicatorKernel f{0.5, 1.0};
    for (double t : {0.1, 1.0, 10.0}) {
        double mass = 0.0;
        const double h = 0.005;
        for (double x = -60.0; x <= 60.0; x += h) mass += indicator_heat(t, x, f) * h;
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("analytic derivatives agree with finite differences") {
    const ExpTailKernel e{0.8, 0.35, 1.7};
    const IndicatorKernel f{0.5, 1.0};
    const double h = 1e-4;
    for (double t : {0.3, 2.0, 25.0}) {
        for (double x : {-4.0, 0.0, 0.7, 9.0}) {
            CAPTURE(t);
            CAPTURE(x);
            auto s = exp_tail_heat_sample(t, x, e);
            auto val = [&](double tt, double xx) { return exp_tail_heat(tt, xx, e); };
            CHECK(s.value == doctest::Approx(val(t, x)).epsilon(1e-14));
            CHECK(s.d_t == doctest::Approx((val(t + h, x) - val(t - h, x)) / (2 * h)).epsilon(1e-6));
            CHECK(s.d_x == doctest::Approx((val(t, x + h) - val(t, x - h)) / (2 * h)).epsilon(1e-6));
            CHECK(s.d_xx * e.D == doctest::Approx(s.d_t).epsilon(1e-12));
            // Li-Yau type bound for positive heat solutions
            CHECK(s.d_t >= -s.value / (2 * t) - 1e-14);

            auto g = indicator_heat_sample(t, x, f);
            auto ival = [&](double tt, double xx) { return indicator_heat(tt, xx, f); };
            CHECK(g.d_t == doctest::Approx((ival(t + h, x) - ival(t - h, x)) / (2 * h)).epsilon(1e-6));
            CHECK(g.d_x == doctest::Approx((ival(t, x + h) - ival(t, x - h)) / (2 * h)).epsilon(1e-6));
            CHECK(g.d_xx == doctest::Approx(g.d_t).epsilon(1e-12));
        }
    }
}

TEST_CASE("weight g") {
    CHECK(g_weight(0.0, {1.0}) == doctest::Approx(std::numbers::e));
    const WeightG w{0.1};
    const double h = 1e-5;
    for (double t : {0.0, 1.0, 50.0}) {
        const double fd = (g_weight(t + h, w) - g_weight(t - h > 0 ? t - h : t, w)) / (t > 0 ? 2 * h : h);
        CHECK(g_weight_derivative(t, w) == doctest::Approx(fd).epsilon(1e-4));
        CHECK(g_weight(t, w) > 1.0);
    }
}

TEST_CASE("decay rate of the KPP profile") {
    CHECK(kpp_decay_rate(1.0, 1.0, 2.0) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-14));
    CHECK(kpp_decay_rate(1.0, 0.75, 2.0) == doctest::Approx((std::sqrt(7.0) - 2.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("KPP profile is a monotone solution of the ODE") {
    struct Case {
        double d, r, c;
    };
    for (auto [d, r, c] : {Case{1.0, 1.0, 2.0}, Case{2.0, 2.0, 4.5}, Case{0.5, 3.0, 2.6}}) {
        CAPTURE(d);
        const auto w = kpp_profile(d, r, c);
        CHECK(w.value(0.0) == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(w.value(w.xi_min() - 5.0) > 1.0 - 1e-9);
        CHECK(w.value(w.xi_max() + 5.0) < 1e-8);
        double previous = 1.0;
        double worst = 0.0;
        for (double xi = w.xi_min(); xi <= w.xi_max(); xi += 0.01) {
            const auto s = w.sample(xi);
            CHECK(s.value <= previous);
            CHECK(s.d1 <= 0.0);
            previous = s.value;
            worst = std::max(worst, std::abs(d * s.d2 + c * s.d1 + r * s.value * (1 - s.value)));
            // finite-difference check of the interpolated derivatives
            const double h = 1e-4;
            const double fd2 = (w.value(xi + h) - 2 * s.value + w.value(xi - h)) / (h * h);
            const double fd1 = (w.value(xi + h) - w.value(xi - h)) / (2 * h);
            CHECK(std::abs(d * fd2 + c * fd1 + r * s.value * (1 - s.value)) < 1e-4);
        }
        CHECK(worst < 1e-6);
        // left tail: log(1 - V) has slope lambda
        const double a = w.xi_min() + 1.0, b = w.xi_min() + 3.0;
        const double slope = (std::log(w.one_minus(b)) - std::log(w.one_minus(a))) / (b - a);
        CHECK(slope == doctest::Approx(kpp_decay_rate(d, r, c)).epsilon(0.01));
        CHECK(w.lambda() == doctest::Approx(kpp_decay_rate(d, r, c)).epsilon(1e-14));
        CHECK(w.M() > 0.0);
        CHECK(w.position_of_level(0.5) == doctest::Approx(0.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(kpp_profile(1.0, 1.0, 1.9), NoMonotoneWave);
    CHECK_THROWS_AS(kpp_profile(2.0, 2.0, 3.9), NoMonotoneWave);
}

TEST_CASE("log-form samples agree with direct samples and survive underflow") {
    const ExpTailKernel e{0.8, 0.35, 1.7};
    const IndicatorKernel f{0.5, 1.0};
    for (double t : {0.3, 2.0, 25.0, 400.0}) {
        for (double x : {-40.0, -4.0, 0.0, 0.7, 9.0, 60.0}) {
            CAPTURE(t);
            CAPTURE(x);
            const auto direct = exp_tail_heat_sample(t, x, e);
            if (direct.value > 1e-200) {
                const auto ls = exp_tail_heat_log_sample(t, x, e);
                CHECK(std::exp(ls.log_value) == doctest::Approx(direct.value).epsilon(1e-12));
                CHECK(ls.rel_t * direct.value == doctest::Approx(direct.d_t).epsilon(1e-10).scale(1e-300));
                CHECK(ls.rel_x * direct.value == doctest::Approx(direct.d_x).epsilon(1e-10).scale(1e-300));
            }
            const auto fd = indicator_heat_sample(t, x, f);
            if (fd.value > 1e-200) {
                const auto ls = indicator_heat_log_sample(t, x, f);
                CHECK(std::exp(ls.log_value) == doctest::Approx(fd.value).epsilon(1e-12));
                CHECK(ls.rel_t * fd.value == doctest::Approx(fd.d_t).epsilon(1e-10).scale(1e-300));
                CHECK(ls.rel_x * fd.value == doctest::Approx(fd.d_x).epsilon(1e-10).scale(1e-300));
            }
        }
    }
    // deep tail, value ~ exp(-2500): logarithmic derivatives approach those of the Gaussian factor
    const double t = 100.0, x = 1000.0;
    const auto li = indicator_heat_log_sample(t, x, f);
    CHECK(std::isfinite(li.log_value));
    CHECK(li.rel_x == doctest::Approx(-x / (2.0 * t)).epsilon(2e-3));
    CHECK(li.rel_t == doctest::Approx(x * x / (4.0 * t * t)).epsilon(5e-3));
    const auto le = exp_tail_heat_log_sample(t, x, {1.0, 0.3, 1.0});
    CHECK(std::isfinite(le.log_value));
    CHECK(le.rel_x == doctest::Approx(-0.3).epsilon(1e-3));
}

TEST_CASE("kernel decay bounds for t >= 1") {
    const IndicatorKernel f{0.5, 1.0};
    const ExpTailKernel h{0.005, 1.5, 1.0};
    double c_value = 0.0, c_rate = 0.0;
    for (double t = 1.0; t < 1e5; t *= 1.5) {
        double sup_v = 0.0, sup_t = 0.0;
        for (double y = -6.0; y <= 6.0; y += 0.05) {
            const double x = y * std::sqrt(t);
            const auto a = indicator_heat_sample(t, x, f);
            const auto b = exp_tail_heat_sample(t, x, h);
            sup_v = std::max(sup_v, std::abs(a.value) + std::abs(b.value));
            sup_t = std::max(sup_t, std::abs(a.d_t) + std::abs(b.d_t));
        }
        c_value = std::max(c_value, sup_v * std::sqrt(t));
        c_rate = std::max(c_rate, sup_t * std::pow(t, 1.5));
    }
    // the mass-based constants: ||G(t)||_inf ||f0 + h0||_1 and ||G_t(t)||_inf ||f0 + h0||_1
    const double mass = 2.0 * f.B + 2.0 * h.B / h.q;
    CHECK(c_value <= mass / std::sqrt(4.0 * std::numbers::pi) * (1.0 + 1e-12));
    CHECK(c_rate <= mass / std::sqrt(4.0 * std::numbers::pi) * (1.0 + 1e-12));
}
