#include <cmath>
#include <random>

#include "critwave/diagnostics.hpp"
#include "critwave/errors.hpp"
#include "doctest.h"

using namespace critwave;

TEST_CASE("level sets by linear interpolation") {
    const Grid1D g(0.0, 10.0, 11);
    std::vector<double> ramp;
    for (std::size_t i = 0; i < g.size(); ++i) ramp.push_back(1.0 - g.x(i) / 10.0);
    auto c = level_set(ramp, g, 0.5);
    REQUIRE(c.count() == 1);
    CHECK(c.front() == doctest::Approx(5.0).epsilon(1e-15));
    c = level_set(ramp, g, 0.37);
    REQUIRE(c.count() == 1);
    CHECK(c.front() == doctest::Approx(6.3).epsilon(1e-14));

    CHECK(level_set(std::vector<double>(11, 0.3), g, 0.5).empty());

    std::vector<double> bumpy{0, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0};
    c = level_set(bumpy, g, 0.5);
    REQUIRE(c.count() == 4);
    CHECK(c.front() == doctest::Approx(4.5));
    CHECK_THROWS_AS(level_set(ramp, g, 1.0), ValidationError);
}

namespace {

FrontTrace synthetic(auto position, double t0, double t1, std::size_t n) {
    FrontTrace f;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 * std::pow(t1 / t0, static_cast<double>(i) / static_cast<double>(n - 1));
        f.times.push_back(t);
        f.positions.push_back(position(t));
    }
    return f;
}

}  // namespace

TEST_CASE("speed and log-shift fits are exact on noiseless fixtures") {
    auto linear = synthetic([](double t) { return 3.0 * t + 1.0; }, 10.0, 100.0, 40);
    auto fit = fit_speed(linear);
    CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(fit.residual_norm < 1e-12);
    CHECK(fit_log_shift(linear, 3.0).slope == doctest::Approx(0.0).epsilon(1e-12));

    auto bramson = synthetic([](double t) { return 4.0 * t - 1.5 * std::log(t) + 2.0; }, 100.0, 1000.0, 40);
    fit = fit_log_shift(bramson, 4.0, {100.0, 1000.0});
    CHECK(fit.slope == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.t_min == doctest::Approx(100.0));
    CHECK(fit.t_max == doctest::Approx(1000.0));
}

TEST_CASE("fits are stable under small additive noise") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> noise(-1e-3, 1e-3);
    auto linear = synthetic([&](double t) { return 3.0 * t + 1.0 + noise(rng); }, 10.0, 100.0, 60);
    CHECK(std::abs(fit_speed(linear).slope - 3.0) < 1e-2);
    auto bramson =
        synthetic([&](double t) { return 4.0 * t - 1.5 * std::log(t) + noise(rng); }, 100.0, 1000.0, 60);
    CHECK(std::abs(fit_log_shift(bramson, 4.0).slope + 1.5) < 1e-2);
}

TEST_CASE("fit preconditions") {
    auto few = synthetic([](double t) { return t; }, 1.0, 2.0, 9);
    CHECK_THROWS_AS(fit_speed(few), StructuralError);
    auto narrow = synthetic([](double t) { return t; }, 100.0, 400.0, 30);
    CHECK_THROWS_AS(fit_log_shift(narrow, 1.0), StructuralError);
}

TEST_CASE("bump metrics on synthetic power laws") {
    BumpTrace b;
    for (double t = 10.0; t <= 400.0; t += 10.0) {
        b.times.push_back(t);
        b.u0.push_back(0.7 / std::sqrt(t));
        b.one_minus_v0.push_back(0.3 * std::pow(t, -0.25));
    }
    const auto m = bump_metrics(b, 2.0);
    CHECK(m.u0.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(m.one_minus_v0.slope == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(m.u0.t_min == 50.0);
    CHECK(m.k_star == 0.25);
    CHECK(m.c_low == doctest::Approx(0.7));
    CHECK(m.sqrt_t_band == doctest::Approx(1.0));
    CHECK(m.warnings.empty());

    b.u0.back() = 1e-20;
    const auto truncated = bump_metrics(b, 2.0);
    CHECK(truncated.warnings.size() == 1);
    CHECK(truncated.u0.t_max == 390.0);
}

TEST_CASE("gaussian factor fit recovers the diffusivity") {
    const Grid1D g(-50.0, 50.0, 1001);
    FieldState s;
    s.t = 100.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.x(i);
        s.u.push_back(0.01 * std::exp(-x * x / (4.0 * 2.0 * s.t)));
        s.v.push_back(1.0);
    }
    CHECK(gaussian_factor_fit(s, g, Species::u).slope == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("profile distance is shift invariant") {
    const auto wave = kpp_profile(1.0, 4.0, 4.0);
    const Grid1D g(-40.0, 80.0, 12001);
    for (double shift : {0.0, 7.3}) {
        FieldState s;
        for (std::size_t i = 0; i < g.size(); ++i) {
            s.v.push_back(wave.value(g.x(i) - shift));
            s.u.push_back(0.0);
        }
        CAPTURE(shift);
        CHECK(profile_distance(s, g, wave, Species::v) < 1e-6);
    }
    FieldState empty{0.0, std::vector<double>(g.size(), 0.0), std::vector<double>(g.size(), 0.0)};
    CHECK_THROWS_AS(profile_distance(empty, g, wave, Species::v), StructuralError);
}

TEST_CASE("strong-weak speed formulas") {
    for (double a : {0.05, 0.25, 0.5, 0.81, 0.99}) {
        const auto s = strongweak_speeds(a, 2.0, 1.0);
        CHECK(s.f(2.0) == 2.0);
        double previous = s.f(2.0 * std::sqrt(1.0 - a));
        for (double c = 2.0 * std::sqrt(1.0 - a) + 0.01; c < 6.0; c += 0.01) {
            const double v = s.f(c);
            CHECK(v < previous);
            previous = v;
        }
        const double y_max = 2.0 * (std::sqrt(1.0 - a) + std::sqrt(a));
        for (int k = 1; k <= 20; ++k) {
            const double y = 2.0 * std::sqrt(a) + (y_max - 2.0 * std::sqrt(a)) * k / 20.0;
            CHECK(s.f(s.f_inverse(y)) == doctest::Approx(y).epsilon(1e-12));
        }
    }
    CHECK(strongweak_speeds(0.25, 1.5, 1.5).c_nlp == 1.75);
    CHECK(strongweak_speeds(0.5, 1.0, 1.0).c_nlp == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(strongweak_speeds(1.0, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(strongweak_speeds(0.5, 1.0, 1.0).f(1.0), ValidationError);
}

TEST_CASE("strong-weak regime selection") {
    // f(c_llw) for c_llw = 2 sqrt(1 - a) is 2 sqrt(a) + 2 sqrt(1 - a)
    const double a = 0.25;
    auto s = strongweak_speeds(a, 1.1, 1.1, 2.0 * std::sqrt(1.0 - a));
    CHECK(s.regime == StrongWeakRegime::acceleration);
    CHECK(*s.selected == s.c_nlp);
    CHECK(s.c_nlp > *s.c_llw);
    CHECK(s.c_nlp < 2.0);
    s = strongweak_speeds(a, 2.0, 2.0, 1.9);
    CHECK(s.regime == StrongWeakRegime::llw);
    CHECK(*s.selected == 1.9);
    CHECK_THROWS_AS(strongweak_speeds(a, 1.0, 0.5, 1.9), ValidationError);
    CHECK_THROWS_AS(strongweak_speeds(a, 2.0, 2.0, 2.5), ValidationError);
}
