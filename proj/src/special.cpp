#include "critwave/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace critwave {

namespace {

// Continued fraction for x >= 4:
//   erfcx(x) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + 2/(x + ...)))))
// evaluated bottom-up with a fixed depth that is ample for x >= 4.
double erfcx_continued_fraction(double x) {
    double tail = x;
    for (int k = 60; k >= 1; --k) tail = x + 0.5 * k / tail;
    return 1.0 / (std::sqrt(std::numbers::pi) * tail);
}

}  // namespace

double erfcx(double x) {
    if (x < 4.0) {
        if (x < -26.0) return std::numeric_limits<double>::infinity();
        return std::exp(x * x) * std::erfc(x);
    }
    return erfcx_continued_fraction(x);
}

double log_erfc(double x) {
    if (x < 4.0) return std::log(std::erfc(x));
    return std::log(erfcx_continued_fraction(x)) - x * x;
}

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace critwave
