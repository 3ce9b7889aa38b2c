#pragma once

namespace critwave {

/// Scaled complementary error function exp(x^2) erfc(x), finite for all x
/// where the product does not itself overflow (x > -26.5).
double erfcx(double x);

/// log(erfc(x)) without underflow for large positive x.
double log_erfc(double x);

/// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

}  // namespace critwave
