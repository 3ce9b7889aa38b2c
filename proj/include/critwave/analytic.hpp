#pragma once

#include <cstddef>
#include <vector>

namespace critwave {

/// Heat-equation solution from B exp(-q |x|) with diffusivity D.
struct ExpTailKernel {
    double B = 1.0;
    double q = 1.0;
    double D = 1.0;

    void validate() const;
};

/// Heat-equation solution (diffusivity 1) from B * 1_{(-w, w)}.
struct IndicatorKernel {
    double B = 0.5;
    double half_width = 1.0;

    void validate() const;
};

/// g(t) = exp(1 / (delta (1 + t)^delta)).
struct WeightG {
    double delta = 0.1;
};

/// Value and analytic derivatives of a closed-form field at one point.
struct PointSample {
    double value = 0.0;
    double d_t = 0.0;
    double d_x = 0.0;
    double d_xx = 0.0;
};

double exp_tail_heat(double t, double x, const ExpTailKernel& k);
/// Requires t > 0.
PointSample exp_tail_heat_sample(double t, double x, const ExpTailKernel& k);
/// Natural log of exp_tail_heat, finite where the value itself would underflow.
double log_exp_tail_heat(double t, double x, const ExpTailKernel& k);

double indicator_heat(double t, double x, const IndicatorKernel& k);
/// Requires t > 0.
PointSample indicator_heat_sample(double t, double x, const IndicatorKernel& k);
double log_indicator_heat(double t, double x, const IndicatorKernel& k);

/// A positive kernel sample in logarithmic form: value = exp(log_value), and
/// each derivative divided by the value. Stays finite where the value underflows.
struct LogSample {
    double log_value = 0.0;
    double rel_t = 0.0;
    double rel_x = 0.0;
    double rel_xx = 0.0;
};

/// Requires t > 0.
LogSample exp_tail_heat_log_sample(double t, double x, const ExpTailKernel& k);
/// Requires t > 0.
LogSample indicator_heat_log_sample(double t, double x, const IndicatorKernel& k);

double g_weight(double t, const WeightG& w);
double g_weight_derivative(double t, const WeightG& w);

/// Positive root of d l^2 + c l - r_eff = 0: decay rate of 1 - V at -infinity.
double kpp_decay_rate(double d, double r_eff, double c);

/// Wave profile values at one moving-frame coordinate.
struct WaveSample {
    double value;         // V
    double one_minus;     // 1 - V, accurate in relative terms on the left tail
    double d1;            // V'
    double d2;            // V''
};

/// Monotone KPP front V(xi) solving d V'' + c V' + r_eff V (1 - V) = 0 with
/// V(-inf) = 1, V(+inf) = 0, normalized so that V(0) = 1/2.
class KppWave {
public:
    double d() const noexcept { return d_; }
    double r_eff() const noexcept { return r_eff_; }
    double c() const noexcept { return c_; }
    /// 1 - V ~ M exp(lambda xi) as xi -> -inf.
    double lambda() const noexcept { return lambda_; }
    double M() const noexcept { return M_; }
    /// V ~ exp(-mu xi) as xi -> +inf (local rate at the end of the computed range).
    double right_rate() const noexcept { return right_rate_; }

    double xi_min() const noexcept { return xi_.front(); }
    double xi_max() const noexcept { return xi_.back(); }
    std::size_t node_count() const noexcept { return xi_.size(); }
    const std::vector<double>& nodes() const noexcept { return xi_; }

    WaveSample sample(double xi) const;
    double value(double xi) const { return sample(xi).value; }
    double one_minus(double xi) const { return sample(xi).one_minus; }

    /// Leftmost xi with V(xi) = level (levels in (0, 1)).
    double position_of_level(double level) const;

private:
    friend KppWave kpp_profile(double d, double r_eff, double c);

    double d_ = 1.0;
    double r_eff_ = 1.0;
    double c_ = 2.0;
    double lambda_ = 0.0;
    double M_ = 0.0;
    double right_rate_ = 0.0;
    std::vector<double> xi_;
    std::vector<double> w_;   // 1 - V
    std::vector<double> dw_;  // (1 - V)'
};

/// Shoots from the linearized unstable manifold of V = 1. Throws
/// NoMonotoneWave when c < 2 sqrt(d r_eff).
KppWave kpp_profile(double d, double r_eff, double c);

}  // namespace critwave
