#include "critwave/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "critwave/errors.hpp"

namespace critwave {

namespace {

constexpr std::size_t max_reported_sites = 20;
constexpr double inf = std::numeric_limits<double>::infinity();

[[noreturn]] void reject(const std::string& constraint) { throw ValidationError(constraint); }

void require_critical(const CompetitionParams& p) {
    p.validate();
    if (!p.is_critical()) reject("bound envelopes require the critical system a = b = 1");
}

bool same_speed(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out;
    if (n == 1) {
        out.push_back(a);
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return out;
}

struct SuperBranch {
    double exponent;  // of the t^p prefactor
    double D;         // kernel diffusivity
};

SuperBranch super_branch(double d, bool diffusivity_d) {
    if (diffusivity_d) return {(d - 1.0) / (2.0 * d), d};
    return {(1.0 - d) / 2.0, 1.0};
}

// 1 - V(xi+) + 1 - V(xi-) with xi+- = +-x - c t - shift
double two_sided_deficit(const KppWave& w, double t, double x, double c, double shift) {
    return w.one_minus(x - c * t - shift) + w.one_minus(-x - c * t - shift);
}

void check_in_cone(const BoundEnvelope& env, double t, double x) {
    const auto cone = env.domain();
    if (!(t > 0.0) || !cone.contains(t, x)) {
        std::ostringstream os;
        os << "(t, x) = (" << t << ", " << x << ") lies outside the cone t >= " << cone.T
           << ", |x| <= " << cone.c_edge << " t";
        throw DomainError(os.str());
    }
}

}  // namespace

bool ExpandingCone::contains(double t, double x) const noexcept {
    return t >= T && std::abs(x) <= c_edge * t * (1.0 + 1e-14);
}

void SuperSolParams::validate(const CompetitionParams& p) const {
    require_critical(p);
    const double d = p.d;
    if (!(r1 > 1.0 / d && r1 < p.r)) reject("r1 must lie in (1/d, r)");
    if (!same_speed(c_v_star, 2.0 * std::sqrt(d * r1))) reject("c_v_star must equal 2*sqrt(d*r1)");
    if (!(c1 > 2.0 && c1 < c_v_star)) reject("c1 must lie in (c_u, c_v_star) = (2, c_v_star)");
    if (!(q > 0.0)) reject("q must be > 0");
    if (!(q < std::min(1.0, 1.0 / d))) reject("q must be < min(1, 1/d)");
    if (!(std::max(q * c1 - q * q, q * c1 - d * q * q) < c1 - 2.0)) {
        reject("q must satisfy max(q*c1 - q^2, q*c1 - d*q^2) < c1 - c_u");
    }
    if (!(tau > 0.0)) reject("tau must be > 0");
    if (!(tau < tau_limit(p, *this))) reject("tau must be < lambda1*(c_v_star - c1)");
    if (!(B1 > 0.0) || !std::isfinite(B1)) reject("B1 must be > 0");
    if (!(T_star >= 0.0) || !std::isfinite(T_star)) reject("T_star must be >= 0");
    if (mu && !(q * c1 - q * q < *mu)) reject("q*c1 - q^2 must be < mu");
}

void SubSolParams::validate(const CompetitionParams& p) const {
    require_critical(p);
    const double c_v = 2.0 * std::sqrt(p.d * p.r);
    if (!(r2 > p.r)) reject("r2 must be > r");
    if (!same_speed(c_v_dstar, 2.0 * std::sqrt(p.d * r2))) reject("c_v_dstar must equal 2*sqrt(d*r2)");
    if (!(c2 > c_v && c2 < c_v_dstar)) reject("c2 must lie in (c_v, c_v_dstar)");
    if (!(delta > 0.0)) reject("delta must be > 0");
    if (!(delta < theta)) reject("delta must be < theta");
    if (!(theta < 0.5)) reject("theta must be < 1/2");
    if (!(k > 0.0) || !std::isfinite(k)) reject("k must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0)) reject("gamma must lie in (0, 1)");
    if (!(B2 > 0.0 && B2 < 1.0)) reject("B2 must lie in (0, 1)");
    if (!(zeta0 > 0.0) || !std::isfinite(zeta0)) reject("zeta0 must be > 0");
    if (!(T_star >= 0.0) || !std::isfinite(T_star)) reject("T_star must be >= 0");
}

double tau_limit(const CompetitionParams& p, const SuperSolParams& s) {
    return kpp_decay_rate(p.d, s.r1, s.c_v_star) * (s.c_v_star - s.c1);
}

SuperSolParams complete_super_params(const CompetitionParams& p, SuperSolParams s) {
    require_critical(p);
    if (s.r1 == 0.0) {
        if (!(p.d * p.r > 1.0)) reject("super-solutions need d r > 1 so that (1/d, r) is nonempty");
        s.r1 = 0.5 * (1.0 / p.d + p.r);
    }
    s.c_v_star = 2.0 * std::sqrt(p.d * s.r1);
    if (s.c1 == 0.0) s.c1 = 0.5 * (2.0 + s.c_v_star);
    if (s.q == 0.0) {
        s.q = 0.9 * std::min({1.0, 1.0 / p.d, (s.c1 - 2.0) / s.c1});
        while (s.q > 0.0 && std::max(s.q * s.c1 - s.q * s.q, s.q * s.c1 - p.d * s.q * s.q) >= s.c1 - 2.0) {
            s.q *= 0.9;
        }
    }
    if (s.tau == 0.0) s.tau = 0.5 * tau_limit(p, s);
    return s;
}

SubSolParams complete_sub_params(const CompetitionParams& p, SubSolParams s) {
    require_critical(p);
    if (s.r2 == 0.0) s.r2 = 2.0 * p.r;
    s.c_v_dstar = 2.0 * std::sqrt(p.d * s.r2);
    if (s.c2 == 0.0) s.c2 = 0.5 * (2.0 * std::sqrt(p.d * p.r) + s.c_v_dstar);
    if (s.k == 0.0) s.k = 0.5 * s.c2;
    return s;
}

SuperSolParams pick_super_params(const CompetitionParams& p) { return complete_super_params(p, {}); }

SubSolParams pick_sub_params(const CompetitionParams& p) { return complete_sub_params(p, {}); }

BoundEnvelope BoundEnvelope::super(const CompetitionParams& p, const SuperSolParams& s) {
    s.validate(p);
    BoundEnvelope env(BoundKind::super, p, kpp_profile(p.d, s.r1, s.c_v_star));
    env.bound_params_ = s;
    return env;
}

BoundEnvelope BoundEnvelope::sub(const CompetitionParams& p, const SubSolParams& s) {
    s.validate(p);
    BoundEnvelope env(BoundKind::sub, p, kpp_profile(p.d, s.r2, s.c_v_dstar));
    env.bound_params_ = s;
    return env;
}

BoundEnvelope BoundEnvelope::unchecked(const CompetitionParams& p,
                                       const std::variant<SuperSolParams, SubSolParams>& params) {
    const bool super = std::holds_alternative<SuperSolParams>(params);
    KppWave wave = super ? kpp_profile(p.d, std::get<SuperSolParams>(params).r1,
                                       std::get<SuperSolParams>(params).c_v_star)
                         : kpp_profile(p.d, std::get<SubSolParams>(params).r2,
                                       std::get<SubSolParams>(params).c_v_dstar);
    BoundEnvelope env(super ? BoundKind::super : BoundKind::sub, p, std::move(wave));
    env.bound_params_ = params;
    env.checked_ = false;
    return env;
}

const SuperSolParams& BoundEnvelope::super_params() const {
    if (kind_ != BoundKind::super) throw DomainError("envelope is not a super-solution");
    return std::get<SuperSolParams>(bound_params_);
}

const SubSolParams& BoundEnvelope::sub_params() const {
    if (kind_ != BoundKind::sub) throw DomainError("envelope is not a sub-solution");
    return std::get<SubSolParams>(bound_params_);
}

ExpandingCone BoundEnvelope::domain() const noexcept {
    if (kind_ == BoundKind::super) {
        const auto& s = std::get<SuperSolParams>(bound_params_);
        return {s.T_star, s.c1};
    }
    const auto& s = std::get<SubSolParams>(bound_params_);
    return {s.T_star, s.c2};
}

BoundEnvelope BoundEnvelope::with_onset(double T) const {
    BoundEnvelope copy = *this;
    std::visit([&](auto& s) {
        s.T_star = T;
        if (checked_) s.validate(params_);
    }, copy.bound_params_);
    return copy;
}

BoundEnvelope BoundEnvelope::with_amplitude(double amplitude, std::optional<double> zeta0) const {
    BoundEnvelope copy = *this;
    if (kind_ == BoundKind::super) {
        auto& s = std::get<SuperSolParams>(copy.bound_params_);
        s.B1 = amplitude;
        if (checked_) s.validate(params_);
    } else {
        auto& s = std::get<SubSolParams>(copy.bound_params_);
        s.B2 = amplitude;
        if (zeta0) s.zeta0 = *zeta0;
        if (checked_) s.validate(params_);
    }
    return copy;
}

EnvelopeValue super_eval_branch(double t, double x, const BoundEnvelope& env, bool diffusivity_d) {
    const auto& s = env.super_params();
    check_in_cone(env, t, x);
    const auto br = super_branch(env.params().d, diffusivity_d);
    const double prefactor = std::pow(t, br.exponent) * -std::expm1(-s.tau * t);
    const double u = prefactor * exp_tail_heat(t, x, {s.B1, s.q, br.D});
    const double deficit = two_sided_deficit(env.wave(), t, x, s.c_v_star, 0.0);
    return {u, 1.0 - deficit - u};
}

EnvelopeValue super_eval(double t, double x, const BoundEnvelope& env) {
    return super_eval_branch(t, x, env, env.params().d >= 1.0);
}

EnvelopeValue sub_eval(double t, double x, const BoundEnvelope& env) {
    const auto& s = env.sub_params();
    check_in_cone(env, t, x);
    const double u = g_weight(t, {s.delta}) * indicator_heat(t, x, {s.B2, 1.0}) -
                     exp_tail_heat(t, x, {s.B3(), s.k, 1.0});
    const double deficit = two_sided_deficit(env.wave(), t, x, s.c_v_dstar, s.zeta0);
    return {u, 1.0 - deficit - u + std::pow(t, -(1.0 + s.theta))};
}

ResidualSample envelope_residual(double t, double x, const BoundEnvelope& env) {
    check_in_cone(env, t, x);
    const auto& p = env.params();
    const KppWave& wave = env.wave();
    ResidualSample out;
    out.t = t;
    out.x = x;

    if (env.kind() == BoundKind::super) {
        const auto& s = env.super_params();
        const auto br = super_branch(p.d, p.d >= 1.0);
        const auto ls = exp_tail_heat_log_sample(t, x, {s.B1, s.q, br.D});
        const double log_u = br.exponent * std::log(t) + std::log(-std::expm1(-s.tau * t)) + ls.log_value;
        const double growth = br.exponent / t + s.tau / std::expm1(s.tau * t);  // P'/P
        const auto wp = wave.sample(x - s.c_v_star * t);
        const auto wm = wave.sample(-x - s.c_v_star * t);
        const double deficit = wp.one_minus + wm.one_minus;

        // N1 / U~ = P'/P + s_t/s - s_xx/s - (1 - U~ - V~)
        const double n1_hat = growth + (ls.rel_t - ls.rel_xx) - deficit;
        const double s1_hat = std::abs(growth) + std::abs(ls.rel_t) + std::abs(ls.rel_xx) + deficit;
        const double U = std::exp(log_u);
        out.n1 = U * n1_hat;
        out.rel_n1 = n1_hat / s1_hat;

        const double Ut_a = U * growth, Ut_b = U * ls.rel_t, Uxx = U * ls.rel_xx;
        const double V = 1.0 - deficit - U;
        const double Vt = -s.c_v_star * (wp.d1 + wm.d1) - (Ut_a + Ut_b);
        const double Vxx = wp.d2 + wm.d2 - Uxx;
        out.n2 = Vt - p.d * Vxx - p.r * V * deficit;
        const double s2 = s.c_v_star * (std::abs(wp.d1) + std::abs(wm.d1)) + std::abs(Ut_a) +
                          std::abs(Ut_b) + p.d * (std::abs(wp.d2) + std::abs(wm.d2)) +
                          p.d * std::abs(Uxx) + p.r * std::abs(V * deficit);
        if (s2 > 0.0) {
            out.rel_n2 = out.n2 / s2;
        } else {
            out.resolved = false;
        }
        return out;
    }

    const auto& s = env.sub_params();
    const WeightG weight{s.delta};
    const double g = g_weight(t, weight);
    const double gp = g_weight_derivative(t, weight);
    const auto lf = indicator_heat_log_sample(t, x, {s.B2, 1.0});
    const auto lh = exp_tail_heat_log_sample(t, x, {s.B3(), s.k, 1.0});
    // common scale so that g f - h and its derivatives stay representable
    const double L = std::max(lf.log_value, lh.log_value);
    const double F = std::exp(lf.log_value - L), H = std::exp(lh.log_value - L);
    const double A = gp * F;
    const double Bf = g * F * lf.rel_t, Bh = H * lh.rel_t;
    const double Cf = g * F * lf.rel_xx, Ch = H * lh.rel_xx;
    const double U_hat = g * F - H;
    const double decay = std::pow(t, -(1.0 + s.theta));
    const auto wp = wave.sample(x - s.c_v_dstar * t - s.zeta0);
    const auto wm = wave.sample(-x - s.c_v_dstar * t - s.zeta0);
    const double deficit = wp.one_minus + wm.one_minus;
    const double m = deficit - decay;  // 1 - U - V

    const double n1_hat = A + (Bf - Cf) - (Bh - Ch) - U_hat * m;
    const double s1_hat = std::abs(A) + std::abs(Bf) + std::abs(Bh) + std::abs(Cf) + std::abs(Ch) +
                          std::abs(U_hat * m);
    const double scale = std::exp(L);
    out.n1 = scale * n1_hat;
    out.rel_n1 = n1_hat / s1_hat;

    const double U = scale * U_hat;
    const double V = 1.0 - deficit - U + decay;
    const double decay_rate = (1.0 + s.theta) * std::pow(t, -(2.0 + s.theta));
    const double Vt = -s.c_v_dstar * (wp.d1 + wm.d1) - scale * (A + Bf - Bh) - decay_rate;
    const double Vxx = wp.d2 + wm.d2 - scale * (Cf - Ch);
    out.n2 = Vt - p.d * Vxx - p.r * V * m;
    const double s2 = s.c_v_dstar * (std::abs(wp.d1) + std::abs(wm.d1)) +
                      scale * (std::abs(A) + std::abs(Bf) + std::abs(Bh)) + decay_rate +
                      p.d * (std::abs(wp.d2) + std::abs(wm.d2)) +
                      p.d * scale * (std::abs(Cf) + std::abs(Ch)) + p.r * std::abs(V * m);
    out.rel_n2 = out.n2 / s2;
    return out;
}

ResidualReport residual_sign_scan(const BoundEnvelope& env, const ScanSpec& spec) {
    if (spec.nt == 0 || spec.nx == 0) throw StructuralError("scan needs at least one sample per axis");
    if (!(spec.t_min > 0.0) || !(spec.t_max >= spec.t_min)) {
        throw DomainError("scan window must satisfy 0 < t_min <= t_max");
    }
    const auto cone = env.domain();
    if (spec.t_min < cone.T) {
        std::ostringstream os;
        os << "scan window starts at t = " << spec.t_min << ", before the cone onset " << cone.T;
        throw DomainError(os.str());
    }
    const bool super = env.kind() == BoundKind::super;
    const double eps = spec.epsilon;
    ResidualReport rep;
    rep.kind = env.kind();
    rep.epsilon = eps;
    rep.min_n1 = rep.min_n2 = rep.min_rel_n1 = rep.min_rel_n2 = inf;
    rep.max_n1 = rep.max_n2 = rep.max_rel_n1 = rep.max_rel_n2 = -inf;

    auto flag = [&](const ResidualSample& r, const char* which, double raw, double rel) {
        ++rep.violation_count;
        if (rep.violations.size() < max_reported_sites) rep.violations.push_back({r.t, r.x, which, raw, rel});
    };
    for (double t : linspace(spec.t_min, spec.t_max, spec.nt)) {
        const double edge = cone.c_edge * t;
        for (double x : linspace(-edge, edge, spec.nx)) {
            const auto r = envelope_residual(t, x, env);
            ++rep.samples;
            rep.min_n1 = std::min(rep.min_n1, r.n1);
            rep.max_n1 = std::max(rep.max_n1, r.n1);
            rep.min_rel_n1 = std::min(rep.min_rel_n1, r.rel_n1);
            rep.max_rel_n1 = std::max(rep.max_rel_n1, r.rel_n1);
            const bool bad1 = super ? (r.n1 < -eps || r.rel_n1 < -eps) : (r.n1 > eps || r.rel_n1 > eps);
            if (bad1) flag(r, "N1", r.n1, r.rel_n1);
            if (!r.resolved) {
                ++rep.unresolved;
                continue;
            }
            rep.min_n2 = std::min(rep.min_n2, r.n2);
            rep.max_n2 = std::max(rep.max_n2, r.n2);
            rep.min_rel_n2 = std::min(rep.min_rel_n2, r.rel_n2);
            rep.max_rel_n2 = std::max(rep.max_rel_n2, r.rel_n2);
            const bool bad2 = super ? (r.n2 > eps || r.rel_n2 > eps) : (r.n2 < -eps || r.rel_n2 < -eps);
            if (bad2) flag(r, "N2", r.n2, r.rel_n2);
        }
    }
    return rep;
}

std::optional<double> find_onset(const BoundEnvelope& env, const OnsetSearch& search) {
    if (!(search.t_start > 0.0) || !(search.growth > 1.0) || !(search.window_ratio >= 1.0)) {
        throw ValidationError("onset search needs t_start > 0, growth > 1 and window_ratio >= 1");
    }
    for (double T = search.t_start; T <= search.t_limit; T *= search.growth) {
        const auto probe = env.with_onset(T);
        const auto rep = residual_sign_scan(
            probe, {T, search.window_ratio * T, search.nt, search.nx, search.epsilon});
        if (rep.passed()) return search.margin * T;
    }
    return std::nullopt;
}

namespace {

double lemma_iii_margin(const SubSolParams& s, double t) {
    const double x = 2.0 * s.k * t;
    return log_exp_tail_heat(t, x, {s.B3(), s.k, 1.0}) -
           (std::log(g_weight(t, {s.delta})) + log_indicator_heat(t, x, {s.B2, 1.0}));
}

}  // namespace

std::optional<double> lemma_iii_onset(const SubSolParams& s, double t_limit) {
    const double t0 = 0.5 / s.k;
    std::optional<double> onset = t0;
    double t = t0;
    while (t <= t_limit) {
        const double next = t * 1.02;
        if (lemma_iii_margin(s, t) < 0.0) onset = next > t_limit ? std::nullopt : std::optional(next);
        t = next;
    }
    return onset;
}

LemmaReport lemma_checks(const SubSolParams& s, const ScanSpec& spec, std::optional<double> j_opt) {
    const double j = j_opt.value_or(0.5 * s.k);
    if (!(j > 0.0 && j < s.k)) throw ValidationError("lemma checks need 0 < j < k");
    LemmaReport rep;
    rep.j = j;
    rep.worst_i = rep.worst_ii = rep.worst_iii = inf;
    const ExpTailKernel h{s.B3(), s.k, 1.0};
    const IndicatorKernel f{s.B2, 1.0};
    const double log_coeff = std::log(s.B3() / std::sqrt(std::numbers::pi) * s.k / (s.k * s.k - j * j));
    for (double t : linspace(spec.t_min, spec.t_max, spec.nt)) {
        const double log_g = std::log(g_weight(t, {s.delta}));
        for (double x : linspace(-2.0 * j * t, 2.0 * j * t, spec.nx)) {
            const double log_h = log_exp_tail_heat(t, x, h);
            const double bound = log_coeff - 0.5 * std::log(t) - x * x / (4.0 * t);
            rep.worst_i = std::min(rep.worst_i, bound - log_h);
            rep.worst_ii = std::min(rep.worst_ii, log_g + log_indicator_heat(t, x, f) - log_h);
            ++rep.samples;
        }
    }
    const auto t0 = lemma_iii_onset(s);
    if (!t0) {
        rep.t0 = std::numeric_limits<double>::quiet_NaN();
        rep.worst_iii = -inf;
        return rep;
    }
    rep.t0 = *t0;
    for (double t : linspace(*t0, 4.0 * *t0, spec.nt)) {
        rep.worst_iii = std::min(rep.worst_iii, lemma_iii_margin(s, t));
        ++rep.samples;
    }
    return rep;
}

OrderingReport ordering_scan(const SimulationTrace& trace, const BoundEnvelope& env, double tolerance,
                             double t_from) {
    if (!(trace.params == env.params())) {
        throw StructuralError("ordering scan: trace and envelope use different parameters");
    }
    const auto cone = env.domain();
    const bool super = env.kind() == BoundKind::super;
    OrderingReport rep;
    rep.kind = env.kind();
    rep.tolerance = tolerance;
    rep.max_u_violation = rep.max_v_violation = -inf;
    const auto& g = trace.grid;
    for (const auto& snap : trace.snapshots) {
        const double t = snap.t;
        if (t < std::max(cone.T, t_from) || !(t > 0.0)) continue;
        double worst_u = -inf, worst_v = -inf;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.x(i);
            if (!cone.contains(t, x)) continue;
            if (super) {
                const auto e = super_eval(t, x, env);
                worst_u = std::max(worst_u, snap.u[i] - e.u);
                worst_v = std::max(worst_v, e.v - snap.v[i]);
            } else {
                const auto e = sub_eval(t, x, env);
                worst_u = std::max(worst_u, e.u - snap.u[i]);
                worst_v = std::max(worst_v, snap.v[i] - e.v);
            }
        }
        rep.times.push_back(t);
        rep.u_violation.push_back(worst_u);
        rep.v_violation.push_back(worst_v);
        rep.max_u_violation = std::max(rep.max_u_violation, worst_u);
        rep.max_v_violation = std::max(rep.max_v_violation, worst_v);
    }
    if (rep.times.empty()) throw StructuralError("ordering scan: no stored snapshot inside the cone window");
    for (std::size_t i = rep.times.size(); i-- > 0;) {
        if (rep.u_violation[i] > tolerance || rep.v_violation[i] > tolerance) break;
        rep.onset = rep.times[i];
    }
    return rep;
}

double fit_amplitude(const SimulationTrace& trace, const BoundEnvelope& env, double T, double slack,
                     double safety) {
    if (!(trace.params == env.params())) {
        throw StructuralError("fit_amplitude: trace and envelope use different parameters");
    }
    const auto cone = env.domain();
    if (T < cone.T) throw DomainError("fit_amplitude: T precedes the cone onset");
    const auto& g = trace.grid;
    const bool super = env.kind() == BoundKind::super;
    // envelopes are linear in the amplitude: evaluate at a reference amplitude and rescale
    const double ref = super ? 1.0 : 0.5;
    const auto unit_env = env.with_amplitude(ref);

    double lower = 0.0;   // super: B1 >= lower
    double upper = inf;   // sub: B2 <= upper
    auto visit = [&](const FieldState& snap, std::size_t i) {
        const double t = snap.t, x = g.x(i);
        if (super) {
            const auto e = super_eval(t, x, unit_env);
            const double U1 = e.u / ref;
            const double deficit = 1.0 - e.v - e.u;
            const double need = std::max(snap.u[i] - slack, 1.0 - deficit - snap.v[i] - slack);
            if (need > 0.0) lower = std::max(lower, need / U1);
        } else {
            const auto e = sub_eval(t, x, unit_env);
            const double U1 = e.u / ref;
            const double base = e.v + e.u;  // V without the -U term
            if (U1 > 0.0) {
                upper = std::min(upper, (snap.u[i] + slack) / U1);
                upper = std::min(upper, (base - snap.v[i] + slack) / U1);
            }
        }
    };
    bool slice_done = false;
    for (const auto& snap : trace.snapshots) {
        if (snap.t < T) continue;
        const double edge = cone.c_edge * snap.t;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.x(i);
            if (!cone.contains(snap.t, x)) continue;
            const bool on_edge = std::abs(x) + g.dx() > edge;
            if (!slice_done || on_edge) visit(snap, i);
        }
        slice_done = true;
    }
    if (!slice_done) throw StructuralError("fit_amplitude: no stored snapshot at or after T");
    if (super) return std::max(lower, 1e-12) * safety;
    return std::min(upper / safety, 0.999);
}

}  // namespace critwave
