#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "critwave/analytic.hpp"
#include "critwave/core.hpp"
#include "critwave/solver.hpp"

namespace critwave {

/// {(t, x): t >= T, |x| <= c_edge t} (the closure of the open cone).
struct ExpandingCone {
    double T = 0.0;
    double c_edge = 1.0;

    bool contains(double t, double x) const noexcept;
};

struct SuperSolParams {
    double r1 = 0.0;
    double c_v_star = 0.0;  // 2 sqrt(d r1)
    double c1 = 0.0;
    double q = 0.0;
    double tau = 0.0;
    double B1 = 1.0;
    double T_star = 0.0;
    /// Decay rate of 1 - v along x = c1 t when known; adds q c1 - q^2 < mu.
    std::optional<double> mu;

    /// Throws ValidationError naming the first violated constraint.
    void validate(const CompetitionParams& p) const;

    friend bool operator==(const SuperSolParams&, const SuperSolParams&) = default;
};

struct SubSolParams {
    double r2 = 0.0;
    double c_v_dstar = 0.0;  // 2 sqrt(d r2)
    double c2 = 0.0;
    double delta = 0.1;
    double theta = 0.3;
    double k = 0.0;  // c2 / 2 by default
    double gamma = 0.01;
    double B2 = 0.5;
    double zeta0 = 20.0;
    double T_star = 0.0;

    double B3() const noexcept { return gamma * B2; }
    void validate(const CompetitionParams& p) const;

    friend bool operator==(const SubSolParams&, const SubSolParams&) = default;
};

/// r1 = (1/d + r)/2, c1 = (c_u + c_v*)/2, q = 0.9 min(1, 1/d, (c1 - c_u)/c1)
/// shrunk until max(q c1 - q^2, q c1 - d q^2) < c1 - c_u, tau = lambda1 (c_v* - c1)/2.
SuperSolParams pick_super_params(const CompetitionParams& p);
/// r2 = 2r, c2 = (c_v + c_v**)/2, k = c2/2 and the struct defaults.
SubSolParams pick_sub_params(const CompetitionParams& p);

/// Fills the fields left at 0 (r1, c1, q, tau; r2, c2, k) by the picker rules
/// applied to the given ones; c_v_star / c_v_dstar are always recomputed.
SuperSolParams complete_super_params(const CompetitionParams& p, SuperSolParams partial);
SubSolParams complete_sub_params(const CompetitionParams& p, SubSolParams partial);

/// Lambda1 (c_v* - c1): the strict upper bound on tau.
double tau_limit(const CompetitionParams& p, const SuperSolParams& s);

enum class BoundKind { super, sub };

/// A closed-form super- or sub-solution pair with its wave profile and cone.
class BoundEnvelope {
public:
    static BoundEnvelope super(const CompetitionParams& p, const SuperSolParams& s);
    static BoundEnvelope sub(const CompetitionParams& p, const SubSolParams& s);
    /// Skips parameter validation so that deliberately invalid envelopes can be
    /// scanned. Derived envelopes stay unchecked.
    static BoundEnvelope unchecked(const CompetitionParams& p,
                                   const std::variant<SuperSolParams, SubSolParams>& params);

    BoundKind kind() const noexcept { return kind_; }
    const CompetitionParams& params() const noexcept { return params_; }
    const SuperSolParams& super_params() const;
    const SubSolParams& sub_params() const;
    const KppWave& wave() const noexcept { return wave_; }
    ExpandingCone domain() const noexcept;

    /// Same envelope with a different onset time (the wave is reused).
    BoundEnvelope with_onset(double T) const;
    /// Same envelope with a different amplitude (B1 or B2) and, for sub, shift zeta0.
    BoundEnvelope with_amplitude(double amplitude, std::optional<double> zeta0 = std::nullopt) const;

private:
    BoundEnvelope(BoundKind kind, const CompetitionParams& p, KppWave wave)
        : kind_(kind), params_(p), wave_(std::move(wave)) {}

    BoundKind kind_;
    CompetitionParams params_;
    std::variant<SuperSolParams, SubSolParams> bound_params_;
    KppWave wave_;
    bool checked_ = true;
};

struct EnvelopeValue {
    double u;
    double v;
};

/// (U~, V~); throws DomainError outside the cone and for the wrong kind.
EnvelopeValue super_eval(double t, double x, const BoundEnvelope& env);
/// Evaluates one branch explicitly: the heat kernel with diffusivity 1 and
/// prefactor t^((1-d)/2), or diffusivity d and t^((d-1)/(2d)). At d = 1 they coincide.
EnvelopeValue super_eval_branch(double t, double x, const BoundEnvelope& env, bool diffusivity_d);
/// (U, V); throws DomainError outside the cone and for the wrong kind.
EnvelopeValue sub_eval(double t, double x, const BoundEnvelope& env);

/// N1, N2 of the envelope at one point from analytic derivatives. `rel_*` divides
/// by the sum of absolute values of the terms forming each residual, so the
/// sign test is meaningful where the terms themselves are tiny.
struct ResidualSample {
    double t = 0.0;
    double x = 0.0;
    double n1 = 0.0;
    double n2 = 0.0;
    double rel_n1 = 0.0;
    double rel_n2 = 0.0;
    bool resolved = true;  // false when every term underflows
};

ResidualSample envelope_residual(double t, double x, const BoundEnvelope& env);

struct ScanSpec {
    double t_min = 0.0;
    double t_max = 0.0;
    std::size_t nt = 200;
    std::size_t nx = 400;  // samples of x across [-c_edge t, c_edge t]
    double epsilon = 1e-5;
};

struct ViolationSite {
    double t;
    double x;
    std::string which;  // "N1" or "N2"
    double raw;
    double relative;
};

struct ResidualReport {
    BoundKind kind = BoundKind::super;
    double min_n1 = 0.0, max_n1 = 0.0, min_n2 = 0.0, max_n2 = 0.0;
    double min_rel_n1 = 0.0, max_rel_n1 = 0.0, min_rel_n2 = 0.0, max_rel_n2 = 0.0;
    std::size_t samples = 0;
    std::size_t unresolved = 0;
    std::size_t violation_count = 0;
    std::vector<ViolationSite> violations;  // the first few, in scan order
    double epsilon = 1e-5;

    bool passed() const noexcept { return violation_count == 0; }
};

/// Super: N1 >= -eps and N2 <= eps; sub: N1 <= eps and N2 >= -eps; both in raw
/// and relative form. Throws DomainError when the window leaves the cone.
ResidualReport residual_sign_scan(const BoundEnvelope& env, const ScanSpec& spec);

struct OnsetSearch {
    double t_start = 1.0;
    double growth = 1.25;
    double t_limit = 1e8;
    double window_ratio = 4.0;
    std::size_t nt = 40;
    std::size_t nx = 81;  // odd, so x = 0 is probed
    double epsilon = 1e-5;
    double margin = 2.0;
};

/// First T on a geometric ladder for which the sign conditions hold over
/// [T, window_ratio T], times the margin. Empty if none below t_limit.
std::optional<double> find_onset(const BoundEnvelope& env, const OnsetSearch& search = {});

/// Numeric forms of the heat-kernel lemma for f (indicator, B2) and h (exp tail, B3, k):
/// (i) h <= B3/sqrt(pi) k/(k^2 - j^2) t^(-1/2) exp(-x^2/(4t)) on |x| <= 2 j t;
/// (ii) g f - h > 0 on |x| <= 2 j t; (iii) g f - h <= 0 at |x| = 2 k t for t >= T0.
/// Margins are in log form (positive = holds).
struct LemmaReport {
    double j = 0.0;
    double worst_i = 0.0;
    double worst_ii = 0.0;
    double worst_iii = 0.0;
    double t0 = 0.0;
    std::size_t samples = 0;

    bool i_holds() const noexcept { return worst_i >= 0.0; }
    bool ii_holds() const noexcept { return worst_ii > 0.0; }
    bool iii_holds() const noexcept { return worst_iii >= 0.0; }
};

/// Earliest T0 >= 1/(2k) beyond which (iii) holds on a geometric grid up to t_limit.
std::optional<double> lemma_iii_onset(const SubSolParams& s, double t_limit = 1e12);

/// (i) and (ii) on the scan window, (iii) on [T0, 4 T0]. j defaults to k/2.
LemmaReport lemma_checks(const SubSolParams& s, const ScanSpec& spec,
                         std::optional<double> j = std::nullopt);

struct OrderingReport {
    BoundKind kind = BoundKind::super;
    std::vector<double> times;
    std::vector<double> u_violation;  // super: max(u - U~); sub: max(U - u)
    std::vector<double> v_violation;  // super: max(V~ - v); sub: max(v - V)
    double max_u_violation = 0.0;
    double max_v_violation = 0.0;
    double tolerance = 1e-2;
    /// Earliest snapshot time after which every violation is within tolerance.
    std::optional<double> onset;

    bool passed() const noexcept { return max_u_violation <= tolerance && max_v_violation <= tolerance; }
};

/// Compares stored snapshots with t >= max(env onset, t_from) on the cone
/// cross-section. Throws StructuralError when the parameters differ.
OrderingReport ordering_scan(const SimulationTrace& trace, const BoundEnvelope& env,
                             double tolerance = 1e-2, double t_from = 0.0);

/// Smallest amplitude for which the envelope dominates the trace on the slice
/// t = T and on the cone edge for t >= T, up to an absolute slack, times `safety`.
/// Super: the returned B1; sub: B2 (capped below 1).
double fit_amplitude(const SimulationTrace& trace, const BoundEnvelope& env, double T,
                     double slack = 1e-3, double safety = 1.2);

}  // namespace critwave
