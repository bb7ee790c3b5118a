#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polystab {

using Vector = std::vector<double>;

/// Coefficient callback: writes f(x, t) (or g(x, t)) into `out`, which has
/// the problem's dimension. Callbacks must be pure.
using CoefficientFn =
    std::function<void(std::span<const double> x, double t, std::span<double> out)>;

/// Construction parameters for SdeProblem.
struct SdeProblemParams {
    std::string label;
    std::size_t dimension = 1;
    CoefficientFn drift;
    CoefficientFn diffusion;  ///< single column: the noise is a scalar Brownian motion
    double k1 = 1.0;          ///< decay constant of the growth conditions
    double c = 1.0;           ///< diffusion amplitude, |g(x,t)| <= C (1+t)^{-K1}
    double kbar = 0.0;        ///< one-sided Lipschitz constant; 0 means no step-size bound
    bool satisfies_linear_growth = true;
    Vector default_initial_value;  ///< may be empty; simulations then need an explicit x(0)
};

/// dx = f(x,t) dt + g(x,t) dB with scalar Brownian motion B.
///
/// Immutable once built; safe to share across ensemble workers. The local
/// Lipschitz condition needed for well-posedness is assumed, not audited.
class SdeProblem {
public:
    explicit SdeProblem(SdeProblemParams params);

    const std::string& label() const noexcept { return params_.label; }
    std::size_t dimension() const noexcept { return params_.dimension; }
    double k1() const noexcept { return params_.k1; }
    double c() const noexcept { return params_.c; }
    double kbar() const noexcept { return params_.kbar; }
    bool satisfies_linear_growth() const noexcept { return params_.satisfies_linear_growth; }
    const Vector& default_initial_value() const noexcept { return params_.default_initial_value; }

    void drift(std::span<const double> x, double t, std::span<double> out) const {
        params_.drift(x, t, out);
    }
    void diffusion(std::span<const double> x, double t, std::span<double> out) const {
        params_.diffusion(x, t, out);
    }
    Vector drift(std::span<const double> x, double t) const;
    Vector diffusion(std::span<const double> x, double t) const;

    /// Copy with replaced metadata constants; the coefficient functions are shared.
    SdeProblem with_constants(std::optional<double> k1, std::optional<double> c) const;

private:
    SdeProblemParams params_;
};

/// dx = -x/(1+t) dt + 1/(1+t) dB. K1 = 1, C = 1, Kbar = -1.
SdeProblem linear_example();

/// dx = (-3x - x^3)/(1+t) dt + (1+t)^{-3} dB. K1 = 3, C = 1, Kbar = -3; no
/// linear growth bound on the drift, so explicit Euler-Maruyama blows up.
SdeProblem cubic_counterexample();

/// dx = (-3x - x^3)/(1+t)^2 dt + 5 sin(x)/(1+t)^4 dB. Ships the published
/// K1 = 3, C = 5 as metadata; the condition audit reports what actually holds.
SdeProblem bem_example();

/// Labels accepted by make_builtin: "linear", "counterexample", "bem-example".
std::vector<std::string> builtin_labels();
SdeProblem make_builtin(std::string_view label);

/// E|x(t)|^2 = (x0^2 + t) / (1+t)^2 for the linear example.
double exact_linear_mean_square(double x0, double t);

/// Built-in problem selection with optional overrides, as read from a JSON
/// config such as {"problem": "linear", "K1": 1.0, "C": 1.0, "initial_value": [1.0]}.
struct ProblemSpec {
    std::string label;
    std::optional<double> k1;
    std::optional<double> c;
    std::optional<Vector> initial_value;
};

ProblemSpec parse_problem_spec(std::string_view json_text);
SdeProblem make_problem(const ProblemSpec& spec);
/// Override if given, else the problem's default.
Vector initial_value_for(const ProblemSpec& spec, const SdeProblem& problem);

// ---------------------------------------------------------------------------
// Condition audit

/// Worst sampled margin of one growth condition. Margins are `lhs - rhs` of
/// the inequality `lhs <= rhs`, so a condition holds where the margin is <= 0.
struct ConditionMargin {
    std::string condition;
    double worst_margin = -std::numeric_limits<double>::infinity();
    Vector worst_state;
    Vector worst_partner;  ///< second state for pair conditions
    double worst_time = 0.0;
    std::size_t samples = 0;
    bool pass = true;
};

struct ConditionAuditReport {
    ConditionMargin linear_growth;        ///< |f(x,t)| <= K1 (1+t)^{-1} |x|
    ConditionMargin one_sided_decay;      ///< <x, f(x,t)> <= -K1 (1+t)^{-1} |x|^2
    ConditionMargin diffusion_decay;      ///< |g(x,t)| <= C (1+t)^{-K1}
    ConditionMargin one_sided_lipschitz;  ///< <x-y, f(x)-f(y)> <= Kbar (1+t)^{-1} |x-y|^2

    /// Largest K1 for which the one-sided decay condition holds on the samples.
    double max_k1_one_sided = std::numeric_limits<double>::infinity();
    /// Largest K1 for which the diffusion bound holds with the problem's C.
    double max_k1_diffusion = std::numeric_limits<double>::infinity();

    /// min of the two limits above: the K1 the sampled evidence supports.
    double audited_k1() const noexcept;
    bool all_pass() const noexcept;
    /// Reminder that sampling gives evidence, not proof.
    static constexpr std::string_view kDisclaimer =
        "sampled audit: a pass is evidence on the grid, not a proof";
};

struct AuditGrid {
    std::vector<Vector> states;
    std::vector<double> times;
    std::size_t lipschitz_pairs_per_time = 1000;
    double pair_lo = -100.0;
    double pair_hi = 100.0;
    std::uint64_t pair_seed = 0x5eedULL;
};

/// Cartesian grid of `points_per_axis` values per coordinate in [lo, hi];
/// at most three axes are gridded, further coordinates are held at zero.
AuditGrid make_audit_grid(std::size_t dimension, double lo, double hi,
                          std::size_t points_per_axis, std::vector<double> times);

/// x in [-100, 100] (33 points per axis), t in {0, 0.1, 1, 10, 100, 1e4}.
AuditGrid default_audit_grid(std::size_t dimension);

/// Throws DomainError naming the offending point when f or g is non-finite.
ConditionAuditReport audit_conditions(const SdeProblem& problem, const AuditGrid& grid);

}  // namespace polystab
