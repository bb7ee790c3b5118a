#pragma once

#include <cstdint>
#include <span>

#include "polystab/sde_model.hpp"

namespace polystab {

/// Step index k, step size dt and Brownian increment dB = B((k+1)dt) - B(k dt).
struct StepContext {
    std::int64_t k = 0;
    double dt = 0.0;
    double dB = 0.0;

    double time() const noexcept { return static_cast<double>(k) * dt; }
    double next_time() const noexcept { return static_cast<double>(k + 1) * dt; }
    /// Throws DomainError unless dt > 0 and dB is finite.
    void validate() const;
};

enum class SolverFallback { none, bisection, damped_iteration };
enum class SolverMethod { newton, bisection };

struct ImplicitSolverConfig {
    double residual_tolerance = 1e-12;  ///< absolute, on |x - f(x,t) dt - b|
    int max_iterations = 100;
    SolverMethod method = SolverMethod::newton;
    /// Used when Newton stalls. Bisection needs a scalar problem; vector
    /// problems fall back to damped iteration instead.
    SolverFallback fallback = SolverFallback::bisection;
    /// Treat violated theorem step-size hypotheses as errors instead of warnings.
    bool strict = false;

    void validate() const;
};

struct ImplicitSolveReport {
    Vector root;
    double residual = 0.0;
    int iterations = 0;
    bool used_fallback = false;
};

/// Explicit Euler-Maruyama: y + f(y, k dt) dt + g(y, k dt) dB, with no
/// safeguards. Throws StepError if a coefficient is non-finite.
Vector em_step(const SdeProblem& problem, std::span<const double> y, const StepContext& ctx);

/// Root of x = f(x, t) dt + b. The map x - f(x,t) dt is strongly monotone
/// when dt < 1/|Kbar|, so the root is unique.
///
/// Newton with a central-difference Jacobian from x0 = b, backtracking on the
/// residual norm, then the configured fallback. Throws PreconditionError if
/// dt >= 1/|Kbar| and SolverError if the tolerance is not met.
Vector solve_implicit(const SdeProblem& problem, double t, std::span<const double> b, double dt,
                      const ImplicitSolverConfig& cfg = {});

ImplicitSolveReport solve_implicit_report(const SdeProblem& problem, double t,
                                          std::span<const double> b, double dt,
                                          const ImplicitSolverConfig& cfg = {});

/// Backward Euler-Maruyama: solve x = f(x, (k+1) dt) dt + z + g(z, k dt) dB.
/// With cfg.strict, also requires dt < 1/K1.
Vector bem_step(const SdeProblem& problem, std::span<const double> z, const StepContext& ctx,
                const ImplicitSolverConfig& cfg = {});

/// Largest admissible implicit step size, 1/|Kbar| (infinity when Kbar = 0).
double implicit_step_limit(const SdeProblem& problem) noexcept;

/// Allocation-free steppers for ensemble loops. One instance per worker.
class EmStepper {
public:
    explicit EmStepper(const SdeProblem& problem);
    /// Advances `y` in place.
    void step(std::span<double> y, const StepContext& ctx);

private:
    const SdeProblem& problem_;
    Vector drift_;
    Vector diffusion_;
};

/// Reusable implicit solver with its own workspace.
class ImplicitSolver {
public:
    ImplicitSolver(const SdeProblem& problem, ImplicitSolverConfig cfg);

    /// Solves x = f(x, t) dt + b.
    ImplicitSolveReport solve(double t, std::span<const double> b, double dt);
    /// Fills `x` in place; returns the final residual. Avoids the report's allocation.
    double solve_into(double t, std::span<const double> b, double dt, std::span<double> x,
                      int* iterations = nullptr, bool* used_fallback = nullptr);

    const ImplicitSolverConfig& config() const noexcept { return cfg_; }

private:
    double residual(double t, std::span<const double> x, std::span<const double> b, double dt,
                    std::span<double> out);
    bool newton_direction(double t, std::span<const double> x, double dt);
    bool newton(double t, std::span<const double> b, double dt, std::span<double> x, int& iters,
                double& res);
    bool bisection(double t, std::span<const double> b, double dt, std::span<double> x,
                   double& res);
    bool damped_iteration(double t, std::span<const double> b, double dt, std::span<double> x,
                          int& iters, double& res);

    const SdeProblem& problem_;
    ImplicitSolverConfig cfg_;
    Vector r_, trial_, r_trial_, f_, f_plus_, f_minus_, jac_, delta_, probe_;
};

class BemStepper {
public:
    BemStepper(const SdeProblem& problem, ImplicitSolverConfig cfg);
    /// Advances `z` in place; returns the final residual.
    double step(std::span<double> z, const StepContext& ctx);

private:
    const SdeProblem& problem_;
    ImplicitSolver solver_;
    Vector rhs_;
    Vector diffusion_;
};

}  // namespace polystab
