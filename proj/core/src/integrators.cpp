#include "polystab/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polystab/error.hpp"

namespace polystab {
namespace {

constexpr int kLineSearchHalvings = 40;
constexpr int kBracketExpansions = 200;
constexpr int kBisectionSteps = 2000;

double euclid(std::span<const double> v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

// Solves a x = rhs in place (a is n x n row-major, overwritten). False if singular.
bool gauss_solve(std::span<double> a, std::span<double> rhs, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        }
        if (!(std::abs(a[pivot * n + col]) > 0.0)) return false;
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
            std::swap(rhs[col], rhs[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double m = a[r * n + col] / a[col * n + col];
            if (m == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= m * a[col * n + c];
            rhs[r] -= m * rhs[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * rhs[c];
        rhs[i] = s / a[i * n + i];
    }
    return all_finite(rhs);
}

}  // namespace

void StepContext::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step size must be positive");
    if (!std::isfinite(dB)) throw DomainError("Brownian increment must be finite");
    if (k < 0) throw DomainError("step index must be nonnegative");
}

void ImplicitSolverConfig::validate() const {
    if (!(residual_tolerance > 0.0)) throw DomainError("residual tolerance must be positive");
    if (max_iterations <= 0) throw DomainError("max_iterations must be positive");
}

double implicit_step_limit(const SdeProblem& problem) noexcept {
    const double kbar = std::abs(problem.kbar());
    return kbar == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / kbar;
}

// ---------------------------------------------------------------------------

EmStepper::EmStepper(const SdeProblem& problem)
    : problem_(problem), drift_(problem.dimension()), diffusion_(problem.dimension()) {}

void EmStepper::step(std::span<double> y, const StepContext& ctx) {
    const double t = ctx.time();
    problem_.drift(y, t, drift_);
    problem_.diffusion(y, t, diffusion_);
    if (!all_finite(drift_) || !all_finite(diffusion_)) {
        throw StepError("non-finite coefficient in Euler-Maruyama step",
                        Vector(y.begin(), y.end()), ctx.k);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] += drift_[i] * ctx.dt + diffusion_[i] * ctx.dB;
    }
}

Vector em_step(const SdeProblem& problem, std::span<const double> y, const StepContext& ctx) {
    ctx.validate();
    if (y.size() != problem.dimension()) throw DomainError("state has the wrong dimension");
    if (!all_finite(y)) throw DomainError("state must be finite");
    Vector out(y.begin(), y.end());
    EmStepper stepper(problem);
    stepper.step(out, ctx);
    return out;
}

// ---------------------------------------------------------------------------

ImplicitSolver::ImplicitSolver(const SdeProblem& problem, ImplicitSolverConfig cfg)
    : problem_(problem), cfg_(cfg) {
    cfg_.validate();
    const std::size_t n = problem.dimension();
    for (Vector* v : {&r_, &trial_, &r_trial_, &f_, &f_plus_, &f_minus_, &delta_, &probe_}) {
        v->assign(n, 0.0);
    }
    jac_.assign(n * n, 0.0);
}

double ImplicitSolver::residual(double t, std::span<const double> x, std::span<const double> b,
                                double dt, std::span<double> out) {
    problem_.drift(x, t, f_);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - f_[i] * dt - b[i];
    const double r = euclid(out);
    return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
}

bool ImplicitSolver::newton_direction(double t, std::span<const double> x, double dt) {
    const std::size_t n = x.size();
    // Jacobian of F(x) = x - f(x,t) dt - b by central differences.
    for (std::size_t j = 0; j < n; ++j) {
        const double h = std::max(1e-7, 1e-7 * std::abs(x[j]));
        std::copy(x.begin(), x.end(), probe_.begin());
        probe_[j] = x[j] + h;
        const double up = probe_[j];
        problem_.drift(probe_, t, f_plus_);
        probe_[j] = x[j] - h;
        const double down = probe_[j];
        problem_.drift(probe_, t, f_minus_);
        for (std::size_t i = 0; i < n; ++i) {
            const double dfi = (f_plus_[i] - f_minus_[i]) / (up - down);
            jac_[i * n + j] = (i == j ? 1.0 : 0.0) - dt * dfi;
        }
    }
    for (std::size_t i = 0; i < n; ++i) delta_[i] = -r_[i];
    return gauss_solve(jac_, delta_, n);
}

bool ImplicitSolver::newton(double t, std::span<const double> b, double dt, std::span<double> x,
                            int& iters, double& res) {
    const std::size_t n = x.size();
    res = residual(t, x, b, dt, r_);
    bool stepped = false;
    while (res > cfg_.residual_tolerance) {
        if (iters >= cfg_.max_iterations) return false;
        ++iters;
        stepped = true;
        if (!newton_direction(t, x, dt)) return false;

        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < kLineSearchHalvings; ++ls) {
            for (std::size_t i = 0; i < n; ++i) trial_[i] = x[i] + lambda * delta_[i];
            const double r_new = residual(t, trial_, b, dt, r_trial_);
            if (r_new < res) {
                std::copy(trial_.begin(), trial_.end(), x.begin());
                std::swap(r_, r_trial_);
                res = r_new;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) return false;
    }
    // One extra full step once inside the tolerance: the finite-difference
    // Jacobian makes the last accepted iterate only just good enough.
    if (stepped && res > 0.0 && newton_direction(t, x, dt)) {
        for (std::size_t i = 0; i < n; ++i) trial_[i] = x[i] + delta_[i];
        const double r_new = residual(t, trial_, b, dt, r_trial_);
        if (r_new < res) {
            std::copy(trial_.begin(), trial_.end(), x.begin());
            std::swap(r_, r_trial_);
            res = r_new;
        }
    }
    return true;
}

bool ImplicitSolver::bisection(double t, std::span<const double> b, double dt,
                               std::span<double> x, double& res) {
    // F(x) = x - f(x,t) dt - b is strictly increasing on the line.
    auto F = [&](double v) {
        probe_[0] = v;
        problem_.drift(probe_, t, f_);
        return v - f_[0] * dt - b[0];
    };
    double width = std::max(1.0, std::abs(b[0]));
    double lo = b[0] - width;
    double f_lo = F(lo);
    for (int i = 0; f_lo > 0.0 && i < kBracketExpansions; ++i) {
        width *= 2.0;
        lo = b[0] - width;
        f_lo = F(lo);
    }
    width = std::max(1.0, std::abs(b[0]));
    double hi = b[0] + width;
    double f_hi = F(hi);
    for (int i = 0; f_hi < 0.0 && i < kBracketExpansions; ++i) {
        width *= 2.0;
        hi = b[0] + width;
        f_hi = F(hi);
    }
    if (!(f_lo <= 0.0 && f_hi >= 0.0)) {
        res = std::numeric_limits<double>::infinity();
        return false;
    }
    for (int i = 0; i < kBisectionSteps; ++i) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = F(mid);
        if (std::abs(f_mid) <= cfg_.residual_tolerance) {
            x[0] = mid;
            res = std::abs(f_mid);
            return true;
        }
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if (std::abs(f_lo) <= std::abs(f_hi)) {
        x[0] = lo;
        res = std::abs(f_lo);
    } else {
        x[0] = hi;
        res = std::abs(f_hi);
    }
    return res <= cfg_.residual_tolerance;
}

bool ImplicitSolver::damped_iteration(double t, std::span<const double> b, double dt,
                                      std::span<double> x, int& iters, double& res) {
    const std::size_t n = x.size();
    res = residual(t, x, b, dt, r_);
    double omega = 1.0;
    const int budget = cfg_.max_iterations * 100;
    for (int i = 0; i < budget && res > cfg_.residual_tolerance; ++i) {
        ++iters;
        for (std::size_t k = 0; k < n; ++k) trial_[k] = x[k] - omega * r_[k];
        const double r_new = residual(t, trial_, b, dt, r_trial_);
        if (r_new < res) {
            std::copy(trial_.begin(), trial_.end(), x.begin());
            std::swap(r_, r_trial_);
            res = r_new;
            omega = std::min(1.0, omega * 2.0);
        } else {
            omega *= 0.5;
            if (omega < 1e-16) break;
        }
    }
    return res <= cfg_.residual_tolerance;
}

double ImplicitSolver::solve_into(double t, std::span<const double> b, double dt,
                                  std::span<double> x, int* iterations, bool* used_fallback) {
    const std::size_t n = problem_.dimension();
    if (b.size() != n || x.size() != n) throw DomainError("implicit solve: wrong dimension");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("implicit solve: dt must be positive");
    if (!all_finite(b)) throw DomainError("implicit solve: right-hand side must be finite");
    if (!(dt < implicit_step_limit(problem_))) {
        throw PreconditionError("implicit solve needs dt < 1/|Kbar| = " +
                                std::to_string(implicit_step_limit(problem_)) + ", got dt = " +
                                std::to_string(dt));
    }

    int iters = 0;
    bool fell_back = false;
    double res = std::numeric_limits<double>::infinity();
    bool ok = false;

    if (cfg_.method == SolverMethod::bisection) {
        if (n != 1) throw DomainError("bisection solver needs a scalar problem");
        ok = bisection(t, b, dt, x, res);
    } else {
        std::copy(b.begin(), b.end(), x.begin());
        ok = newton(t, b, dt, x, iters, res);
        if (!ok && cfg_.fallback != SolverFallback::none) {
            fell_back = true;
            Vector newton_x(x.begin(), x.end());
            const double newton_res = res;
            if (cfg_.fallback == SolverFallback::bisection && n == 1) {
                ok = bisection(t, b, dt, x, res);
            } else {
                ok = damped_iteration(t, b, dt, x, iters, res);
            }
            if (!ok && newton_res < res) {
                std::copy(newton_x.begin(), newton_x.end(), x.begin());
                res = newton_res;
            }
        }
    }
    if (iterations) *iterations = iters;
    if (used_fallback) *used_fallback = fell_back;
    if (!ok) {
        throw SolverError("implicit solve did not reach residual " +
                              std::to_string(cfg_.residual_tolerance) + " (best " +
                              std::to_string(res) + ")",
                          Vector(x.begin(), x.end()), res);
    }
    return res;
}

ImplicitSolveReport ImplicitSolver::solve(double t, std::span<const double> b, double dt) {
    ImplicitSolveReport report;
    report.root.assign(problem_.dimension(), 0.0);
    report.residual =
        solve_into(t, b, dt, report.root, &report.iterations, &report.used_fallback);
    return report;
}

ImplicitSolveReport solve_implicit_report(const SdeProblem& problem, double t,
                                          std::span<const double> b, double dt,
                                          const ImplicitSolverConfig& cfg) {
    ImplicitSolver solver(problem, cfg);
    return solver.solve(t, b, dt);
}

Vector solve_implicit(const SdeProblem& problem, double t, std::span<const double> b, double dt,
                      const ImplicitSolverConfig& cfg) {
    return solve_implicit_report(problem, t, b, dt, cfg).root;
}

// ---------------------------------------------------------------------------

BemStepper::BemStepper(const SdeProblem& problem, ImplicitSolverConfig cfg)
    : problem_(problem),
      solver_(problem, cfg),
      rhs_(problem.dimension()),
      diffusion_(problem.dimension()) {}

double BemStepper::step(std::span<double> z, const StepContext& ctx) {
    if (solver_.config().strict && !(ctx.dt < 1.0 / problem_.k1())) {
        throw PreconditionError("strict mode: backward Euler-Maruyama needs dt < 1/K1");
    }
    problem_.diffusion(z, ctx.time(), diffusion_);
    if (!all_finite(diffusion_)) {
        throw StepError("non-finite diffusion in backward Euler-Maruyama step",
                        Vector(z.begin(), z.end()), ctx.k);
    }
    for (std::size_t i = 0; i < z.size(); ++i) rhs_[i] = z[i] + diffusion_[i] * ctx.dB;
    return solver_.solve_into(ctx.next_time(), rhs_, ctx.dt, z);
}

Vector bem_step(const SdeProblem& problem, std::span<const double> z, const StepContext& ctx,
                const ImplicitSolverConfig& cfg) {
    ctx.validate();
    if (z.size() != problem.dimension()) throw DomainError("state has the wrong dimension");
    if (!all_finite(z)) throw DomainError("state must be finite");
    Vector out(z.begin(), z.end());
    BemStepper stepper(problem, cfg);
    stepper.step(out, ctx);
    return out;
}

}  // namespace polystab
