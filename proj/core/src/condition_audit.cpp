#include <algorithm>
#include <cmath>
#include <sstream>

#include "polystab/counter_rng.hpp"
#include "polystab/error.hpp"
#include "polystab/sde_model.hpp"

namespace polystab {
namespace {

// Margins within this fraction of the compared magnitudes count as rounding.
constexpr double kRoundingAllowance = 1e-12;
constexpr std::uint64_t kPairStream = 0xA0D17ULL;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::string describe(std::span<const double> x, double t) {
    std::ostringstream os;
    os.precision(17);
    os << "x = (";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << "), t = " << t;
    return os.str();
}

void require_finite(std::span<const double> v, const char* what, std::span<const double> x,
                    double t) {
    for (double e : v) {
        if (!std::isfinite(e)) {
            throw DomainError(std::string("audit: ") + what + " is not finite at " +
                              describe(x, t));
        }
    }
}

// `extra_scale` covers cancellation inside lhs (pair differences).
void record(ConditionMargin& m, double lhs, double rhs, std::span<const double> x, double t,
            std::span<const double> partner = {}, double extra_scale = 0.0) {
    const double margin = lhs - rhs;
    ++m.samples;
    const double scale = std::max({std::abs(lhs), std::abs(rhs), extra_scale});
    if (margin > kRoundingAllowance * scale) m.pass = false;
    if (margin > m.worst_margin) {
        m.worst_margin = margin;
        m.worst_state.assign(x.begin(), x.end());
        m.worst_partner.assign(partner.begin(), partner.end());
        m.worst_time = t;
    }
}

}  // namespace

double ConditionAuditReport::audited_k1() const noexcept {
    return std::min(max_k1_one_sided, max_k1_diffusion);
}

bool ConditionAuditReport::all_pass() const noexcept {
    return linear_growth.pass && one_sided_decay.pass && diffusion_decay.pass &&
           one_sided_lipschitz.pass;
}

AuditGrid make_audit_grid(std::size_t dimension, double lo, double hi,
                          std::size_t points_per_axis, std::vector<double> times) {
    if (dimension == 0 || points_per_axis < 2 || !(lo < hi)) {
        throw DomainError("audit grid needs dimension > 0, >= 2 points per axis and lo < hi");
    }
    AuditGrid grid;
    grid.times = std::move(times);
    grid.pair_lo = lo;
    grid.pair_hi = hi;
    const std::size_t axes = std::min<std::size_t>(dimension, 3);
    std::size_t total = 1;
    for (std::size_t a = 0; a < axes; ++a) total *= points_per_axis;
    grid.states.reserve(total);
    const double step = (hi - lo) / static_cast<double>(points_per_axis - 1);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Vector x(dimension, 0.0);
        std::size_t rest = flat;
        for (std::size_t a = 0; a < axes; ++a) {
            x[a] = lo + step * static_cast<double>(rest % points_per_axis);
            rest /= points_per_axis;
        }
        grid.states.push_back(std::move(x));
    }
    return grid;
}

AuditGrid default_audit_grid(std::size_t dimension) {
    return make_audit_grid(dimension, -100.0, 100.0, 33, {0.0, 0.1, 1.0, 10.0, 100.0, 1e4});
}

ConditionAuditReport audit_conditions(const SdeProblem& problem, const AuditGrid& grid) {
    if (grid.states.empty() || grid.times.empty()) {
        throw DomainError("audit needs non-empty state and time samples");
    }
    for (double t : grid.times) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("audit times must be >= 0");
    }
    const std::size_t n = problem.dimension();
    for (const auto& x : grid.states) {
        if (x.size() != n) throw DomainError("audit state has the wrong dimension");
    }

    ConditionAuditReport report;
    report.linear_growth.condition = "linear-growth";
    report.one_sided_decay.condition = "one-sided-decay";
    report.diffusion_decay.condition = "diffusion-decay";
    report.one_sided_lipschitz.condition = "one-sided-lipschitz";

    const double k1 = problem.k1();
    const double c = problem.c();
    Vector f(n), g(n);

    for (double t : grid.times) {
        const double s = 1.0 + t;
        const double diffusion_bound = c * std::pow(s, -k1);
        for (const auto& x : grid.states) {
            problem.drift(x, t, f);
            problem.diffusion(x, t, g);
            require_finite(f, "drift", x, t);
            require_finite(g, "diffusion", x, t);

            const double xn = norm(x);
            const double xf = dot(x, f);
            const double gn = norm(g);
            record(report.linear_growth, norm(f), k1 * xn / s, x, t);
            record(report.one_sided_decay, xf, -k1 * xn * xn / s, x, t);
            record(report.diffusion_decay, gn, diffusion_bound, x, t);

            if (xn > 0.0) {
                report.max_k1_one_sided =
                    std::min(report.max_k1_one_sided, -xf * s / (xn * xn));
            }
            if (gn > 0.0) {
                if (t > 0.0) {
                    report.max_k1_diffusion =
                        std::min(report.max_k1_diffusion, std::log(c / gn) / std::log(s));
                } else if (gn > c) {
                    report.max_k1_diffusion = -std::numeric_limits<double>::infinity();
                }
            }
        }
    }

    // Pair condition: random pairs in the sampling box, keyed so the audit is reproducible.
    Vector x(n), y(n), fy(n), d(n), df(n);
    const double width = grid.pair_hi - grid.pair_lo;
    std::uint64_t index = 0;
    for (double t : grid.times) {
        const double s = 1.0 + t;
        for (std::size_t p = 0; p < grid.lipschitz_pairs_per_time; ++p) {
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = grid.pair_lo + width * counter_uniform(grid.pair_seed, kPairStream, index++);
                y[i] = grid.pair_lo + width * counter_uniform(grid.pair_seed, kPairStream, index++);
            }
            problem.drift(x, t, f);
            problem.drift(y, t, fy);
            require_finite(f, "drift", x, t);
            require_finite(fy, "drift", y, t);
            for (std::size_t i = 0; i < n; ++i) {
                d[i] = x[i] - y[i];
                df[i] = f[i] - fy[i];
            }
            record(report.one_sided_lipschitz, dot(d, df), problem.kbar() * dot(d, d) / s, x, t, y,
                   norm(d) * (norm(f) + norm(fy)));
        }
    }
    return report;
}

}  // namespace polystab
