#include "polystab/stability_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polystab/error.hpp"
#include "polystab/gamma_kernel.hpp"

namespace polystab {
namespace {

constexpr std::size_t kMinFitPoints = 10;

void check_envelope_args(std::int64_t k, double dt, double c, double m0) {
    if (k < 0) throw DomainError("envelope: step index must be nonnegative");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("envelope: dt must be positive");
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("envelope: C must be nonnegative");
    if (!(m0 >= 0.0) || !std::isfinite(m0)) throw DomainError("envelope: m0 must be nonnegative");
}

void check_bound_args(double dt, double k1) {
    if (!(dt > 0.0) || !(k1 > 0.0)) throw DomainError("bound: dt and K1 must be positive");
}

}  // namespace

DecayEstimate estimate_decay_exponent(std::span<const MomentPoint> points, double window_fraction,
                                      double k1, double tolerance) {
    if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
        throw DomainError("window_fraction must lie in (0, 1]");
    }
    if (points.empty()) throw EstimationError("moment series is empty");

    double u_min = std::numeric_limits<double>::infinity();
    double u_max = -u_min;
    for (const auto& p : points) {
        if (!(p.t >= 0.0) || !std::isfinite(p.t)) {
            throw EstimationError("checkpoint times must be finite and nonnegative");
        }
        const double u = std::log1p(p.t);
        u_min = std::min(u_min, u);
        u_max = std::max(u_max, u);
    }
    const double u_lo = u_max - window_fraction * (u_max - u_min);

    DecayEstimate est;
    est.tolerance = tolerance;
    est.theoretical_bound = -(2.0 * k1 - 1.0);
    std::vector<double> us, vs;
    est.t_lo = std::numeric_limits<double>::infinity();
    est.t_hi = -est.t_lo;
    for (const auto& p : points) {
        const double u = std::log1p(p.t);
        if (u < u_lo) continue;
        if (p.blown_up > 0) {
            throw EstimationError("blown-up paths at k = " + std::to_string(p.k) +
                                  " inside the fit window");
        }
        if (!(p.mean_square > 0.0) || !std::isfinite(p.mean_square)) {
            est.warnings.push_back("excluded k = " + std::to_string(p.k) +
                                   ": mean_square is not positive");
            continue;
        }
        us.push_back(u);
        vs.push_back(std::log(p.mean_square));
        est.t_lo = std::min(est.t_lo, p.t);
        est.t_hi = std::max(est.t_hi, p.t);
    }
    const std::size_t n = us.size();
    if (n < kMinFitPoints) {
        throw EstimationError("fit window holds " + std::to_string(n) + " usable points, need " +
                              std::to_string(kMinFitPoints));
    }

    double u_bar = 0.0, v_bar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        u_bar += us[i];
        v_bar += vs[i];
    }
    u_bar /= static_cast<double>(n);
    v_bar /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (us[i] - u_bar) * (us[i] - u_bar);
        sxy += (us[i] - u_bar) * (vs[i] - v_bar);
    }
    if (!(sxx > 0.0)) throw EstimationError("fit window spans a single time");
    est.slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = vs[i] - v_bar - est.slope * (us[i] - u_bar);
        ssr += r * r;
    }
    est.slope_std_error = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    est.points_used = n;
    est.conforms = est.slope <= est.theoretical_bound + tolerance;
    return est;
}

DecayEstimate estimate_decay_exponent(const MomentSeries& series, double window_fraction,
                                      double k1, double tolerance) {
    return estimate_decay_exponent(series.points, window_fraction, k1, tolerance);
}

double em_envelope(std::int64_t k, double dt, double k1, double c, double m0) {
    check_envelope_args(k, dt, c, m0);
    if (!(k1 >= 1.0)) throw DomainError("EM envelope needs K1 >= 1");
    if (!(dt < 1.0 / (2.0 + k1))) throw DomainError("EM envelope needs dt < 1/(2+K1)");
    const double c1 = 1.0 + dt;
    return std::pow(static_cast<double>(k) * dt + 1.0, 1.0 - 2.0 * k1) *
           (m0 + c * c * std::pow(c1, 2.0 * k1));
}

double bem_envelope(std::int64_t k, double dt, double k1, double c, double m0, double kbar) {
    check_envelope_args(k, dt, c, m0);
    if (!(k1 > 0.5)) throw DomainError("BEM envelope needs K1 > 0.5");
    if (!(dt < 1.0 / k1)) throw DomainError("BEM envelope needs dt < 1/K1");
    if (kbar != 0.0 && !(dt < 1.0 / std::abs(kbar))) {
        throw DomainError("BEM envelope needs dt < 1/|Kbar|");
    }
    const double c2 = 1.0 + (1.0 + 2.0 * k1) * dt;
    return std::pow(static_cast<double>(k + 1) * dt + 1.0, 1.0 - 2.0 * k1) *
           (m0 + c * c * std::pow(c2, 2.0 * k1));
}

std::vector<double> envelope_column(std::span<const MomentPoint> points, Scheme scheme,
                                    double dt, double k1, double c, double m0, double kbar) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        out.push_back(scheme == Scheme::em ? em_envelope(p.k, dt, k1, c, m0)
                                           : bem_envelope(p.k, dt, k1, c, m0, kbar));
    }
    return out;
}

RecurrenceCheck em_recurrence_bound(std::span<const MomentPoint> points, double dt, double k1,
                                    double c, double n_sigma) {
    if (!(dt > 0.0) || !(k1 > 0.0)) throw DomainError("recurrence: dt and K1 must be positive");
    if (!(dt * k1 < 1.0)) throw DomainError("recurrence needs dt K1 < 1");
    RecurrenceCheck out;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto& cur = points[i];
        const auto& nxt = points[i + 1];
        if (nxt.k != cur.k + 1) {
            ++out.skipped;
            continue;
        }
        const double s = 1.0 + static_cast<double>(cur.k) * dt;
        const double a = 1.0 - k1 * dt / s;
        const double bound = a * a * cur.mean_square + c * c * std::pow(s, -2.0 * k1) * dt;
        const double allowance =
            n_sigma * std::hypot(nxt.std_error, a * a * cur.std_error);
        ++out.checked;
        if (nxt.mean_square - bound > allowance) {
            out.violations.push_back({cur.k, nxt.mean_square, bound, allowance});
        }
    }
    return out;
}

double counterexample_threshold(std::int64_t k, double dt) {
    const double kd = static_cast<double>(k);
    return std::sqrt((1.0 + kd * dt) / dt) * (kd + 2.0);
}

std::optional<std::int64_t> LowerBoundSequence::first_step_exceeding(double cap) const {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > cap) return static_cast<std::int64_t>(i + 1);
    }
    return diverged_at;
}

LowerBoundSequence counterexample_lower_bound(double dt, std::int64_t k_max) {
    if (!(dt > 0.0 && dt < 0.5)) throw DomainError("counterexample recursion needs dt in (0, 0.5)");
    if (k_max < 1) throw DomainError("k_max must be positive");
    LowerBoundSequence seq;
    seq.dt = dt;
    double b = 3.0 * std::sqrt((1.0 + dt) / dt);
    for (std::int64_t k = 1;; ++k) {
        if (!std::isfinite(b)) {
            seq.diverged_at = k;
            break;
        }
        seq.values.push_back(b);
        // b_1 sits exactly on the threshold, so allow for rounding.
        if (!seq.invariant_failure && b < counterexample_threshold(k, dt) * (1.0 - 1e-12)) {
            seq.invariant_failure = k;
        }
        if (k == k_max) break;
        b = dt / (1.0 + static_cast<double>(k) * dt) * b * b * b - b - 1.0;
    }
    return seq;
}

double em_product_bound_margin(std::int64_t k, double dt, double k1) {
    check_bound_args(dt, k1);
    const double x = static_cast<double>(k) + 1.0 / dt - k1;
    const double x0 = 1.0 / dt - k1;
    if (!(x0 > 0.0)) throw DomainError("bound needs dt < 1/K1");
    const double log_lhs = 2.0 * (log_gamma_ratio(x0, k1) - log_gamma_ratio(x, k1));
    const double log_rhs = -2.0 * k1 * std::log((static_cast<double>(k) - k1) * dt + 1.0);
    return log_rhs - log_lhs;
}

double em_sum_bound_margin(std::int64_t k, std::int64_t r, double dt, double k1) {
    check_bound_args(dt, k1);
    if (r < 0 || r >= k) throw DomainError("bound needs 0 <= r < k");
    const double x = static_cast<double>(k) + 1.0 / dt - k1;
    const double xr = static_cast<double>(r) + 1.0 + 1.0 / dt - k1;
    if (!(1.0 / dt - k1 > 0.0)) throw DomainError("bound needs dt < 1/K1");
    const double log_lhs = 2.0 * (log_gamma_ratio(xr, k1) - log_gamma_ratio(x, k1));
    const double log_rhs = -2.0 * k1 * std::log((static_cast<double>(k) - k1) * dt + 1.0) +
                           2.0 * k1 * std::log(static_cast<double>(r + 1) * dt + 1.0);
    return log_rhs - log_lhs;
}

double bem_product_bound_margin(std::int64_t k, double dt, double k1) {
    check_bound_args(dt, k1);
    const double two_k1 = 2.0 * k1;
    const double log_lhs = log_gamma_ratio(1.0 + 1.0 / dt, two_k1) -
                           log_gamma_ratio(static_cast<double>(k) + 1.0 + 1.0 / dt, two_k1);
    const double log_rhs = -two_k1 * std::log(static_cast<double>(k + 1) * dt + 1.0) +
                           two_k1 * std::log((1.0 + two_k1) * dt + 1.0);
    return log_rhs - log_lhs;
}

double bem_sum_bound_margin(std::int64_t k, std::int64_t r, double dt, double k1) {
    check_bound_args(dt, k1);
    if (r < 0 || r >= k) throw DomainError("bound needs 0 <= r < k");
    const double two_k1 = 2.0 * k1;
    const double log_lhs =
        log_gamma_ratio(static_cast<double>(r) + 1.0 + 1.0 / dt, two_k1) -
        log_gamma_ratio(static_cast<double>(k) + 1.0 + 1.0 / dt, two_k1);
    const double log_rhs =
        -two_k1 * std::log(static_cast<double>(k + 1) * dt + 1.0) +
        two_k1 * std::log((static_cast<double>(r) + 1.0 + two_k1) * dt + 1.0);
    return log_rhs - log_lhs;
}

double gamma_floor_split_margin(double y, double kappa) {
    if (!(y > 0.0) || !(kappa >= 0.0)) throw DomainError("floor split needs y > 0, kappa >= 0");
    const double whole = std::floor(kappa);
    double rhs = (kappa - whole) * std::log(y);
    for (int i = 1; i <= static_cast<int>(whole); ++i) rhs += std::log(y + kappa - i);
    return rhs - log_gamma_ratio(y, kappa);
}

}  // namespace polystab
