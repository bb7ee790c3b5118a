#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polystab/mc_harness.hpp"

namespace polystab {

/// Least-squares fit of log(mean_square) against log(1+t) over a tail window.
struct DecayEstimate {
    double slope = 0.0;
    double slope_std_error = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double theoretical_bound = 0.0;  ///< -(2 K1 - 1)
    double tolerance = 0.0;
    bool conforms = false;           ///< slope <= theoretical_bound + tolerance
    std::size_t points_used = 0;
    std::vector<std::string> warnings;
};

inline constexpr double kDefaultWindowFraction = 0.5;
inline constexpr double kDefaultSlopeTolerance = 0.15;

/// Fits over checkpoints whose log(1+t) lies in the final `window_fraction`
/// of the series' log-time range. Zero means are dropped with a warning.
/// Throws EstimationError when the window holds blown-up paths or fewer than
/// 10 usable points, DomainError for window_fraction outside (0, 1].
DecayEstimate estimate_decay_exponent(std::span<const MomentPoint> points, double window_fraction,
                                      double k1, double tolerance = kDefaultSlopeTolerance);
DecayEstimate estimate_decay_exponent(const MomentSeries& series, double window_fraction,
                                      double k1, double tolerance = kDefaultSlopeTolerance);

/// Mean-square envelope for the explicit scheme:
/// (k dt + 1)^(1 - 2 K1) (m0 + C^2 (1 + dt)^(2 K1)).
/// Requires K1 >= 1, 0 < dt < 1/(2 + K1), C >= 0, m0 >= 0, k >= 0.
double em_envelope(std::int64_t k, double dt, double k1, double c, double m0);

/// Mean-square envelope for the backward scheme:
/// ((k+1) dt + 1)^(1 - 2 K1) (m0 + C^2 (1 + (1 + 2 K1) dt)^(2 K1)).
/// Requires K1 > 0.5 and dt < 1/K1; a nonzero `kbar` also needs dt < 1/|kbar|.
double bem_envelope(std::int64_t k, double dt, double k1, double c, double m0, double kbar = 0.0);

/// The scheme's envelope evaluated at each checkpoint, for the CSV column.
std::vector<double> envelope_column(std::span<const MomentPoint> points, Scheme scheme,
                                    double dt, double k1, double c, double m0, double kbar = 0.0);

struct RecurrenceViolation {
    std::int64_t k = 0;
    double observed = 0.0;   ///< mean_square at k+1
    double bound = 0.0;      ///< right-hand side built from mean_square at k
    double allowance = 0.0;  ///< n_sigma combined standard errors
};

struct RecurrenceCheck {
    std::vector<RecurrenceViolation> violations;
    std::size_t checked = 0;
    std::size_t skipped = 0;  ///< neighbouring checkpoints more than one step apart
};

/// Checks m(k+1) <= (1 - K1 dt/(1 + k dt))^2 m(k) + C^2 (1 + k dt)^(-2 K1) dt
/// on every pair of checkpoints one step apart, allowing n_sigma combined
/// standard errors. Requires dt K1 < 1.
RecurrenceCheck em_recurrence_bound(std::span<const MomentPoint> points, double dt, double k1,
                                    double c, double n_sigma = 4.0);

/// Lower-bound sequence for the explicit scheme on the cubic counterexample:
/// b_1 = 3 sqrt((1+dt)/dt), b_{k+1} = dt/(1 + k dt) b_k^3 - b_k - 1.
struct LowerBoundSequence {
    double dt = 0.0;
    std::vector<double> values;  ///< values[i] is b_{i+1}; finite entries only
    /// Step whose value overflowed, if the recursion ran past the double range.
    std::optional<std::int64_t> diverged_at;
    /// First step where b_k fell below the induction threshold, if any.
    std::optional<std::int64_t> invariant_failure;

    bool invariant_holds() const noexcept { return !invariant_failure.has_value(); }
    /// Smallest k with b_k > cap (counting an overflow as exceeding every cap).
    std::optional<std::int64_t> first_step_exceeding(double cap) const;
};

/// sqrt((1 + k dt)/dt) (k + 2).
double counterexample_threshold(std::int64_t k, double dt);

/// Runs the recursion up to k_max terms or until overflow. Throws DomainError
/// unless 0 < dt < 0.5 and k_max >= 1.
LowerBoundSequence counterexample_lower_bound(double dt, std::int64_t k_max);

// ---------------------------------------------------------------------------
// Gamma-ratio bounds used in the decay proofs. Each returns
// ln(upper bound) - ln(bounded quantity); nonnegative means the bound holds.

/// prod_{i<k} (1 - K1 dt/(1 + i dt))^2 against ((k - K1) dt + 1)^(-2 K1).
double em_product_bound_margin(std::int64_t k, double dt, double k1);

/// prod_{r<i<k} (1 - K1 dt/(1 + i dt))^2 against
/// ((k - K1) dt + 1)^(-2 K1) ((r + 1) dt + 1)^(2 K1), for 0 <= r < k.
double em_sum_bound_margin(std::int64_t k, std::int64_t r, double dt, double k1);

/// Gamma(k+1+1/dt) Gamma(1+2K1+1/dt) / (Gamma(k+1+1/dt+2K1) Gamma(1+1/dt))
/// against ((k+1) dt + 1)^(-2 K1) ((1 + 2 K1) dt + 1)^(2 K1).
double bem_product_bound_margin(std::int64_t k, double dt, double k1);

/// Gamma(k+1+1/dt) Gamma(r+1+2K1+1/dt) / (Gamma(k+1+1/dt+2K1) Gamma(r+1+1/dt))
/// against ((k+1) dt + 1)^(-2 K1) ((r + 1 + 2 K1) dt + 1)^(2 K1).
double bem_sum_bound_margin(std::int64_t k, std::int64_t r, double dt, double k1);

/// Splitting kappa into integer and fractional parts:
/// ln Gamma(y+kappa) - ln Gamma(y) <= frac(kappa) ln y + sum_{i=1}^{floor(kappa)} ln(y + kappa - i).
double gamma_floor_split_margin(double y, double kappa);

}  // namespace polystab
