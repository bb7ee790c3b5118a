#pragma once

#include <cstdint>

namespace polystab {

/// Parameters of the finite product
///
///     prod_{i=a}^{b} (1 - alpha*delta / (1 + (i + beta)*delta)).
///
/// `a == b + 1` encodes the empty product (value 1). Valid parameters have
/// `alpha > 0`, `beta >= 0` and `0 < delta < 1/alpha`, which keeps every
/// factor inside (0, 1).
struct GammaProductParams {
    std::int64_t a = 0;
    std::int64_t b = 0;
    double alpha = 1.0;
    double beta = 0.0;
    double delta = 0.5;

    /// Throws DomainError when any invariant fails.
    void validate() const;
    std::int64_t factor_count() const noexcept { return b - a + 1; }
};

/// ln Gamma(x) for x > 0.
///
/// Series in (zeta(k) - 1) on [0.5, 2.5], recurrence below and above that
/// band, Stirling's series for x >= 10. Relative error stays below 1e-13 on
/// (0, 1e6]; x = 1 and x = 2 return exactly 0.
double log_gamma(double x);

/// ln( Gamma(x + eta) / Gamma(x) ) for x > 0, eta >= 0, evaluated without
/// forming either log-gamma so that large arguments keep full precision.
double log_gamma_ratio(double x, double eta);

/// The finite product by direct multiplication. Throws DomainError if a
/// factor is not strictly positive.
double product_direct(const GammaProductParams& p);

/// The same product through the gamma-ratio closed form
/// Gamma(b+1+1/delta+beta-alpha) Gamma(a+1/delta+beta)
/// / (Gamma(b+1+1/delta+beta) Gamma(a+1/delta+beta-alpha)), in log space.
double product_via_gamma(const GammaProductParams& p);

/// ln Gamma(x+eta) - ln Gamma(x) - eta*ln(x).
///
/// Negative for 0 < eta < 1, positive for eta > 1. eta == 1 is rejected
/// since Gamma(x+1)/Gamma(x) == x exactly.
double ratio_power_margin(double x, double eta);

}  // namespace polystab
