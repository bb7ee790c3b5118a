#include "polystab/gamma_kernel.hpp"

#include <array>
#include <cmath>
#include <string>

#include "polystab/error.hpp"

namespace polystab {
namespace {

constexpr double kEulerGamma = 0.5772156649015328606065121;
constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;
constexpr double kStirlingThreshold = 10.0;

// zeta(k) - 1 for k = 2, 3, ...
constexpr std::array<double, 40> kZetaMinusOne = {
    0.644934066848226436472,     0.2020569031595942854,       0.082323233711138191516,
    0.0369277551433699263314,    0.0173430619844491397145,    0.0083492773819228268398,
    0.00407735619794433937869,   0.00200839282608221441785,   0.000994575127818085337146,
    0.000494188604119464558702,  0.000246086553308048298638,  0.000122713347578489146752,
    0.0000612481350587048292585, 0.0000305882363070204935517, 0.0000152822594086518717326,
    0.0000076371976378997622736, 0.00000381729326499983985646, 0.00000190821271655393892566,
    9.53962033872796113152e-7,   4.76932986787806463117e-7,   2.38450502727732990004e-7,
    1.19219925965311073068e-7,   5.96081890512594796124e-8,   2.98035035146522801861e-8,
    1.49015548283650412347e-8,   7.45071178983542949198e-9,   3.72533402478845705482e-9,
    1.8626597235130490064e-9,    9.31327432419668182872e-10,  4.65662906503378407299e-10,
    2.328311833676505492e-10,    1.16415501727005197759e-10,  5.82077208790270088924e-11,
    2.91038504449709968693e-11,  1.45519218910419842359e-11,  7.27595983505748101452e-12,
    3.63797954737865119024e-12,  1.81898965030706594758e-12,  9.09494784026388928253e-13,
    4.5474737830421540268e-13,
};

// B_{2j} / (2j (2j-1)) for j = 1..8
constexpr std::array<double, 8> kStirlingCoeffs = {
    1.0 / 12.0,         -1.0 / 360.0,  1.0 / 1260.0, -1.0 / 1680.0,
    1.0 / 1188.0, -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0,
};

void require_positive_finite(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(what) + " must be positive and finite, got " +
                          std::to_string(x));
    }
}

// sum_{k>=2} (-1)^k (zeta(k)-1) z^k / k, |z| <= 0.5
double zeta_tail_series(double z) {
    double sum = 0.0;
    double power = -z;
    for (std::size_t i = 0; i < kZetaMinusOne.size(); ++i) {
        power *= -z;
        const double term = kZetaMinusOne[i] * power / static_cast<double>(i + 2);
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// ln Gamma(2 + z) for |z| <= 0.5
double log_gamma_two_plus(double z) {
    return z * (1.0 - kEulerGamma) + zeta_tail_series(z);
}

// Stirling correction S(x) = ln Gamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2]
double stirling_correction(double x) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double sum = 0.0;
    for (auto it = kStirlingCoeffs.rbegin(); it != kStirlingCoeffs.rend(); ++it) {
        sum = sum * inv2 + *it;
    }
    return sum * inv;
}

double log_gamma_stirling(double x) {
    return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + stirling_correction(x);
}

}  // namespace

void GammaProductParams::validate() const {
    if (a < 0 || b < 0) throw DomainError("product indices must be nonnegative");
    if (a > b + 1) throw DomainError("product requires a <= b + 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be nonnegative");
    if (!(delta > 0.0) || !(delta * alpha < 1.0)) {
        throw DomainError("delta must satisfy 0 < delta < 1/alpha");
    }
}

double log_gamma(double x) {
    require_positive_finite(x, "log_gamma argument");
    if (x == 1.0 || x == 2.0) return 0.0;
    if (x < 0.5) {
        // ln Gamma(x) = ln Gamma(2 + x) - log1p(x) - ln x
        return log_gamma_two_plus(x) - std::log1p(x) - std::log(x);
    }
    if (x <= 1.5) {
        const double z = x - 1.0;
        return log_gamma_two_plus(z) - std::log1p(z);
    }
    if (x <= 2.5) return log_gamma_two_plus(x - 2.0);
    if (x < kStirlingThreshold) {
        double product = 1.0;
        double y = x;
        while (y > 2.5) {
            y -= 1.0;
            product *= y;
        }
        return std::log(product) + log_gamma_two_plus(y - 2.0);
    }
    return log_gamma_stirling(x);
}

double log_gamma_ratio(double x, double eta) {
    require_positive_finite(x, "log_gamma_ratio argument");
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw DomainError("log_gamma_ratio shift must be nonnegative and finite");
    }
    if (eta == 0.0) return 0.0;
    double shift = 0.0;
    while (x < kStirlingThreshold) {
        shift -= std::log1p(eta / x);
        x += 1.0;
    }
    return shift + (x - 0.5) * std::log1p(eta / x) + eta * std::log(x + eta) - eta +
           (stirling_correction(x + eta) - stirling_correction(x));
}

double product_direct(const GammaProductParams& p) {
    p.validate();
    double product = 1.0;
    for (std::int64_t i = p.a; i <= p.b; ++i) {
        const double factor =
            1.0 - p.alpha * p.delta / (1.0 + (static_cast<double>(i) + p.beta) * p.delta);
        if (!(factor > 0.0)) {
            throw DomainError("product factor at i = " + std::to_string(i) +
                              " is not positive (delta >= 1/alpha?)");
        }
        product *= factor;
    }
    return product;
}

double product_via_gamma(const GammaProductParams& p) {
    p.validate();
    if (p.a == p.b + 1) return 1.0;
    const double offset = 1.0 / p.delta + p.beta - p.alpha;
    const double lower = static_cast<double>(p.a) + offset;
    const double upper = static_cast<double>(p.b) + 1.0 + offset;
    return std::exp(log_gamma_ratio(lower, p.alpha) - log_gamma_ratio(upper, p.alpha));
}

double ratio_power_margin(double x, double eta) {
    require_positive_finite(x, "ratio_power_margin argument");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("eta must be positive");
    if (eta == 1.0) {
        throw DomainError("eta = 1 is the identity Gamma(x+1)/Gamma(x) = x; no strict bound");
    }
    if (x >= kStirlingThreshold) {
        const double u = std::log1p(eta / x);
        return (x + eta - 0.5) * u - eta +
               (stirling_correction(x + eta) - stirling_correction(x));
    }
    return log_gamma_ratio(x, eta) - eta * std::log(x);
}

}  // namespace polystab
