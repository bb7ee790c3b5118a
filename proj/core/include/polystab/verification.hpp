#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace polystab {

/// Collects signed margins (nonnegative = inequality holds) and remembers the
/// worst one. Point labels are built only when needed.
class MarginAccumulator {
public:
    MarginAccumulator(double slack, bool strict) : slack_(slack), strict_(strict) {}

    template <typename LabelFn>
    void add(double margin, LabelFn&& label) {
        ++evaluated_;
        const bool ok = strict_ ? margin > 0.0 : margin >= -slack_;
        if (!ok) ++failures_;
        // NaN margins always count as worst.
        if (!(margin >= worst_margin_)) {
            worst_margin_ = margin;
            worst_point_ = label();
        }
    }

    double worst_margin() const noexcept { return worst_margin_; }
    const std::string& worst_point() const noexcept { return worst_point_; }
    std::size_t evaluated() const noexcept { return evaluated_; }
    std::size_t failures() const noexcept { return failures_; }

private:
    double slack_;
    bool strict_;
    double worst_margin_ = std::numeric_limits<double>::infinity();
    std::string worst_point_;
    std::size_t evaluated_ = 0;
    std::size_t failures_ = 0;
};

struct InequalityCheck {
    std::string name;
    std::function<void(MarginAccumulator&)> run;
    /// Require margin > 0 instead of margin >= -slack.
    bool strict = false;
};

struct InequalityResult {
    std::string name;
    double worst_margin = 0.0;
    std::string worst_point;
    std::size_t evaluated = 0;
    std::size_t failures = 0;
    bool pass = false;
};

inline constexpr double kDefaultMarginSlack = 1e-12;

std::vector<InequalityResult> run_checks(std::span<const InequalityCheck> checks,
                                         double slack = kDefaultMarginSlack);

/// Log-gamma and finite-product properties: product identity on random
/// parameter sets, sign of the ratio-power margin on a fixed grid, the
/// log-gamma recurrence, empty products and monotonicity in the upper index.
std::vector<InequalityCheck> gamma_kernel_checks(std::uint64_t seed = 20240601,
                                                 std::size_t identity_samples = 1000);

struct BoundGrid {
    std::int64_t k_min = 2;
    std::int64_t k_max = 200;
    std::vector<double> dts{0.05, 0.1, 0.2};
    std::vector<double> em_k1{1.0, 1.5, 2.0, 2.7, 3.0};
    std::vector<double> bem_k1{0.75, 1.0, 1.5, 2.0, 2.7, 3.0};
};

/// Gamma-ratio inequalities from the decay proofs over the grid, with all
/// 0 <= r < k for the two-index bounds.
std::vector<InequalityCheck> proof_bound_checks(const BoundGrid& grid = {});

}  // namespace polystab
