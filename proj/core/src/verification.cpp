#include "polystab/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polystab/counter_rng.hpp"
#include "polystab/gamma_kernel.hpp"
#include "polystab/stability_analysis.hpp"

namespace polystab {
namespace {

constexpr std::uint64_t kIdentityStream = 0x6A77A;

template <typename... Args>
std::string label(const Args&... parts) {
    std::ostringstream os;
    os.precision(17);
    (os << ... << parts);
    return os.str();
}

std::string params_label(const GammaProductParams& p) {
    return label("a=", p.a, " b=", p.b, " alpha=", p.alpha, " beta=", p.beta, " delta=", p.delta);
}

GammaProductParams random_params(std::uint64_t seed, std::uint64_t i) {
    auto u = [&](std::uint64_t j) { return counter_uniform(seed, kIdentityStream, 8 * i + j); };
    GammaProductParams p;
    const auto x = static_cast<std::int64_t>(u(0) * 10001.0);
    const auto y = static_cast<std::int64_t>(u(1) * 10001.0);
    p.a = std::min<std::int64_t>(std::min(x, y), 10000);
    p.b = std::min<std::int64_t>(std::max(x, y), 10000);
    p.alpha = 5.0 * u(2);                       // (0, 5]
    p.beta = 10.0 * (1.0 - u(3));               // [0, 10)
    p.delta = 0.99 / p.alpha * (1.0 - u(4));    // (0, 0.99/alpha)
    if (p.delta == 0.0) p.delta = 0.5 / p.alpha;
    return p;
}

}  // namespace

std::vector<InequalityResult> run_checks(std::span<const InequalityCheck> checks, double slack) {
    std::vector<InequalityResult> out;
    out.reserve(checks.size());
    for (const auto& check : checks) {
        MarginAccumulator acc(slack, check.strict);
        check.run(acc);
        out.push_back({check.name, acc.worst_margin(), acc.worst_point(), acc.evaluated(),
                       acc.failures(), acc.failures() == 0 && acc.evaluated() > 0});
    }
    return out;
}

std::vector<InequalityCheck> gamma_kernel_checks(std::uint64_t seed, std::size_t identity_samples) {
    std::vector<InequalityCheck> checks;

    checks.push_back({"product identity (relative error <= 1e-10)", [=](MarginAccumulator& acc) {
                          for (std::size_t i = 0; i < identity_samples; ++i) {
                              const auto p = random_params(seed, i);
                              const double direct = product_direct(p);
                              const double via = product_via_gamma(p);
                              acc.add(1e-10 - std::abs(via - direct) / direct,
                                      [&] { return params_label(p); });
                          }
                      }});

    static const double xs[] = {0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1e4};
    static const double below[] = {0.1, 0.25, 0.5, 0.75, 0.9};
    static const double above[] = {1.1, 1.5, 2.0, 3.7, 5.0};
    checks.push_back({"ratio-power sign, 0 < eta < 1",
                      [](MarginAccumulator& acc) {
                          for (double x : xs) {
                              for (double eta : below) {
                                  acc.add(-ratio_power_margin(x, eta),
                                          [&] { return label("x=", x, " eta=", eta); });
                              }
                          }
                      },
                      true});
    checks.push_back({"ratio-power sign, eta > 1",
                      [](MarginAccumulator& acc) {
                          for (double x : xs) {
                              for (double eta : above) {
                                  acc.add(ratio_power_margin(x, eta),
                                          [&] { return label("x=", x, " eta=", eta); });
                              }
                          }
                      },
                      true});

    checks.push_back({"log-gamma recurrence (relative 1e-12)", [](MarginAccumulator& acc) {
                          for (double x = 0.5; x <= 1e5; x *= 1.037) {
                              const double lhs = log_gamma(x + 1.0) - log_gamma(x);
                              const double scale = std::max(1.0, std::abs(log_gamma(x + 1.0)));
                              acc.add(1e-12 - std::abs(lhs - std::log(x)) / scale,
                                      [&] { return label("x=", x); });
                          }
                      }});

    checks.push_back({"empty product equals 1", [](MarginAccumulator& acc) {
                          for (std::int64_t b : {0, 1, 17, 1000}) {
                              for (double alpha : {0.5, 2.0, 4.9}) {
                                  GammaProductParams p{b + 1, b, alpha, 0.5, 0.9 / alpha};
                                  acc.add(-std::abs(product_direct(p) - 1.0) -
                                              std::abs(product_via_gamma(p) - 1.0),
                                          [&] { return params_label(p); });
                              }
                          }
                      }});

    checks.push_back({"product decreasing in upper index",
                      [](MarginAccumulator& acc) {
                          for (double alpha : {0.5, 1.0, 3.0}) {
                              GammaProductParams p{3, 3, alpha, 0.25, 0.9 / alpha};
                              double prev = product_direct(p);
                              for (p.b = 4; p.b <= 200; ++p.b) {
                                  const double cur = product_direct(p);
                                  acc.add(prev - cur, [&] { return params_label(p); });
                                  prev = cur;
                              }
                          }
                      },
                      true});
    return checks;
}

std::vector<InequalityCheck> proof_bound_checks(const BoundGrid& grid) {
    std::vector<InequalityCheck> checks;

    checks.push_back({"EM product bound", [grid](MarginAccumulator& acc) {
                          for (double dt : grid.dts)
                              for (double k1 : grid.em_k1)
                                  for (auto k = grid.k_min; k <= grid.k_max; ++k)
                                      acc.add(em_product_bound_margin(k, dt, k1), [&] {
                                          return label("k=", k, " dt=", dt, " K1=", k1);
                                      });
                      }});

    checks.push_back({"EM product bound by direct multiplication", [grid](MarginAccumulator& acc) {
                          for (double dt : grid.dts)
                              for (double k1 : grid.em_k1) {
                                  double log_prod = 0.0;
                                  for (std::int64_t k = 1; k <= grid.k_max; ++k) {
                                      const double i = static_cast<double>(k - 1);
                                      log_prod += 2.0 * std::log1p(-k1 * dt / (1.0 + i * dt));
                                      if (k < grid.k_min || !(static_cast<double>(k) > k1)) continue;
                                      const double log_rhs =
                                          -2.0 * k1 * std::log((static_cast<double>(k) - k1) * dt + 1.0);
                                      acc.add(log_rhs - log_prod, [&] {
                                          return label("k=", k, " dt=", dt, " K1=", k1);
                                      });
                                  }
                              }
                      }});

    checks.push_back({"EM sum bound", [grid](MarginAccumulator& acc) {
                          for (double dt : grid.dts)
                              for (double k1 : grid.em_k1)
                                  for (auto k = grid.k_min; k <= grid.k_max; ++k)
                                      for (std::int64_t r = 0; r < k; ++r)
                                          acc.add(em_sum_bound_margin(k, r, dt, k1), [&] {
                                              return label("k=", k, " r=", r, " dt=", dt, " K1=", k1);
                                          });
                      }});

    checks.push_back({"BEM product bound", [grid](MarginAccumulator& acc) {
                          for (double dt : grid.dts)
                              for (double k1 : grid.bem_k1)
                                  for (auto k = grid.k_min; k <= grid.k_max; ++k)
                                      acc.add(bem_product_bound_margin(k, dt, k1), [&] {
                                          return label("k=", k, " dt=", dt, " K1=", k1);
                                      });
                      }});

    checks.push_back({"BEM sum bound", [grid](MarginAccumulator& acc) {
                          for (double dt : grid.dts)
                              for (double k1 : grid.bem_k1)
                                  for (auto k = grid.k_min; k <= grid.k_max; ++k)
                                      for (std::int64_t r = 0; r < k; ++r)
                                          acc.add(bem_sum_bound_margin(k, r, dt, k1), [&] {
                                              return label("k=", k, " r=", r, " dt=", dt, " K1=", k1);
                                          });
                      }});

    checks.push_back({"gamma floor split", [grid](MarginAccumulator& acc) {
                          std::vector<double> kappas = grid.em_k1;
                          for (double k1 : grid.bem_k1) kappas.push_back(2.0 * k1);
                          for (double dt : grid.dts)
                              for (double kappa : kappas)
                                  for (auto k = grid.k_min; k <= grid.k_max; ++k) {
                                      const double y = static_cast<double>(k) + 1.0 / dt - kappa / 2.0;
                                      if (!(y > 0.0)) continue;
                                      acc.add(gamma_floor_split_margin(y, kappa), [&] {
                                          return label("y=", y, " kappa=", kappa);
                                      });
                                  }
                      }});
    return checks;
}

}  // namespace polystab
