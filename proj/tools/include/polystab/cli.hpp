#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polystab/mc_harness.hpp"
#include "polystab/sde_model.hpp"
#include "polystab/stability_analysis.hpp"
#include "polystab/verification.hpp"

namespace polystab::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2, kConformance = 3 };

/// Everything `simulate` needs. Mirrors the JSON accepted by --spec.
struct ExperimentSpec {
    ProblemSpec problem{"linear", std::nullopt, std::nullopt, std::nullopt};
    SimConfig sim;
    bool seed_set = false;
    double window_fraction = kDefaultWindowFraction;
    double tolerance = kDefaultSlopeTolerance;
    /// Output prefix: writes <prefix>.csv and <prefix>.json. Empty prints CSV to stdout.
    std::string output_prefix;
    bool envelope = false;
    /// 0 defers to POLYSTAB_THREADS, then to the hardware.
    unsigned workers = 0;
};

/// Reads an ExperimentSpec from JSON. Keys: problem, K1, C, initial_value,
/// scheme, dt, steps, paths, seed, checkpoints, blow_up_cap, strict,
/// solver {residual_tolerance, max_iterations, method, fallback},
/// window_fraction, tolerance, out, envelope, workers. Unknown keys are errors.
ExperimentSpec parse_experiment_spec(std::string_view json_text);

/// Worker count from POLYSTAB_THREADS (0 when unset or invalid).
unsigned workers_from_env();

int cmd_simulate(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

struct AnalyzeOptions {
    std::string csv_path;
    std::optional<std::string> problem;  ///< builtin label supplying K1
    std::optional<double> k1;            ///< overrides the problem's K1
    double window_fraction = kDefaultWindowFraction;
    double tolerance = kDefaultSlopeTolerance;
    std::string json_out;                ///< also write the report here when set
};

/// Fits the decay exponent of a moment CSV and prints a JSON report.
/// Exit 3 when the slope misses the bound, 2 when no fit is possible.
int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err);

struct VerifyGammaOptions {
    std::uint64_t seed = 20240601;
    std::size_t identity_samples = 1000;
    BoundGrid grid;
};

/// Runs the gamma-kernel and proof-bound checks plus `extra`; prints one
/// line per check. Exit 3 if any check fails.
int cmd_verify_gamma(const VerifyGammaOptions& opts, std::ostream& out, std::ostream& err,
                     std::span<const InequalityCheck> extra = {});

struct CounterexampleOptions {
    double dt = 0.1;
    double cap = 1e12;
    std::int64_t k_max = 1000;
    bool monte_carlo = true;
    std::int64_t paths = 1000;
    std::int64_t steps = 200;
    std::uint64_t seed = 1;
    unsigned workers = 0;
};

/// Lower-bound recursion report plus a companion explicit-scheme ensemble.
int cmd_counterexample(const CounterexampleOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace polystab::cli
