#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polystab/integrators.hpp"
#include "polystab/sde_model.hpp"

namespace polystab {

enum class Scheme { em, bem };

std::string_view to_string(Scheme scheme) noexcept;
/// Accepts "em" / "bem" (case-insensitive). Throws DomainError otherwise.
Scheme parse_scheme(std::string_view text);

struct SimConfig {
    double dt = 0.1;
    std::int64_t num_steps = 1000;
    std::int64_t num_paths = 1000;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::em;
    /// Strictly increasing step indices in [0, num_steps]. Empty selects
    /// geometric_checkpoints(num_steps).
    std::vector<std::int64_t> checkpoints;
    double blow_up_cap = 1e12;
    Vector initial_value;
    /// Path ids run from path_id_offset to path_id_offset + num_paths - 1;
    /// disjoint offsets give independent ensembles under one seed.
    std::uint64_t path_id_offset = 0;
    ImplicitSolverConfig solver;
    /// Reject configurations outside the convergence theorems' hypotheses.
    bool strict = false;

    void validate() const;
    /// `checkpoints`, or the geometric default when empty.
    std::vector<std::int64_t> resolved_checkpoints() const;
};

/// About `target` step indices spaced geometrically in [1, num_steps], plus 0.
/// Duplicates from rounding are dropped, so small runs get fewer points.
std::vector<std::int64_t> geometric_checkpoints(std::int64_t num_steps, std::size_t target = 50);

/// Brownian increment for (seed, path_id, step): sqrt(dt) times a standard
/// normal drawn from a counter-based generator, so the value does not depend
/// on evaluation order or thread count.
double brownian_increment(std::uint64_t seed, std::uint64_t path_id, std::uint64_t step, double dt);

struct MomentPoint {
    std::int64_t k = 0;
    double t = 0.0;
    double mean_square = 0.0;  ///< over surviving paths; 0 when none survive
    double std_error = 0.0;
    std::int64_t surviving = 0;
    std::int64_t blown_up = 0;
    /// Mean of |state| over all paths with blown-up paths counted at the cap.
    double capped_mean_abs = 0.0;
    /// True when blown-up paths were excluded, making mean_square a lower bound.
    bool lower_bound = false;
};

struct PathFailure {
    std::int64_t path_id = 0;
    std::int64_t step = 0;
    std::string reason;
};

struct MomentSeries {
    std::string problem_label;
    SimConfig config;
    std::vector<MomentPoint> points;
    /// Paths whose step failed (solver or non-finite coefficient). They are
    /// frozen and counted in blown_up from the failing step on.
    std::vector<PathFailure> failures;
};

struct ExecutionOptions {
    /// Worker threads; 0 picks std::thread::hardware_concurrency(). Results
    /// are bit-identical for every value.
    unsigned workers = 0;
};

/// Paths handled per work unit. Fixed so that reductions never depend on
/// the worker count.
inline constexpr std::int64_t kPathBlockSize = 64;

/// Evolves num_paths independent paths and reduces |state|^2 at each
/// checkpoint. Paths whose norm exceeds blow_up_cap (or turns non-finite)
/// are frozen and counted as blown up from then on. Throws EnsembleError if
/// more than 1% of paths fail.
MomentSeries simulate_ensemble(const SdeProblem& problem, const SimConfig& config,
                               ExecutionOptions exec = {});

/// Human-readable notes on theorem hypotheses the run does not meet (K1
/// range, step-size bounds, linear growth). Empty when conformant.
std::vector<std::string> theorem_conformance_warnings(const SdeProblem& problem,
                                                      const SimConfig& config);

// ---------------------------------------------------------------------------
// Serialization

/// CSV: header `k,t,mean_square,std_error,surviving,blown_up` then one row
/// per checkpoint. A non-empty `envelope` (one value per point) adds an
/// `envelope` column. Reals use shortest round-trip formatting.
void write_moment_csv(std::ostream& os, std::span<const MomentPoint> points,
                      std::span<const double> envelope = {});
std::string moment_csv(std::span<const MomentPoint> points, std::span<const double> envelope = {});

/// Parses the CSV written above. Extra trailing columns are ignored. Throws
/// ParseError naming the offending line.
std::vector<MomentPoint> read_moment_csv(std::istream& is);

/// Sidecar JSON echoing every SimConfig field plus problem and scheme labels.
std::string config_echo_json(const MomentSeries& series);

}  // namespace polystab
