#include "polystab/mc_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <optional>
#include <sstream>
#include <thread>

#include "polystab/counter_rng.hpp"
#include "polystab/error.hpp"

namespace polystab {
namespace {

// Running moments of |state|^2 over surviving paths (Welford / Chan).
struct CheckpointAccumulator {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double sum_abs = 0.0;
    std::int64_t blown = 0;

    void add(double square, double abs_value) {
        ++count;
        const double delta = square - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (square - mean);
        sum_abs += abs_value;
    }

    void merge(const CheckpointAccumulator& o) {
        if (o.count > 0) {
            const double n = static_cast<double>(count + o.count);
            const double delta = o.mean - mean;
            mean += delta * static_cast<double>(o.count) / n;
            m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
            count += o.count;
        }
        sum_abs += o.sum_abs;
        blown += o.blown;
    }
};

struct BlockResult {
    std::vector<CheckpointAccumulator> acc;
    std::vector<PathFailure> failures;
    std::exception_ptr error;
};

double squared_norm(std::span<const double> x) {
    double s = 0.0;
    for (double e : x) s += e * e;
    return s;
}

// Combines blocks [lo, hi) as a balanced binary tree; the shape depends only
// on the block count.
std::vector<CheckpointAccumulator> tree_merge(const std::vector<BlockResult>& blocks,
                                              std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return blocks[lo].acc;
    const std::size_t mid = lo + (hi - lo) / 2;
    auto left = tree_merge(blocks, lo, mid);
    const auto right = tree_merge(blocks, mid, hi);
    for (std::size_t i = 0; i < left.size(); ++i) left[i].merge(right[i]);
    return left;
}

class PathRunner {
public:
    PathRunner(const SdeProblem& problem, const SimConfig& cfg,
               const std::vector<std::int64_t>& checkpoints)
        : problem_(problem),
          cfg_(cfg),
          checkpoints_(checkpoints),
          state_(problem.dimension()) {
        if (cfg.scheme == Scheme::em) {
            em_.emplace(problem);
        } else {
            bem_.emplace(problem, cfg.solver);
        }
    }

    void run(std::uint64_t path_id, std::vector<CheckpointAccumulator>& acc,
             std::vector<PathFailure>& failures) {
        std::copy(cfg_.initial_value.begin(), cfg_.initial_value.end(), state_.begin());
        std::size_t next = 0;
        auto record_alive = [&] {
            const double sq = squared_norm(state_);
            acc[next].add(sq, std::sqrt(sq));
            ++next;
        };
        if (checkpoints_[next] == 0) record_alive();

        const double cap_sq = cfg_.blow_up_cap * cfg_.blow_up_cap;
        StepContext ctx{0, cfg_.dt, 0.0};
        const std::int64_t last = checkpoints_.back();
        for (std::int64_t k = 0; k < last; ++k) {
            ctx.k = k;
            ctx.dB = brownian_increment(cfg_.seed, path_id, static_cast<std::uint64_t>(k), cfg_.dt);
            try {
                if (em_) {
                    em_->step(state_, ctx);
                } else {
                    bem_->step(state_, ctx);
                }
            } catch (const SolverError& e) {
                failures.push_back({static_cast<std::int64_t>(path_id), k, e.what()});
                break;
            } catch (const StepError& e) {
                failures.push_back({static_cast<std::int64_t>(path_id), k, e.what()});
                break;
            }
            const double sq = squared_norm(state_);
            if (!(sq <= cap_sq)) break;  // blown up (or non-finite): freeze
            if (checkpoints_[next] == k + 1) record_alive();
        }
        for (; next < checkpoints_.size(); ++next) ++acc[next].blown;
    }

private:
    const SdeProblem& problem_;
    const SimConfig& cfg_;
    const std::vector<std::int64_t>& checkpoints_;
    Vector state_;
    std::optional<EmStepper> em_;
    std::optional<BemStepper> bem_;
};

}  // namespace

std::string_view to_string(Scheme scheme) noexcept {
    return scheme == Scheme::em ? "em" : "bem";
}

Scheme parse_scheme(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "em") return Scheme::em;
    if (lower == "bem") return Scheme::bem;
    throw DomainError("unknown scheme '" + std::string(text) + "' (expected em or bem)");
}

std::vector<std::int64_t> geometric_checkpoints(std::int64_t num_steps, std::size_t target) {
    if (num_steps <= 0) throw DomainError("num_steps must be positive");
    if (target < 3) target = 3;
    std::vector<std::int64_t> out{0};
    const double log_n = std::log(static_cast<double>(num_steps));
    const std::size_t intervals = target - 2;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(intervals);
        std::int64_t k = std::llround(std::exp(frac * log_n));
        k = std::clamp<std::int64_t>(k, 1, num_steps);
        if (k > out.back()) out.push_back(k);
    }
    if (out.back() != num_steps) out.push_back(num_steps);
    return out;
}

std::vector<std::int64_t> SimConfig::resolved_checkpoints() const {
    return checkpoints.empty() ? geometric_checkpoints(num_steps) : checkpoints;
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    if (num_steps <= 0) throw DomainError("num_steps must be positive");
    if (num_paths <= 0) throw DomainError("num_paths must be positive");
    if (!(blow_up_cap > 0.0) || !std::isfinite(blow_up_cap)) {
        throw DomainError("blow_up_cap must be positive and finite");
    }
    if (initial_value.empty()) throw DomainError("initial_value is required");
    for (double v : initial_value) {
        if (!std::isfinite(v)) throw DomainError("initial_value must be finite");
    }
    if (!(std::sqrt(squared_norm(initial_value)) < blow_up_cap)) {
        throw DomainError("blow_up_cap must exceed |initial_value|");
    }
    std::int64_t prev = -1;
    for (std::int64_t k : checkpoints) {
        if (k <= prev || k < 0 || k > num_steps) {
            throw DomainError("checkpoints must be strictly increasing within [0, num_steps]");
        }
        prev = k;
    }
    solver.validate();
}

double brownian_increment(std::uint64_t seed, std::uint64_t path_id, std::uint64_t step,
                          double dt) {
    return std::sqrt(dt) * counter_normal(seed, path_id, step);
}

std::vector<std::string> theorem_conformance_warnings(const SdeProblem& problem,
                                                      const SimConfig& config) {
    std::vector<std::string> out;
    const double k1 = problem.k1();
    std::ostringstream os;
    if (config.scheme == Scheme::em) {
        if (!problem.satisfies_linear_growth()) {
            out.emplace_back("drift has no linear growth bound; the EM decay theorem does not apply");
        }
        if (k1 < 1.0) out.emplace_back("EM decay theorem needs K1 >= 1");
        if (!(config.dt < 1.0 / (2.0 + k1))) {
            os << "EM decay theorem needs dt < 1/(2+K1) = " << 1.0 / (2.0 + k1);
            out.push_back(os.str());
        }
    } else {
        if (!(k1 > 0.5)) out.emplace_back("BEM decay theorem needs K1 > 0.5");
        if (!(config.dt < 1.0 / k1)) {
            os << "BEM decay theorem needs dt < 1/K1 = " << 1.0 / k1;
            out.push_back(os.str());
        }
    }
    return out;
}

MomentSeries simulate_ensemble(const SdeProblem& problem, const SimConfig& config,
                               ExecutionOptions exec) {
    config.validate();
    if (config.initial_value.size() != problem.dimension()) {
        throw DomainError("initial_value dimension does not match the problem");
    }
    if (config.scheme == Scheme::bem && !(config.dt < implicit_step_limit(problem))) {
        throw PreconditionError("BEM needs dt < 1/|Kbar|");
    }
    if (config.strict) {
        const auto warnings = theorem_conformance_warnings(problem, config);
        if (!warnings.empty()) throw PreconditionError("strict mode: " + warnings.front());
    }

    const auto checkpoints = config.resolved_checkpoints();
    const std::int64_t num_blocks = (config.num_paths + kPathBlockSize - 1) / kPathBlockSize;
    std::vector<BlockResult> blocks(static_cast<std::size_t>(num_blocks));

    std::atomic<std::int64_t> next_block{0};
    auto worker = [&] {
        PathRunner runner(problem, config, checkpoints);
        for (;;) {
            const std::int64_t b = next_block.fetch_add(1);
            if (b >= num_blocks) return;
            auto& block = blocks[static_cast<std::size_t>(b)];
            block.acc.assign(checkpoints.size(), {});
            try {
                const std::int64_t first = b * kPathBlockSize;
                const std::int64_t end = std::min(first + kPathBlockSize, config.num_paths);
                for (std::int64_t p = first; p < end; ++p) {
                    runner.run(config.path_id_offset + static_cast<std::uint64_t>(p), block.acc,
                               block.failures);
                }
            } catch (...) {
                block.error = std::current_exception();
            }
        }
    };

    unsigned workers = exec.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                         : exec.workers;
    workers = static_cast<unsigned>(std::min<std::int64_t>(workers, num_blocks));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    }

    MomentSeries series;
    series.problem_label = problem.label();
    series.config = config;
    series.config.checkpoints = checkpoints;
    for (auto& block : blocks) {
        if (block.error) std::rethrow_exception(block.error);
        series.failures.insert(series.failures.end(), block.failures.begin(), block.failures.end());
    }
    if (static_cast<double>(series.failures.size()) > 0.01 * static_cast<double>(config.num_paths)) {
        const auto& f = series.failures.front();
        throw EnsembleError(std::to_string(series.failures.size()) + " of " +
                            std::to_string(config.num_paths) + " paths failed (first: path " +
                            std::to_string(f.path_id) + " at step " + std::to_string(f.step) +
                            ": " + f.reason + ")");
    }

    const auto totals = tree_merge(blocks, 0, blocks.size());
    series.points.reserve(checkpoints.size());
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        const auto& a = totals[i];
        MomentPoint pt;
        pt.k = checkpoints[i];
        pt.t = static_cast<double>(pt.k) * config.dt;
        pt.surviving = a.count;
        pt.blown_up = a.blown;
        pt.mean_square = a.count > 0 ? a.mean : 0.0;
        pt.std_error = a.count > 1 ? std::sqrt(a.m2 / static_cast<double>(a.count - 1) /
                                               static_cast<double>(a.count))
                                   : 0.0;
        pt.capped_mean_abs = (a.sum_abs + static_cast<double>(a.blown) * config.blow_up_cap) /
                             static_cast<double>(config.num_paths);
        pt.lower_bound = a.blown > 0;
        series.points.push_back(pt);
    }
    return series;
}

}  // namespace polystab
