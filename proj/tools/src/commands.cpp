#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "polystab/cli.hpp"
#include "polystab/error.hpp"

namespace polystab::cli {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SolverMethod parse_method(const std::string& s) {
    if (s == "newton") return SolverMethod::newton;
    if (s == "bisection") return SolverMethod::bisection;
    throw ParseError("unknown solver method '" + s + "'", 0);
}

SolverFallback parse_fallback(const std::string& s) {
    if (s == "none") return SolverFallback::none;
    if (s == "bisection") return SolverFallback::bisection;
    if (s == "damped_iteration" || s == "damped-iteration") return SolverFallback::damped_iteration;
    throw ParseError("unknown solver fallback '" + s + "'", 0);
}

unsigned effective_workers(unsigned requested) {
    return requested != 0 ? requested : workers_from_env();
}

std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

// Maps library exceptions onto exit codes; anything else propagates.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const EstimationError& e) {
        err << "estimation error: " << e.what() << '\n';
        return kNumerical;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return kNumerical;
    } catch (const StepError& e) {
        err << "step error: " << e.what() << '\n';
        return kNumerical;
    } catch (const EnsembleError& e) {
        err << "ensemble error: " << e.what() << '\n';
        return kNumerical;
    }
}

json decay_json(const DecayEstimate& est, double k1) {
    json j;
    j["slope"] = est.slope;
    j["slope_std_error"] = est.slope_std_error;
    j["fit_window"] = {est.t_lo, est.t_hi};
    j["points_used"] = est.points_used;
    j["K1"] = k1;
    j["theoretical_bound"] = est.theoretical_bound;
    j["tolerance"] = est.tolerance;
    j["conforms"] = est.conforms;
    j["warnings"] = est.warnings;
    return j;
}

}  // namespace

unsigned workers_from_env() {
    const char* v = std::getenv("POLYSTAB_THREADS");
    if (v == nullptr) return 0;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || n <= 0 || n > 4096) return 0;
    return static_cast<unsigned>(n);
}

ExperimentSpec parse_experiment_spec(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("experiment spec: ") + e.what(), 0);
    }
    if (!j.is_object()) throw ParseError("experiment spec must be a JSON object", 0);
    static const char* const kKnown[] = {
        "problem", "label", "K1", "C", "initial_value", "scheme", "dt", "steps", "paths", "seed",
        "checkpoints", "blow_up_cap", "strict", "solver", "window_fraction", "tolerance", "out",
        "envelope", "workers"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
            throw ParseError("experiment spec: unknown key '" + key + "'", 0);
        }
    }

    ExperimentSpec spec;
    spec.problem = parse_problem_spec(json_text);
    try {
        SimConfig& s = spec.sim;
        if (j.contains("scheme")) s.scheme = parse_scheme(j["scheme"].get<std::string>());
        if (j.contains("dt")) s.dt = j["dt"].get<double>();
        if (j.contains("steps")) s.num_steps = j["steps"].get<std::int64_t>();
        if (j.contains("paths")) s.num_paths = j["paths"].get<std::int64_t>();
        if (j.contains("seed")) {
            s.seed = j["seed"].get<std::uint64_t>();
            spec.seed_set = true;
        }
        if (j.contains("checkpoints")) s.checkpoints = j["checkpoints"].get<std::vector<std::int64_t>>();
        if (j.contains("blow_up_cap")) s.blow_up_cap = j["blow_up_cap"].get<double>();
        if (j.contains("strict")) {
            s.strict = j["strict"].get<bool>();
            s.solver.strict = s.strict;
        }
        if (j.contains("solver")) {
            const auto& sj = j["solver"];
            if (sj.contains("residual_tolerance")) {
                s.solver.residual_tolerance = sj["residual_tolerance"].get<double>();
            }
            if (sj.contains("max_iterations")) s.solver.max_iterations = sj["max_iterations"].get<int>();
            if (sj.contains("method")) s.solver.method = parse_method(sj["method"].get<std::string>());
            if (sj.contains("fallback")) {
                s.solver.fallback = parse_fallback(sj["fallback"].get<std::string>());
            }
        }
        if (j.contains("window_fraction")) spec.window_fraction = j["window_fraction"].get<double>();
        if (j.contains("tolerance")) spec.tolerance = j["tolerance"].get<double>();
        if (j.contains("out")) spec.output_prefix = j["out"].get<std::string>();
        if (j.contains("envelope")) spec.envelope = j["envelope"].get<bool>();
        if (j.contains("workers")) spec.workers = j["workers"].get<unsigned>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("experiment spec: ") + e.what(), 0);
    }
    return spec;
}

int cmd_simulate(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!spec.seed_set) throw ParseError("simulate needs an explicit seed (--seed)", 0);
        const SdeProblem problem = make_problem(spec.problem);
        SimConfig cfg = spec.sim;
        cfg.initial_value = initial_value_for(spec.problem, problem);

        for (const auto& w : theorem_conformance_warnings(problem, cfg)) err << "warning: " << w << '\n';
        const MomentSeries series =
            simulate_ensemble(problem, cfg, ExecutionOptions{effective_workers(spec.workers)});

        std::vector<double> envelope;
        if (spec.envelope) {
            double m0 = 0.0;
            for (double v : cfg.initial_value) m0 += v * v;
            try {
                envelope = envelope_column(series.points, cfg.scheme, cfg.dt, problem.k1(),
                                           problem.c(), m0, problem.kbar());
            } catch (const DomainError& e) {
                err << "warning: envelope column omitted: " << e.what() << '\n';
            }
        }
        for (const auto& f : series.failures) {
            err << "warning: path " << f.path_id << " failed at step " << f.step << ": " << f.reason
                << '\n';
        }
        const auto& last = series.points.back();
        if (last.blown_up > 0) {
            err << "note: " << last.blown_up << " of " << cfg.num_paths
                << " paths blew up; mean_square is a lower bound from the first blow-up on\n";
        }

        const std::string csv = moment_csv(series.points, envelope);
        if (spec.output_prefix.empty()) {
            out << csv;
            return static_cast<int>(kOk);
        }
        const std::string csv_path = spec.output_prefix + ".csv";
        const std::string json_path = spec.output_prefix + ".json";
        std::ofstream csv_file(csv_path, std::ios::binary);
        std::ofstream json_file(json_path, std::ios::binary);
        if (!csv_file || !json_file) {
            throw ParseError("cannot write output files with prefix '" + spec.output_prefix + "'", 0);
        }
        csv_file << csv;
        json_file << config_echo_json(series);
        out << "wrote " << csv_path << " (" << series.points.size() << " checkpoints) and "
            << json_path << '\n';
        out << "final: k=" << last.k << " mean_square=" << format_real(last.mean_square)
            << " blown_up=" << last.blown_up << '\n';
        return static_cast<int>(kOk);
    });
}

int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        double k1 = 0.0;
        if (opts.k1) {
            k1 = *opts.k1;
        } else if (opts.problem) {
            k1 = make_builtin(*opts.problem).k1();
        } else {
            throw ParseError("analyze needs --k1 or --problem", 0);
        }
        std::ifstream in(opts.csv_path, std::ios::binary);
        if (!in) throw ParseError("cannot open '" + opts.csv_path + "'", 0);
        std::vector<MomentPoint> points;
        try {
            points = read_moment_csv(in);
        } catch (const ParseError& e) {
            throw ParseError(opts.csv_path + ": " + e.what(), 0);
        }
        const auto est = estimate_decay_exponent(points, opts.window_fraction, k1, opts.tolerance);
        for (const auto& w : est.warnings) err << "warning: " << w << '\n';
        json report = decay_json(est, k1);
        report["input"] = opts.csv_path;
        const std::string text = report.dump(2) + "\n";
        out << text;
        if (!opts.json_out.empty()) {
            std::ofstream f(opts.json_out, std::ios::binary);
            if (!f) throw ParseError("cannot write '" + opts.json_out + "'", 0);
            f << text;
        }
        return static_cast<int>(est.conforms ? kOk : kConformance);
    });
}

int cmd_verify_gamma(const VerifyGammaOptions& opts, std::ostream& out, std::ostream& err,
                     std::span<const InequalityCheck> extra) {
    return guarded(err, [&] {
        std::vector<InequalityCheck> checks = gamma_kernel_checks(opts.seed, opts.identity_samples);
        auto bounds = proof_bound_checks(opts.grid);
        checks.insert(checks.end(), bounds.begin(), bounds.end());
        checks.insert(checks.end(), extra.begin(), extra.end());

        bool all_pass = true;
        for (const auto& r : run_checks(checks)) {
            all_pass = all_pass && r.pass;
            out << (r.pass ? "PASS  " : "FAIL  ") << r.name << ": worst margin "
                << format_real(r.worst_margin) << " at " << r.worst_point << " (" << r.evaluated
                << " points";
            if (r.failures > 0) out << ", " << r.failures << " violations";
            out << ")\n";
        }
        return static_cast<int>(all_pass ? kOk : kConformance);
    });
}

int cmd_counterexample(const CounterexampleOptions& opts, std::ostream& out, std::ostream& err) {
    if (!(opts.dt > 0.0 && opts.dt < 0.5)) {
        err << "error: counterexample needs 0 < dt < 0.5, got " << opts.dt << '\n';
        return kUsage;
    }
    return guarded(err, [&] {
        const auto seq = counterexample_lower_bound(opts.dt, opts.k_max);
        const auto exceed = seq.first_step_exceeding(opts.cap);
        out << "lower-bound recursion, dt = " << opts.dt << '\n';
        out << "k  b_k  threshold\n";
        for (std::size_t i = 0; i < seq.values.size(); ++i) {
            const auto k = static_cast<std::int64_t>(i + 1);
            out << k << "  " << format_real(seq.values[i]) << "  "
                << format_real(counterexample_threshold(k, opts.dt)) << '\n';
            if (exceed && k >= *exceed) break;
        }
        if (seq.diverged_at) out << "diverged at step " << *seq.diverged_at << " (overflow)\n";
        if (exceed) {
            out << "exceeds cap " << opts.cap << " at step " << *exceed << '\n';
        } else {
            out << "cap " << opts.cap << " not exceeded within " << opts.k_max << " steps\n";
        }
        out << "induction invariant: "
            << (seq.invariant_holds() ? std::string("holds at every step")
                                      : "fails at step " + std::to_string(*seq.invariant_failure))
            << '\n';

        if (opts.monte_carlo) {
            const SdeProblem problem = cubic_counterexample();
            SimConfig cfg;
            cfg.dt = opts.dt;
            cfg.num_steps = opts.steps;
            cfg.num_paths = opts.paths;
            cfg.seed = opts.seed;
            cfg.initial_value = problem.default_initial_value();
            cfg.checkpoints = {opts.steps};
            const auto series =
                simulate_ensemble(problem, cfg, ExecutionOptions{effective_workers(opts.workers)});
            const auto& p = series.points.back();
            out << "explicit scheme ensemble: " << p.blown_up << " of " << opts.paths
                << " paths blown up by step " << opts.steps << " (fraction "
                << format_real(static_cast<double>(p.blown_up) / static_cast<double>(opts.paths))
                << ", x0 = " << cfg.initial_value[0] << ", seed " << opts.seed << ")\n";
        }
        return static_cast<int>(seq.invariant_holds() && exceed ? kOk : kConformance);
    });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mean-square decay experiments for explicit and backward Euler-Maruyama schemes",
                 "polystab"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run an ensemble and write moment CSV + config JSON");
    std::string spec_path, problem, scheme, out_prefix;
    double dt = 0, k1 = 0, c = 0, cap = 0;
    std::int64_t paths = 0, steps = 0;
    std::uint64_t seed = 0;
    std::vector<double> x0;
    std::vector<std::int64_t> checkpoints;
    unsigned workers = 0;
    bool envelope = false, strict = false;
    auto* o_spec = sim->add_option("--spec", spec_path, "JSON experiment spec")->check(CLI::ExistingFile);
    auto* o_problem = sim->add_option("--problem", problem, "linear | counterexample | bem-example");
    auto* o_scheme = sim->add_option("--scheme", scheme, "em | bem");
    auto* o_dt = sim->add_option("--dt", dt, "step size");
    auto* o_paths = sim->add_option("--paths", paths, "number of paths");
    auto* o_steps = sim->add_option("--steps", steps, "number of steps");
    auto* o_seed = sim->add_option("--seed", seed, "random seed (required here or in the spec)");
    auto* o_x0 = sim->add_option("--x0", x0, "initial value (one entry per dimension)");
    auto* o_k1 = sim->add_option("--K1", k1, "override K1");
    auto* o_c = sim->add_option("--C", c, "override C");
    auto* o_cap = sim->add_option("--cap", cap, "blow-up cap on |state|");
    auto* o_cps = sim->add_option("--checkpoints", checkpoints, "explicit checkpoint steps")->delimiter(',');
    auto* o_out = sim->add_option("--out", out_prefix, "output prefix for <prefix>.csv/.json");
    auto* o_workers = sim->add_option("--workers", workers, "worker threads (default POLYSTAB_THREADS)");
    auto* o_env = sim->add_flag("--envelope", envelope, "add the theoretical envelope column");
    auto* o_strict = sim->add_flag("--strict", strict, "reject runs outside the theorems' hypotheses");

    // analyze
    auto* ana = app.add_subcommand("analyze", "fit the decay exponent of a moment CSV");
    AnalyzeOptions aopts;
    std::string a_problem;
    double a_k1 = 0;
    ana->add_option("csv", aopts.csv_path, "moment CSV")->required();
    auto* oa_problem = ana->add_option("--problem", a_problem, "builtin problem supplying K1");
    auto* oa_k1 = ana->add_option("--K1,--k1", a_k1, "K1 for the bound -(2 K1 - 1)");
    ana->add_option("--window", aopts.window_fraction, "tail fraction of log-time to fit");
    ana->add_option("--tolerance", aopts.tolerance, "slack on the slope bound");
    ana->add_option("--json-out", aopts.json_out, "also write the report to this file");

    // verify-gamma
    auto* ver = app.add_subcommand("verify-gamma", "check gamma identities and proof bounds");
    VerifyGammaOptions vopts;
    ver->add_option("--samples", vopts.identity_samples, "random product-identity samples");
    ver->add_option("--seed", vopts.seed, "seed for the random samples");
    ver->add_option("--k-max", vopts.grid.k_max, "largest k in the bound grids");

    // counterexample
    auto* cex = app.add_subcommand("counterexample", "explicit-scheme blow-up lower bound");
    CounterexampleOptions copts;
    bool no_mc = false;
    cex->add_option("--dt", copts.dt, "step size in (0, 0.5)");
    cex->add_option("--cap", copts.cap, "divergence threshold");
    cex->add_option("--k-max", copts.k_max, "recursion length");
    cex->add_option("--paths", copts.paths, "companion ensemble paths");
    cex->add_option("--steps", copts.steps, "companion ensemble steps");
    cex->add_option("--seed", copts.seed, "companion ensemble seed");
    cex->add_option("--workers", copts.workers, "worker threads");
    cex->add_flag("--no-mc", no_mc, "skip the companion ensemble");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    if (sim->parsed()) {
        ExperimentSpec spec;
        const int rc = guarded(err, [&] {
            if (o_spec->count() > 0) spec = parse_experiment_spec(read_file(spec_path));
            if (o_problem->count() > 0) spec.problem.label = problem;
            if (o_k1->count() > 0) spec.problem.k1 = k1;
            if (o_c->count() > 0) spec.problem.c = c;
            if (o_x0->count() > 0) spec.problem.initial_value = x0;
            if (o_scheme->count() > 0) spec.sim.scheme = parse_scheme(scheme);
            if (o_dt->count() > 0) spec.sim.dt = dt;
            if (o_paths->count() > 0) spec.sim.num_paths = paths;
            if (o_steps->count() > 0) spec.sim.num_steps = steps;
            if (o_seed->count() > 0) {
                spec.sim.seed = seed;
                spec.seed_set = true;
            }
            if (o_cap->count() > 0) spec.sim.blow_up_cap = cap;
            if (o_cps->count() > 0) spec.sim.checkpoints = checkpoints;
            if (o_out->count() > 0) spec.output_prefix = out_prefix;
            if (o_workers->count() > 0) spec.workers = workers;
            if (o_env->count() > 0) spec.envelope = envelope;
            if (o_strict->count() > 0) {
                spec.sim.strict = strict;
                spec.sim.solver.strict = strict;
            }
            return static_cast<int>(kOk);
        });
        if (rc != kOk) return rc;
        return cmd_simulate(spec, out, err);
    }
    if (ana->parsed()) {
        if (oa_problem->count() > 0) aopts.problem = a_problem;
        if (oa_k1->count() > 0) aopts.k1 = a_k1;
        return cmd_analyze(aopts, out, err);
    }
    if (ver->parsed()) return cmd_verify_gamma(vopts, out, err);
    copts.monte_carlo = !no_mc;
    return cmd_counterexample(copts, out, err);
}

}  // namespace polystab::cli
