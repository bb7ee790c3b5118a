#include "polystab/sde_model.hpp"

#include <cmath>
#include <json.hpp>

#include "polystab/error.hpp"

namespace polystab {

SdeProblem::SdeProblem(SdeProblemParams params) : params_(std::move(params)) {
    if (params_.dimension == 0) throw DomainError("problem dimension must be positive");
    if (!params_.drift || !params_.diffusion) {
        throw DomainError("problem '" + params_.label + "' needs both drift and diffusion");
    }
    if (!(params_.k1 > 0.0) || !std::isfinite(params_.k1)) throw DomainError("K1 must be positive");
    if (!(params_.c > 0.0) || !std::isfinite(params_.c)) throw DomainError("C must be positive");
    if (!std::isfinite(params_.kbar)) throw DomainError("Kbar must be finite");
    if (!params_.default_initial_value.empty() &&
        params_.default_initial_value.size() != params_.dimension) {
        throw DomainError("default initial value has the wrong dimension");
    }
}

Vector SdeProblem::drift(std::span<const double> x, double t) const {
    Vector out(params_.dimension);
    params_.drift(x, t, out);
    return out;
}

Vector SdeProblem::diffusion(std::span<const double> x, double t) const {
    Vector out(params_.dimension);
    params_.diffusion(x, t, out);
    return out;
}

SdeProblem SdeProblem::with_constants(std::optional<double> k1, std::optional<double> c) const {
    SdeProblemParams copy = params_;
    if (k1) copy.k1 = *k1;
    if (c) copy.c = *c;
    return SdeProblem(std::move(copy));
}

SdeProblem linear_example() {
    return SdeProblem({
        .label = "linear",
        .dimension = 1,
        .drift = [](std::span<const double> x, double t,
                    std::span<double> out) { out[0] = -x[0] / (1.0 + t); },
        .diffusion = [](std::span<const double>, double t,
                        std::span<double> out) { out[0] = 1.0 / (1.0 + t); },
        .k1 = 1.0,
        .c = 1.0,
        .kbar = -1.0,
        .satisfies_linear_growth = true,
        .default_initial_value = {1.0},
    });
}

SdeProblem cubic_counterexample() {
    return SdeProblem({
        .label = "counterexample",
        .dimension = 1,
        .drift =
            [](std::span<const double> x, double t, std::span<double> out) {
                const double v = x[0];
                out[0] = (-3.0 * v - v * v * v) / (1.0 + t);
            },
        .diffusion =
            [](std::span<const double>, double t, std::span<double> out) {
                const double s = 1.0 + t;
                out[0] = 1.0 / (s * s * s);
            },
        .k1 = 3.0,
        .c = 1.0,
        .kbar = -3.0,
        .satisfies_linear_growth = false,
        // Blow-up needs |Y_1| beyond the explicit scheme's stability threshold;
        // from small initial values the Gaussian tail makes that unobservable.
        .default_initial_value = {10.0},
    });
}

SdeProblem bem_example() {
    return SdeProblem({
        .label = "bem-example",
        .dimension = 1,
        .drift =
            [](std::span<const double> x, double t, std::span<double> out) {
                const double v = x[0];
                const double s = 1.0 + t;
                out[0] = (-3.0 * v - v * v * v) / (s * s);
            },
        .diffusion =
            [](std::span<const double> x, double t, std::span<double> out) {
                const double s2 = (1.0 + t) * (1.0 + t);
                out[0] = 5.0 * std::sin(x[0]) / (s2 * s2);
            },
        .k1 = 3.0,
        .c = 5.0,
        // <x-y, f(x)-f(y)> <= -3(1+t)^{-2}|x-y|^2; the smallest Kbar valid for all t is 0.
        .kbar = 0.0,
        .satisfies_linear_growth = false,
        .default_initial_value = {1.0},
    });
}

std::vector<std::string> builtin_labels() { return {"linear", "counterexample", "bem-example"}; }

SdeProblem make_builtin(std::string_view label) {
    if (label == "linear") return linear_example();
    if (label == "counterexample") return cubic_counterexample();
    if (label == "bem-example") return bem_example();
    throw DomainError("unknown problem label '" + std::string(label) + "'");
}

double exact_linear_mean_square(double x0, double t) {
    if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
    const double s = 1.0 + t;
    return (x0 * x0 + t) / (s * s);
}

ProblemSpec parse_problem_spec(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("problem config: ") + e.what(), 0);
    }
    if (!j.is_object()) throw ParseError("problem config must be a JSON object", 0);
    ProblemSpec spec;
    try {
        if (j.contains("problem")) {
            spec.label = j.at("problem").get<std::string>();
        } else if (j.contains("label")) {
            spec.label = j.at("label").get<std::string>();
        } else {
            throw ParseError("problem config needs a \"problem\" label", 0);
        }
        if (j.contains("K1")) spec.k1 = j.at("K1").get<double>();
        if (j.contains("C")) spec.c = j.at("C").get<double>();
        if (j.contains("initial_value")) {
            const auto& iv = j.at("initial_value");
            spec.initial_value = iv.is_array() ? iv.get<Vector>() : Vector{iv.get<double>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("problem config: ") + e.what(), 0);
    }
    return spec;
}

SdeProblem make_problem(const ProblemSpec& spec) {
    SdeProblem base = make_builtin(spec.label);
    if (!spec.k1 && !spec.c) return base;
    return base.with_constants(spec.k1, spec.c);
}

Vector initial_value_for(const ProblemSpec& spec, const SdeProblem& problem) {
    Vector x0 = spec.initial_value ? *spec.initial_value : problem.default_initial_value();
    if (x0.size() != problem.dimension()) {
        throw DomainError("initial value has dimension " + std::to_string(x0.size()) +
                          ", problem '" + problem.label() + "' has " +
                          std::to_string(problem.dimension()));
    }
    return x0;
}

}  // namespace polystab
