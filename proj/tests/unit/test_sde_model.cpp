#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "polystab/error.hpp"
#include "polystab/sde_model.hpp"

using namespace polystab;

namespace {

double f1(const SdeProblem& p, double x, double t) { return p.drift(Vector{x}, t)[0]; }
double g1(const SdeProblem& p, double x, double t) { return p.diffusion(Vector{x}, t)[0]; }

AuditGrid small_grid() { return make_audit_grid(1, -10.0, 10.0, 41, {0.0, 1.0, 10.0, 100.0}); }

SdeProblem zero_drift_problem() {
    return SdeProblem({
        .label = "zero",
        .dimension = 1,
        .drift = [](std::span<const double>, double, std::span<double> out) { out[0] = 0.0; },
        .diffusion = [](std::span<const double>, double, std::span<double> out) { out[0] = 0.0; },
        .k1 = 1.0,
        .c = 1.0,
    });
}

}  // namespace

TEST(LinearExample, Coefficients) {
    const auto p = linear_example();
    EXPECT_EQ(f1(p, 2.0, 0.0), -2.0);
    EXPECT_EQ(f1(p, 3.0, 2.0), -1.0);
    EXPECT_DOUBLE_EQ(g1(p, 5.0, 9.0), 0.1);
    EXPECT_EQ(p.k1(), 1.0);
    EXPECT_EQ(p.c(), 1.0);
    EXPECT_EQ(p.kbar(), -1.0);
    EXPECT_TRUE(p.satisfies_linear_growth());
}

TEST(CubicCounterexample, Coefficients) {
    const auto p = cubic_counterexample();
    EXPECT_EQ(f1(p, 1.0, 0.0), -4.0);
    EXPECT_EQ(f1(p, 2.0, 1.0), -7.0);
    EXPECT_EQ(g1(p, 0.0, 0.0), 1.0);
    EXPECT_EQ(p.k1(), 3.0);
    EXPECT_FALSE(p.satisfies_linear_growth());
}

TEST(BemExample, Coefficients) {
    const auto p = bem_example();
    EXPECT_EQ(f1(p, 1.0, 0.0), -4.0);
    for (double t : {0.0, 1.0, 123.0}) EXPECT_EQ(g1(p, 0.0, t), 0.0);
    EXPECT_DOUBLE_EQ(g1(p, std::numbers::pi / 2, 0.0), 5.0);
    EXPECT_EQ(p.k1(), 3.0);
    EXPECT_EQ(p.c(), 5.0);
}

TEST(ExactLinearMeanSquare, ClosedForm) {
    EXPECT_EQ(exact_linear_mean_square(1.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(exact_linear_mean_square(0.0, 3.0), 3.0 / 16.0);
    EXPECT_DOUBLE_EQ(exact_linear_mean_square(2.0, 99.0), 0.0103);
    EXPECT_THROW(exact_linear_mean_square(1.0, -1.0), DomainError);
}

TEST(ExactLinearMeanSquare, TailSlopeApproachesMinusOne) {
    const double t1 = 1e6, t2 = 1e7;
    const double slope = std::log(exact_linear_mean_square(1.5, t2) / exact_linear_mean_square(1.5, t1)) /
                         std::log((1 + t2) / (1 + t1));
    EXPECT_NEAR(slope, -1.0, 1e-5);
}

TEST(SdeProblem, ConstructionValidates) {
    SdeProblemParams params{
        .label = "bad",
        .dimension = 1,
        .drift = [](std::span<const double>, double, std::span<double> out) { out[0] = 0.0; },
        .diffusion = [](std::span<const double>, double, std::span<double> out) { out[0] = 0.0; },
        .k1 = 0.0,
        .c = 1.0,
    };
    EXPECT_THROW(SdeProblem{params}, DomainError);
    params.k1 = 1.0;
    params.c = -1.0;
    EXPECT_THROW(SdeProblem{params}, DomainError);
    params.c = 1.0;
    params.dimension = 0;
    EXPECT_THROW(SdeProblem{params}, DomainError);
    params.dimension = 1;
    params.drift = nullptr;
    EXPECT_THROW(SdeProblem{params}, DomainError);
}

TEST(Builtins, LookupByLabel) {
    for (const auto& label : builtin_labels()) EXPECT_EQ(make_builtin(label).label(), label);
    EXPECT_THROW(make_builtin("nope"), DomainError);
}

TEST(ProblemSpec, ParsesOverrides) {
    const auto spec = parse_problem_spec(R"({"problem": "linear", "K1": 2.5, "C": 0.5, "initial_value": 3})");
    EXPECT_EQ(spec.label, "linear");
    const auto p = make_problem(spec);
    EXPECT_EQ(p.k1(), 2.5);
    EXPECT_EQ(p.c(), 0.5);
    EXPECT_EQ(initial_value_for(spec, p), Vector{3.0});
}

TEST(ProblemSpec, DefaultsAndErrors) {
    const auto spec = parse_problem_spec(R"({"problem": "counterexample"})");
    const auto p = make_problem(spec);
    EXPECT_EQ(initial_value_for(spec, p), Vector{10.0});
    EXPECT_THROW(parse_problem_spec("{"), ParseError);
    EXPECT_THROW(parse_problem_spec(R"({"K1": 1})"), ParseError);
    EXPECT_THROW(parse_problem_spec(R"({"problem": "linear", "K1": "x"})"), ParseError);
    EXPECT_THROW(make_problem(parse_problem_spec(R"({"problem": "other"})")), DomainError);
    const auto bad_dim = parse_problem_spec(R"({"problem": "linear", "initial_value": [1, 2]})");
    EXPECT_THROW(initial_value_for(bad_dim, make_problem(bad_dim)), DomainError);
}

TEST(Audit, LinearExamplePassesEverything) {
    const auto report = audit_conditions(linear_example(), small_grid());
    EXPECT_TRUE(report.linear_growth.pass);
    EXPECT_TRUE(report.one_sided_decay.pass);
    EXPECT_TRUE(report.diffusion_decay.pass);
    EXPECT_TRUE(report.one_sided_lipschitz.pass);
    EXPECT_TRUE(report.all_pass());
    EXPECT_GT(report.linear_growth.samples, 0u);
}

TEST(Audit, LinearExamplePassesOnWideGrid) {
    const auto grid = make_audit_grid(1, -1e6, 1e6, 101, {0.0, 1e-3, 1.0, 1e3, 1e6});
    EXPECT_TRUE(audit_conditions(linear_example(), grid).all_pass());
}

TEST(Audit, CounterexampleFailsOnlyLinearGrowth) {
    const auto report = audit_conditions(cubic_counterexample(), small_grid());
    EXPECT_FALSE(report.linear_growth.pass);
    EXPECT_TRUE(report.one_sided_decay.pass);
    EXPECT_TRUE(report.diffusion_decay.pass);
    EXPECT_LE(report.one_sided_decay.worst_margin, 0.0);
}

TEST(Audit, CounterexampleDecayMarginIsMinusXToTheFourth) {
    const auto p = cubic_counterexample();
    for (double t : {0.0, 2.0, 50.0}) {
        for (double x = -7.0; x <= 7.0; x += 0.5) {
            const double margin = x * f1(p, x, t) + 3.0 * x * x / (1.0 + t);
            EXPECT_NEAR(margin, -std::pow(x, 4) / (1.0 + t), 1e-12 * (1 + std::pow(x, 4)));
            EXPECT_LE(margin, 0.0);
        }
    }
}

TEST(Audit, ZeroDriftFailsOneSidedDecay) {
    const auto report = audit_conditions(zero_drift_problem(), small_grid());
    EXPECT_FALSE(report.one_sided_decay.pass);
    // Worst margin is K1 |x|^2 / (1 + t) at |x| = 10, t = 0.
    EXPECT_DOUBLE_EQ(report.one_sided_decay.worst_margin, 100.0);
}

TEST(Audit, BemExampleClaimedK1IsNotSupported) {
    const auto report = audit_conditions(bem_example(), default_audit_grid(1));
    EXPECT_FALSE(report.one_sided_decay.pass);
    // Drift decays like (1+t)^-2, so the supported K1 shrinks with the grid's largest time.
    EXPECT_LT(report.max_k1_one_sided, 0.01);
    EXPECT_LT(report.audited_k1(), 0.5);
}

TEST(Audit, NonFiniteCoefficientNamesThePoint) {
    const SdeProblem p({
        .label = "singular",
        .dimension = 1,
        .drift = [](std::span<const double> x, double, std::span<double> out) { out[0] = -1.0 / x[0]; },
        .diffusion = [](std::span<const double>, double, std::span<double> out) { out[0] = 0.0; },
        .k1 = 1.0,
        .c = 1.0,
    });
    try {
        audit_conditions(p, make_audit_grid(1, -1.0, 1.0, 3, {1.0}));
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("x = (0)"), std::string::npos) << e.what();
    }
}

TEST(Audit, RejectsEmptyOrNegativeSamples) {
    AuditGrid grid = small_grid();
    grid.times = {};
    EXPECT_THROW(audit_conditions(linear_example(), grid), DomainError);
    grid.times = {-1.0};
    EXPECT_THROW(audit_conditions(linear_example(), grid), DomainError);
}
