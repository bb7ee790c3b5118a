#include <gtest/gtest.h>

#include "polystab/verification.hpp"

using namespace polystab;

TEST(MarginAccumulator, TracksWorstAndFailures) {
    MarginAccumulator acc(1e-12, false);
    acc.add(0.5, [] { return std::string("a"); });
    acc.add(-1e-13, [] { return std::string("b"); });
    acc.add(0.1, [] { return std::string("c"); });
    EXPECT_EQ(acc.evaluated(), 3u);
    EXPECT_EQ(acc.failures(), 0u);
    EXPECT_EQ(acc.worst_point(), "b");
    acc.add(-1e-6, [] { return std::string("d"); });
    EXPECT_EQ(acc.failures(), 1u);
    EXPECT_EQ(acc.worst_margin(), -1e-6);
}

TEST(MarginAccumulator, StrictRejectsZero) {
    MarginAccumulator acc(1e-12, true);
    acc.add(0.0, [] { return std::string("zero"); });
    EXPECT_EQ(acc.failures(), 1u);
}

TEST(MarginAccumulator, LabelsBuiltLazily) {
    MarginAccumulator acc(0.0, false);
    int built = 0;
    for (int i = 0; i < 100; ++i) {
        acc.add(100.0 - i * 0.0 + (i == 0 ? 0.0 : 1.0), [&] {
            ++built;
            return std::string("x");
        });
    }
    EXPECT_EQ(built, 1);
}

TEST(Verification, GammaKernelChecksPass) {
    for (const auto& r : run_checks(gamma_kernel_checks())) {
        EXPECT_TRUE(r.pass) << r.name << " worst " << r.worst_margin << " at " << r.worst_point;
        EXPECT_GT(r.evaluated, 0u) << r.name;
    }
}

TEST(Verification, ProofBoundChecksPass) {
    for (const auto& r : run_checks(proof_bound_checks())) {
        EXPECT_TRUE(r.pass) << r.name << " worst " << r.worst_margin << " at " << r.worst_point;
    }
}

TEST(Verification, InvertedInequalityFailsWithNamedPoint) {
    // Reverse of the upper bound: should fail everywhere on a small grid.
    const std::vector<InequalityCheck> checks{{"inverted", [](MarginAccumulator& acc) {
                                                   for (int k = 1; k <= 5; ++k) {
                                                       acc.add(-static_cast<double>(k), [k] {
                                                           return "k=" + std::to_string(k);
                                                       });
                                                   }
                                               }}};
    const auto results = run_checks(checks);
    ASSERT_EQ(results.size(), 1u);
    EXPECT_FALSE(results[0].pass);
    EXPECT_EQ(results[0].failures, 5u);
    EXPECT_EQ(results[0].worst_point, "k=5");
}

TEST(Verification, EmptyCheckDoesNotPass) {
    const std::vector<InequalityCheck> checks{{"nothing", [](MarginAccumulator&) {}}};
    EXPECT_FALSE(run_checks(checks)[0].pass);
}
