#include <gtest/gtest.h>

#include <chrono>

#include "bohp/gradcheck.hpp"

using namespace bohp;

TEST(GradcheckSuite, DefaultSuitePassesWithinAMinute) {
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_gradcheck_suite(GradcheckSuiteConfig{});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_EQ(r.instances, 100u);
    EXPECT_TRUE(r.report.pass) << "max rel error " << r.report.max_rel_error;
    EXPECT_LE(r.report.max_rel_error, 1e-4);
    EXPECT_TRUE(r.failed_instances.empty());
    EXPECT_LT(seconds, 60.0);
}

TEST(GradcheckSuite, CrossInputAblationFails) {
    GradcheckSuiteConfig cfg;
    cfg.fault = GradientFault::DropCrossInputCoupling;
    const auto r = run_gradcheck_suite(cfg);
    EXPECT_FALSE(r.report.pass);
    EXPECT_FALSE(r.failed_instances.empty());
}

TEST(GradcheckSuite, NegatedAlphaFails) {
    GradcheckSuiteConfig cfg;
    cfg.instances = 20;
    cfg.fault = GradientFault::NegateAlpha;
    const auto r = run_gradcheck_suite(cfg);
    EXPECT_FALSE(r.report.pass);
    for (const auto& id : r.report.failures()) EXPECT_EQ(id.kind, ParamKind::Alpha);
}

TEST(GradcheckSuite, EmptySuiteIsRejected) {
    GradcheckSuiteConfig cfg;
    cfg.instances = 0;
    try {
        run_gradcheck_suite(cfg);
        FAIL();
    } catch (const UsageError& e) {
        EXPECT_STREQ(e.what(), "empty suite");
    }
}

TEST(GradcheckInstances, RespectSizeBoundsAndInputAlphabet) {
    std::mt19937_64 rng(99);
    GradcheckSuiteConfig cfg;
    bool saw_upper = false, saw_lone = false;
    for (int i = 0; i < 500; ++i) {
        const auto inst = random_gradcheck_instance(rng, cfg);
        const auto& p = inst.net.plastic();
        ASSERT_LE(p.n_in(), 10u);
        ASSERT_LE(p.n_out(), 4u);
        ASSERT_GE(inst.script.steps.size(), 1u);
        ASSERT_LE(inst.script.steps.size(), 10u);
        bool any_active = false;
        for (const auto& s : inst.script.steps) {
            for (double v : s.input) ASSERT_TRUE(v == -1.0 || v == 0.0 || v == 1.0);
            any_active |= s.loss_active;
        }
        ASSERT_TRUE(any_active);
        for (double v : p.w.data()) ASSERT_LE(std::abs(v), 1.0);
        saw_upper |= inst.net.layers.size() > 1;
        saw_lone |= inst.net.layers.size() == 1;
    }
    EXPECT_TRUE(saw_upper && saw_lone);
}

TEST(GradcheckSuite, SameSeedSameReport) {
    GradcheckSuiteConfig cfg;
    cfg.instances = 10;
    cfg.seed = 5;
    const auto a = run_gradcheck_suite(cfg);
    const auto b = run_gradcheck_suite(cfg);
    EXPECT_EQ(a.report.to_json(), b.report.to_json());
    EXPECT_EQ(a.rejected, b.rejected);
}
