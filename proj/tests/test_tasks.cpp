#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "bohp/tasks.hpp"

using namespace bohp;

namespace {

TaskConfig cfg_of(TaskKind kind, std::uint64_t seed, std::size_t n = 8) { return TaskConfig{kind, n, seed}; }

Vector pattern_part(const EpisodeStep& s) { return Vector(s.input.begin(), s.input.end() - 2); }

std::pair<double, double> suffix(const EpisodeStep& s) { return {s.input[s.input.size() - 2], s.input.back()}; }

}  // namespace

TEST(PatternCompletion, CueIsOneOfThePatternsSetBits) {
    // Find seeds producing p = [1, 0, 1] and check the cue on each.
    std::set<std::size_t> cues;
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        const auto s = gen_pattern_completion(cfg_of(TaskKind::Completion, seed, 3));
        if (s.steps[0].input != Vector{1.0, 0.0, 1.0}) continue;
        const auto& cue = s.steps[1].input;
        EXPECT_EQ(cue[1], 0.0);
        for (std::size_t i = 0; i < 3; ++i)
            if (cue[i] == 1.0) cues.insert(i);
    }
    EXPECT_EQ(cues, (std::set<std::size_t>{0, 2}));
}

TEST(PatternCompletion, SingleBitPatternCueEqualsPattern) {
    std::size_t seen = 0;
    for (std::uint64_t seed = 0; seed < 3000; ++seed) {
        const auto s = gen_pattern_completion(cfg_of(TaskKind::Completion, seed, 4));
        const auto& p = s.steps[0].input;
        if (std::count(p.begin(), p.end(), 1.0) != 1) continue;
        EXPECT_EQ(s.steps[1].input, p);
        ++seen;
    }
    EXPECT_GT(seen, 0u);
}

TEST(PatternCompletion, ShapeOverManySeeds) {
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        const auto s = gen_pattern_completion(cfg_of(TaskKind::Completion, seed));
        ASSERT_EQ(s.steps.size(), 2u);
        const auto& p = s.steps[0].input;
        ASSERT_EQ(p.size(), 8u);
        ASSERT_GE(std::count(p.begin(), p.end(), 1.0), 1);
        ASSERT_FALSE(s.steps[0].loss_active);
        ASSERT_TRUE(s.steps[0].target.empty());
        ASSERT_TRUE(s.steps[1].loss_active);
        ASSERT_EQ(s.steps[1].target, p);
        const auto& cue = s.steps[1].input;
        ASSERT_EQ(std::count(cue.begin(), cue.end(), 1.0), 1);
        const auto bit = static_cast<std::size_t>(std::find(cue.begin(), cue.end(), 1.0) - cue.begin());
        ASSERT_EQ(p[bit], 1.0);
        for (double v : p) ASSERT_TRUE(v == 0.0 || v == 1.0);
        for (double v : cue) ASSERT_TRUE(v == 0.0 || v == 1.0);
    }
}

TEST(OneShot, ShapeAndLabelsOverManySeeds) {
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        const auto s = gen_one_shot(cfg_of(TaskKind::OneShot, seed));
        ASSERT_EQ(s.steps.size(), kClassEpisodeLength);
        const Vector a = pattern_part(s.steps[0]);
        const Vector b = pattern_part(s.steps[1]);
        ASSERT_NE(a, b);
        ASSERT_EQ(suffix(s.steps[0]), std::make_pair(0.0, 1.0));
        ASSERT_EQ(suffix(s.steps[1]), std::make_pair(1.0, 0.0));
        for (std::size_t t = 0; t < s.steps.size(); ++t) {
            const auto& step = s.steps[t];
            ASSERT_EQ(step.input.size(), 10u);
            for (double v : step.input) ASSERT_TRUE(v == -1.0 || v == 0.0 || v == 1.0);
            ASSERT_EQ(step.loss_active, t >= 2);
            if (t < 2) continue;
            ASSERT_EQ(suffix(step), std::make_pair(0.0, 0.0));
            const Vector p = pattern_part(step);
            ASSERT_TRUE(p == a || p == b);
            ASSERT_EQ(*step.target_class, p == a ? kLabel01 : kLabel10);
        }
        for (double v : a) ASSERT_TRUE(v == -1.0 || v == 1.0);
    }
}

TEST(OneShot, QueriesUseBothPatterns) {
    std::size_t a_count = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto s = gen_one_shot(cfg_of(TaskKind::OneShot, seed));
        for (std::size_t t = 2; t < s.steps.size(); ++t) {
            a_count += *s.steps[t].target_class == kLabel01;
            ++total;
        }
    }
    EXPECT_NEAR(static_cast<double>(a_count) / static_cast<double>(total), 0.5, 0.02);
}

TEST(Reversal, ShapeAndSwappedLabelsOverManySeeds) {
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        const auto s = gen_reversal(cfg_of(TaskKind::Reversal, seed));
        ASSERT_EQ(s.steps.size(), kClassEpisodeLength);
        const Vector a = pattern_part(s.steps[0]);
        const Vector b = pattern_part(s.steps[1]);
        ASSERT_NE(a, b);
        std::size_t inactive = 0;
        for (std::size_t t = 0; t < s.steps.size(); ++t) {
            const auto& step = s.steps[t];
            const bool instruction = t < 2 || t == kReversalStep || t == kReversalStep + 1;
            ASSERT_EQ(step.loss_active, !instruction);
            ASSERT_EQ(step.after_reversal, t >= kReversalStep);
            inactive += !step.loss_active;
            if (instruction) continue;
            const Vector p = pattern_part(step);
            const bool late = t > kReversalStep;
            const std::size_t expected = (p == a) != late ? kLabel01 : kLabel10;
            ASSERT_EQ(*step.target_class, expected);
        }
        ASSERT_EQ(inactive, 4u);
        ASSERT_EQ(pattern_part(s.steps[kReversalStep]), a);
        ASSERT_EQ(suffix(s.steps[kReversalStep]), std::make_pair(1.0, 0.0));
        ASSERT_EQ(pattern_part(s.steps[kReversalStep + 1]), b);
        ASSERT_EQ(suffix(s.steps[kReversalStep + 1]), std::make_pair(0.0, 1.0));
    }
}

TEST(Reversal, SamePatternCarriesOppositeClassesAcrossTheSwap) {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto s = gen_reversal(cfg_of(TaskKind::Reversal, seed));
        const Vector p4 = pattern_part(s.steps[4]);
        const Vector p14 = pattern_part(s.steps[14]);
        if (p4 != p14) continue;
        EXPECT_NE(*s.steps[4].target_class, *s.steps[14].target_class);
        ++checked;
    }
    EXPECT_GT(checked, 50u);
}

TEST(Generators, SameSeedSameScript) {
    for (auto kind : {TaskKind::Completion, TaskKind::OneShot, TaskKind::Reversal})
        for (std::uint64_t seed : {0ull, 1ull, 987654321ull})
            EXPECT_EQ(generate_episode(cfg_of(kind, seed)), generate_episode(cfg_of(kind, seed)));
    EXPECT_NE(generate_episode(cfg_of(TaskKind::OneShot, 1)), generate_episode(cfg_of(TaskKind::OneShot, 2)));
}

TEST(Generators, ConfigValidation) {
    EXPECT_THROW(cfg_of(TaskKind::OneShot, 0, 1).validate(), UsageError);
    EXPECT_THROW(gen_reversal(cfg_of(TaskKind::Reversal, 0, 1)), UsageError);
    EXPECT_THROW(cfg_of(TaskKind::Custom, 0).validate(), UsageError);
    EXPECT_THROW(generate_episode(cfg_of(TaskKind::Custom, 0)), UsageError);
    EXPECT_NO_THROW(cfg_of(TaskKind::OneShot, 0, 2).validate());
}

TEST(LossL1, Examples) {
    const auto a = loss_l1(Vector{0, 0, 0}, Vector{1, 0, 1});
    EXPECT_DOUBLE_EQ(a.loss, 2.0);
    EXPECT_EQ(a.grad, (Vector{-1, 0, -1}));
    const auto b = loss_l1(Vector{0.3, -0.2}, Vector{0.3, -0.2});
    EXPECT_EQ(b.loss, 0.0);
    EXPECT_EQ(b.grad, (Vector{0, 0}));
    const auto c = loss_l1(Vector{0.5}, Vector{0.0});
    EXPECT_DOUBLE_EQ(c.loss, 0.5);
    EXPECT_EQ(c.grad, (Vector{1.0}));
    EXPECT_THROW(loss_l1(Vector{0.5}, Vector{0.0, 1.0}), UsageError);
}

TEST(LossMse, MeanOverElements) {
    const auto v = loss_mse(Vector{1.0, 0.0}, Vector{0.0, 0.0});
    EXPECT_DOUBLE_EQ(v.loss, 0.5);
    EXPECT_EQ(v.grad, (Vector{1.0, 0.0}));
}

TEST(LossCrossEntropy, Examples) {
    EXPECT_NEAR(loss_cross_entropy(Vector{0.5, 0.5}, 0).loss, 0.6931, 1e-4);
    const auto perfect = loss_cross_entropy(Vector{1.0, 0.0}, 0);
    EXPECT_EQ(perfect.loss, 0.0);
    EXPECT_EQ(perfect.grad, (Vector{0.0, 0.0}));
    const auto wrong = loss_cross_entropy(Vector{0.9, 0.1}, 1);
    EXPECT_NEAR(wrong.loss, 2.3026, 1e-4);
    EXPECT_NEAR(wrong.grad[0], 0.9, 1e-15);
    EXPECT_NEAR(wrong.grad[1], -0.9, 1e-15);
    EXPECT_FALSE(wrong.clamped);
}

TEST(LossCrossEntropy, ZeroProbabilityIsClampedAndFlagged) {
    const auto v = loss_cross_entropy(Vector{1.0, 0.0}, 1);
    EXPECT_TRUE(v.clamped);
    EXPECT_NEAR(v.loss, -std::log(kProbabilityFloor), 1e-9);
    EXPECT_THROW(loss_cross_entropy(Vector{1.0, 0.0}, 2), UsageError);
}

TEST(Metrics, PerfectOutputs) {
    const auto s = gen_one_shot(cfg_of(TaskKind::OneShot, 4));
    std::vector<Vector> out;
    for (const auto& step : s.steps) {
        Vector y(2, 0.0);
        if (step.target_class) y[*step.target_class] = 1.0;
        out.push_back(y);
    }
    EXPECT_EQ(metric_accuracy(out, s), 1.0);
    EXPECT_EQ(metric_mean_abs_error(out, s), 0.0);
}

TEST(Metrics, ZeroOutputAgainstHalfSetPattern) {
    EpisodeScript s;
    s.kind = TaskKind::Completion;
    s.steps.push_back({Vector(8, 0.0), {}, std::nullopt, false, false});
    s.steps.push_back({Vector(8, 0.0), {1, 1, 0, 0, 1, 0, 1, 0}, std::nullopt, true, false});
    std::vector<Vector> out(2, Vector(8, 0.0));
    EXPECT_DOUBLE_EQ(metric_mean_abs_error(out, s), 0.5);
}

TEST(Metrics, ConstantPredictionIsNearChance) {
    std::size_t hits = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        const auto s = gen_one_shot(cfg_of(TaskKind::OneShot, seed));
        std::vector<Vector> out(s.steps.size(), Vector{0.9, 0.1});
        const double acc = metric_accuracy(out, s);
        hits += static_cast<std::size_t>(std::lround(acc * 18.0));
        total += 18;
    }
    EXPECT_NEAR(static_cast<double>(hits) / static_cast<double>(total), 0.5, 0.02);
}

TEST(Metrics, AfterReversalFilter) {
    const auto s = gen_reversal(cfg_of(TaskKind::Reversal, 6));
    std::vector<Vector> out;
    for (const auto& step : s.steps) {
        Vector y(2, 0.0);
        if (step.target_class) y[step.after_reversal ? *step.target_class : 1 - *step.target_class] = 1.0;
        out.push_back(y);
    }
    EXPECT_EQ(metric_accuracy(out, s, StepFilter::AfterReversal), 1.0);
    EXPECT_NEAR(metric_accuracy(out, s, StepFilter::LossActive), 0.5, 1e-12);
}

TEST(EpisodeJson, CarriesInputsTargetsAndMask) {
    const auto j = to_json(gen_reversal(cfg_of(TaskKind::Reversal, 1)));
    EXPECT_EQ(j["task"], "reversal");
    ASSERT_EQ(j["steps"].size(), 20u);
    EXPECT_EQ(j["steps"][0]["loss_active"], false);
    EXPECT_EQ(j["steps"][10]["after_reversal"], true);
    EXPECT_EQ(j["steps"][12]["input"].size(), 10u);
    EXPECT_TRUE(j["steps"][12].contains("target_class"));
}

TEST(KindNames, RoundTrip) {
    for (auto k : {TaskKind::Completion, TaskKind::OneShot, TaskKind::Reversal, TaskKind::Custom})
        EXPECT_EQ(task_kind_from_string(to_string(k)), k);
    for (auto k : {LossKind::L1, LossKind::Mse, LossKind::CrossEntropy})
        EXPECT_EQ(loss_kind_from_string(to_string(k)), k);
    EXPECT_THROW(task_kind_from_string("maze"), UsageError);
    EXPECT_THROW(loss_kind_from_string("hinge"), UsageError);
}
