#include <gtest/gtest.h>

#include "bohp/summary.hpp"
#include "test_util.hpp"

using namespace bohp;

TEST(ClassifyConnection, ThresholdExamples) {
    EXPECT_EQ(classify_connection(0.9, 0.02, 1.0, 1.0), ConnectionClass::FixedExcitatory);
    EXPECT_EQ(classify_connection(0.01, -0.8, 1.0, 1.0), ConnectionClass::PlasticInhibitory);
    EXPECT_EQ(classify_connection(-0.5, 0.0, 1.0, 1.0), ConnectionClass::FixedInhibitory);
    EXPECT_EQ(classify_connection(0.0, 0.3, 1.0, 1.0), ConnectionClass::PlasticExcitatory);
    EXPECT_EQ(classify_connection(0.1, 0.1, 1.0, 1.0), ConnectionClass::Inactive);
}

TEST(ClassifyConnection, StrongPlasticityTakesPrecedence) {
    EXPECT_EQ(classify_connection(5.0, 0.5, 5.0, 1.0), ConnectionClass::PlasticExcitatory);
    EXPECT_EQ(classify_connection(0.2, 0.2, 1.0, 1.0), ConnectionClass::PlasticExcitatory);  // boundary counts
    EXPECT_EQ(classify_connection(0.0, 0.0, 0.0, 0.0), ConnectionClass::Inactive);
}

TEST(Summarize, CompletionLayout) {
    Network net = Network::zeros(fixtures::single_plastic(3, 3), 0.5);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            net.plastic().w(j, i) = i == j ? 3.0 : 0.1;
            net.plastic().alpha(j, i) = i == j ? 0.05 : 1.5;
        }
    const auto s = summarize({net, TaskConfig{TaskKind::Completion, 3, 0}});
    EXPECT_EQ(s.connections.size(), 9u);
    EXPECT_EQ(s.at(0, 1, 1).cls, ConnectionClass::FixedExcitatory);
    EXPECT_EQ(s.at(0, 2, 0).cls, ConnectionClass::PlasticExcitatory);
    EXPECT_FALSE(s.pattern_alpha.has_value());
    EXPECT_TRUE(check_completion_structure(net).ok());

    net.plastic().w(2, 0) = 4.0;  // input 0 now feeds output 2 hardest
    const auto broken = check_completion_structure(net);
    EXPECT_FALSE(broken.diagonal_fixed);
    net.plastic().alpha(0, 2) = 0.0;
    EXPECT_FALSE(check_completion_structure(net).cross_plastic);
    EXPECT_THROW(s.at(0, 5, 0), UsageError);
}

TEST(Summarize, PatternAlphaSignsForClassificationModels) {
    Network net = Network::zeros(fixtures::plastic_softmax(6, 2, 2), 0.5);
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 6; ++k) net.plastic().alpha(j, k) = k < 4 ? -1.0 : 2.0;
    auto s = summarize({net, TaskConfig{TaskKind::Reversal, 4, 0}});
    ASSERT_TRUE(s.pattern_alpha.has_value());
    EXPECT_TRUE(s.pattern_alpha->all_negative());
    EXPECT_EQ(s.pattern_alpha->negative, 8u);
    EXPECT_EQ(s.at(0, 0, 0).cls, ConnectionClass::PlasticInhibitory);
    EXPECT_EQ(s.at(1, 0, 0).cls, ConnectionClass::Inactive);

    net.plastic().alpha(1, 2) = 0.0;
    s = summarize({net, TaskConfig{TaskKind::OneShot, 4, 0}});
    EXPECT_FALSE(s.pattern_alpha->all_negative());
    EXPECT_EQ(s.pattern_alpha->zero, 1u);
    EXPECT_THROW(summarize({net, TaskConfig{TaskKind::OneShot, 8, 0}}), UsageError);
}

TEST(Summarize, JsonAndTable) {
    Network net = Network::zeros(fixtures::plastic_softmax(4, 2, 2), 0.5);
    net.plastic().alpha(0, 0) = -0.8;
    net.plastic().w(1, 1) = 0.9;
    const auto s = summarize({net, TaskConfig{TaskKind::Reversal, 2, 0}});
    const auto j = s.to_json();
    EXPECT_EQ(j["strong_fraction"], kStrongFraction);
    EXPECT_EQ(j["connections"].size(), 8u + 4u);
    EXPECT_EQ(j["connections"][0]["class"], "plastic-inhibitory");
    EXPECT_EQ(j["pattern_alpha_signs"]["all_negative"], false);
    const auto table = s.table();
    EXPECT_NE(table.find("plastic-inhibitory"), std::string::npos);
    EXPECT_NE(table.find("fixed-excitatory"), std::string::npos);
    EXPECT_NE(table.find("pattern->hidden alpha signs"), std::string::npos);
}
