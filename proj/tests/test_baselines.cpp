#include "baws/baselines.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <vector>

using namespace baws;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> w(n);
    for (double& x : w) x = normal(rng);
    return w;
}

}  // namespace

TEST(RollingForecast, UsesLastKPoints) {
    const auto h = normals(1000, 1);
    const std::span<const double> all(h);
    const auto r = rolling_forecast(h, 250, Mean{});
    EXPECT_EQ(r.window_length, 250u);
    EXPECT_DOUBLE_EQ(r.theta[0], fit_mean(all.last(250)).theta[0]);
}

TEST(RollingForecast, ShortHistoryUsesEverything) {
    const auto h = normals(100, 2);
    const auto r = rolling_forecast(h, 250, VaR{0.95});
    EXPECT_EQ(r.window_length, 100u);
    EXPECT_EQ(r.theta[0], full_window_forecast(h, VaR{0.95}).theta[0]);
}

TEST(RollingForecast, ConstantHistoryMatchesFullWindow) {
    const std::vector<double> h(80, -0.4);
    EXPECT_TRUE(rolling_forecast(h, 10, VaRES{0.9}).theta == full_window_forecast(h, VaRES{0.9}).theta);
}

TEST(RollingForecast, Errors) {
    EXPECT_THROW(rolling_forecast(std::vector<double>{}, 5, Mean{}), InsufficientHistory);
    EXPECT_THROW(rolling_forecast(std::vector<double>{1.0}, 0, Mean{}), ParameterError);
    EXPECT_THROW(full_window_forecast(std::vector<double>{}, Mean{}), InsufficientHistory);
}

TEST(FullWindow, Examples) {
    std::vector<double> h(100);
    std::iota(h.begin(), h.end(), 1.0);
    EXPECT_DOUBLE_EQ(full_window_forecast(h, Mean{}).theta[0], 50.5);
    EXPECT_EQ(full_window_forecast(std::vector<double>{3.0}, Mean{}).theta[0], 3.0);
}

TEST(FullWindow, EqualsRollingWithHugeWindow) {
    const auto h = normals(321, 3);
    for (const ForecastTarget target : {ForecastTarget{Mean{}}, ForecastTarget{VaR{0.9}},
                                        ForecastTarget{VaRES{0.95}}}) {
        EXPECT_TRUE(full_window_forecast(h, target).theta == rolling_forecast(h, 321, target).theta);
        EXPECT_TRUE(full_window_forecast(h, target).theta ==
                    rolling_forecast(h, std::numeric_limits<std::size_t>::max(), target).theta);
    }
}

TEST(SawsThreshold, Examples) {
    EXPECT_NEAR(saws_threshold(100, {0.1, 0.3, SawsFamily::ConvexSmooth}), 0.004754, 1e-6);
    EXPECT_NEAR(saws_threshold(100, {0.1, 0.5, SawsFamily::Lipschitz}), 0.07924, 1e-5);
}

TEST(SawsThreshold, DecreasingInWindow) {
    for (auto family : {SawsFamily::ConvexSmooth, SawsFamily::Lipschitz}) {
        const SAWSConfig cfg{0.1, 0.3, family};
        for (std::size_t i = 1; i < 2000; i += 7) EXPECT_GT(saws_threshold(i, cfg), saws_threshold(i + 1, cfg));
    }
}

TEST(SawsThreshold, Validation) {
    EXPECT_THROW(saws_threshold(10, {0.0, 0.3, SawsFamily::ConvexSmooth}), ParameterError);
    EXPECT_THROW(saws_threshold(10, {0.1, -1.0, SawsFamily::ConvexSmooth}), ParameterError);
    EXPECT_THROW(parse_saws_family("smooth"), ParameterError);
    EXPECT_EQ(parse_saws_family("lipschitz"), SawsFamily::Lipschitz);
}

TEST(SawsSelect, HugeConstantSelectsLargest) {
    const auto h = normals(600, 4);
    const auto tr = saws_select(h, Mean{}, {0.1, 1e12, SawsFamily::ConvexSmooth}, CandidateGridConfig{});
    EXPECT_EQ(tr.k_hat, 600u);
}

TEST(SawsSelect, SameCandidatesAsBaws) {
    const auto h = normals(700, 5);
    BootstrapConfig boot;
    boot.replications = 20;
    const auto a = saws_select(h, VaR{0.95}, SAWSConfig{}, CandidateGridConfig{}, 333);
    const auto b = select_window(h, VaR{0.95}, boot, CandidateGridConfig{}, 333);
    EXPECT_EQ(a.candidates, b.candidates);
}

TEST(SawsSelect, IdenticalToCoreWithSameThresholds) {
    const auto h = normals(500, 6);
    const SAWSConfig cfg{0.1, 0.3, SawsFamily::ConvexSmooth};
    const auto a = saws_select(h, Mean{}, cfg, CandidateGridConfig{});
    const auto b = select_window(h, Mean{}, CustomThreshold{[&](std::size_t i) { return saws_threshold(i, cfg); }},
                                 CandidateGridConfig{});
    EXPECT_EQ(a.candidates, b.candidates);
    EXPECT_EQ(a.k_hat, b.k_hat);
    ASSERT_EQ(a.pairs.size(), b.pairs.size());
    for (std::size_t p = 0; p < a.pairs.size(); ++p) {
        EXPECT_EQ(a.pairs[p].gap, b.pairs[p].gap);
        EXPECT_EQ(a.pairs[p].tau, b.pairs[p].tau);
        EXPECT_EQ(a.pairs[p].reject, b.pairs[p].reject);
    }
}
