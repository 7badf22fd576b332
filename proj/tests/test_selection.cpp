#include "baws/selection.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace baws;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double mu = 0.0, double sd = 1.0) {
    Xoshiro256 rng(seed);
    std::normal_distribution<double> normal(mu, sd);
    std::vector<double> w(n);
    for (double& x : w) x = normal(rng);
    return w;
}

double upper_normal_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

TEST(CandidateWindows, NoPreviousSelection) {
    std::vector<std::size_t> expected{20, 25, 30, 35, 40, 45, 50, 60, 70, 80, 90, 100};
    for (std::size_t k = 120; k <= 280; k += 20) expected.push_back(k);
    for (std::size_t k : {300, 350, 400}) expected.push_back(k);
    EXPECT_EQ(candidate_windows(400, std::nullopt, CandidateGridConfig{}), expected);
}

TEST(CandidateWindows, WithPreviousSelection) {
    std::vector<std::size_t> expected{20, 25, 30, 35, 40, 45, 50, 60, 70, 80, 90, 100, 120};
    for (std::size_t k : {121, 171, 221, 271, 321, 371, 400}) expected.push_back(k);
    EXPECT_EQ(candidate_windows(400, 120, CandidateGridConfig{}), expected);
}

TEST(CandidateWindows, HistoryEqualToMinimum) {
    EXPECT_EQ(candidate_windows(20, std::nullopt, CandidateGridConfig{}), std::vector<std::size_t>{20});
    EXPECT_EQ(candidate_windows(20, 20, CandidateGridConfig{}), std::vector<std::size_t>{20});
}

TEST(CandidateWindows, InsufficientHistory) {
    EXPECT_THROW(candidate_windows(19, std::nullopt, CandidateGridConfig{}), InsufficientHistory);
}

TEST(CandidateWindows, AlwaysContainsEndpointsAndRespectsCap) {
    CandidateGridConfig cfg;
    cfg.max_window = 1000;
    for (std::size_t h : {20u, 33u, 57u, 999u, 1000u, 1001u, 1777u, 2500u}) {
        for (std::optional<std::size_t> prev : {std::optional<std::size_t>{}, std::optional<std::size_t>{37},
                                                std::optional<std::size_t>{640}}) {
            const auto c = candidate_windows(h, prev, cfg);
            EXPECT_EQ(c.front(), 20u);
            EXPECT_EQ(c.back(), std::min<std::size_t>(h, 1000));
            EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
            EXPECT_EQ(std::adjacent_find(c.begin(), c.end()), c.end());
        }
    }
}

TEST(CandidateWindows, LargeWindowsUseStep100) {
    const auto c = candidate_windows(1250, std::nullopt, CandidateGridConfig{});
    EXPECT_NE(std::find(c.begin(), c.end(), 950u), c.end());
    EXPECT_NE(std::find(c.begin(), c.end(), 1000u), c.end());
    EXPECT_NE(std::find(c.begin(), c.end(), 1200u), c.end());
    EXPECT_EQ(std::find(c.begin(), c.end(), 1050u), c.end());
    EXPECT_EQ(c.back(), 1250u);
}

TEST(GridConfig, Validation) {
    CandidateGridConfig cfg;
    cfg.min_window = 1;
    EXPECT_THROW(cfg.validate(), ParameterError);
    cfg = {};
    cfg.bands = {{100, 10}, {50, 5}};
    EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(PairwiseTest, Examples) {
    EXPECT_FALSE(pairwise_test(0.0, 0.0));
    EXPECT_TRUE(pairwise_test(0.5, 0.3));
    EXPECT_FALSE(pairwise_test(0.3, 0.3));
}

TEST(Bonferroni, Examples) {
    EXPECT_NEAR(bonferroni_level(0.9, 5), 0.98, 1e-15);
    EXPECT_NEAR(bonferroni_level(0.9, 1), 0.9, 1e-15);
    EXPECT_NEAR(bonferroni_level(0.95, 10), 0.995, 1e-15);
    EXPECT_THROW(bonferroni_level(0.9, 0), ParameterError);
}

TEST(RejectionProbability, EqualMeansIsTwoSidedTail) {
    const GaussianTwoRegime m{1.0, 1.0, 0.5, 2.0, 300, 100};
    const double w = 200.0 / 300.0;
    const double v = w * w * (0.5 / 200.0 + 2.0 / 100.0);
    EXPECT_NEAR(rejection_probability_gaussian(m, 0.01), 2.0 * upper_normal_tail(0.1 / std::sqrt(v)), 1e-14);
}

TEST(RejectionProbability, StrongBreakIsCertain) {
    EXPECT_NEAR(rejection_probability_gaussian({1, 2, 0.25, 0.25, 500, 250}, 0.1), 1.0, 1e-6);
}

TEST(RejectionProbability, Validation) {
    EXPECT_THROW(rejection_probability_gaussian({1, 2, 1, 1, 500, 250}, 0.0), ParameterError);
    EXPECT_THROW(rejection_probability_gaussian({1, 2, 1, 1, 250, 250}, 0.1), ParameterError);
    EXPECT_THROW(rejection_probability_gaussian({1, 2, 0, 1, 500, 250}, 0.1), ParameterError);
}

TEST(RejectionProbability, AgreesWithSimulation) {
    const GaussianTwoRegime m{1.0, 1.2, 1.0, 0.5, 120, 60};
    const double tau = 0.01;
    EXPECT_NEAR(simulate_rejection_rate(m, tau, 100000, 3), rejection_probability_gaussian(m, tau), 0.01);
}

TEST(SelectWindow, HugeThresholdSelectsLargest) {
    const auto h = normals(400, 1);
    const auto tr = select_window(h, Mean{}, FixedThreshold{1e300}, CandidateGridConfig{});
    EXPECT_EQ(tr.k_hat, 400u);
    EXPECT_TRUE(trace_is_consistent(tr));
}

TEST(SelectWindow, ConstantHistorySelectsLargest) {
    const std::vector<double> h(300, 2.5);
    for (const ForecastTarget target : {ForecastTarget{Mean{}}, ForecastTarget{VaR{0.95}},
                                        ForecastTarget{VaRES{0.95}}}) {
        BootstrapConfig cfg;
        cfg.replications = 30;
        const auto tr = select_window(h, target, cfg, CandidateGridConfig{});
        EXPECT_EQ(tr.k_hat, 300u);
        EXPECT_EQ(tr.theta_hat[0], 2.5);
        for (const auto& p : tr.pairs) {
            EXPECT_EQ(p.gap, 0.0);
            EXPECT_EQ(p.tau, 0.0);
        }
    }
}

TEST(SelectWindow, TraceInvariantsAndThresholdCaching) {
    auto h = normals(500, 2, 1.0, 0.5);
    const auto tail = normals(150, 3, 2.0, 0.5);
    std::copy(tail.begin(), tail.end(), h.end() - 150);
    BootstrapConfig cfg;
    cfg.replications = 100;
    cfg.seed = 5;
    for (const ForecastTarget target : {ForecastTarget{Mean{}}, ForecastTarget{VaR{0.9}},
                                        ForecastTarget{VaRES{0.9}}}) {
        const auto tr = select_window(h, target, cfg, CandidateGridConfig{}, 200);
        EXPECT_TRUE(trace_is_consistent(tr));
        EXPECT_EQ(tr.t, 501u);
        EXPECT_TRUE(std::isnan(tr.thresholds.back()));
        for (const auto& p : tr.pairs) {
            const auto idx = std::lower_bound(tr.candidates.begin(), tr.candidates.end(), p.reference) -
                             tr.candidates.begin();
            EXPECT_EQ(p.tau, tr.thresholds[static_cast<std::size_t>(idx)]);
        }
        const auto again = select_window(h, target, cfg, CandidateGridConfig{}, 200);
        EXPECT_EQ(again.k_hat, tr.k_hat);
        EXPECT_EQ(again.thresholds.front(), tr.thresholds.front());
        EXPECT_TRUE(again.theta_hat == tr.theta_hat);
        // selected estimator is the fit on the selected window
        EXPECT_TRUE(tr.theta_hat == fit(std::span<const double>(h).last(tr.k_hat), target).theta);
    }
}

TEST(SelectWindow, ZeroThresholdWithNoisyDataStaysSmall) {
    int small = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto h = normals(600, 100 + s);
        const auto tr = select_window(h, Mean{}, FixedThreshold{0.0}, CandidateGridConfig{});
        if (tr.k_hat <= 25) ++small;
    }
    EXPECT_GE(small, 45);
}

TEST(SelectWindow, SquaredLossGapIsSquaredMeanDifference) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto h = normals(500, 200 + s, 1.0, 0.5);
        const std::vector<std::size_t> cand{250, 500};
        const auto tr = select_window_over(h, cand, Mean{}, FixedThreshold{0.1});
        ASSERT_EQ(tr.pairs.size(), 1u);
        const std::span<const double> all(h);
        const double d = fit_mean(all).theta[0] - fit_mean(all.last(250)).theta[0];
        EXPECT_NEAR(tr.pairs[0].gap, d * d, 1e-10);
    }
}

TEST(SelectWindow, FwerRequantilesCachedGaps) {
    const auto h = normals(400, 4);
    BootstrapConfig cfg;
    cfg.replications = 200;
    cfg.seed = 9;
    cfg.control = ErrorControl::FWER;
    const std::vector<std::size_t> cand{50, 100, 200, 400};
    const auto tr = select_window_over(h, cand, Mean{}, cfg);
    EXPECT_TRUE(trace_is_consistent(tr));
    const std::span<const double> all(h);
    for (const auto& p : tr.pairs) {
        const auto b = static_cast<std::size_t>(std::find(cand.begin(), cand.end(), p.candidate) - cand.begin());
        const auto th = bootstrap_threshold(all.last(p.reference), Mean{}, cfg, tr.t);
        EXPECT_EQ(p.tau, th.quantile(bonferroni_level(cfg.beta, b)));
        EXPECT_GE(p.tau, th.tau);
    }
}

TEST(SelectWindow, CustomThresholdFunction) {
    const auto h = normals(300, 5);
    const auto tr = select_window(h, Mean{}, CustomThreshold{[](std::size_t i) { return 1.0 / i; }},
                                  CandidateGridConfig{});
    for (const auto& p : tr.pairs) EXPECT_DOUBLE_EQ(p.tau, 1.0 / p.reference);
}

TEST(SelectWindow, RejectsBadCandidates) {
    const auto h = normals(100, 6);
    const std::vector<std::size_t> unsorted{50, 20}, too_big{20, 101}, empty{};
    EXPECT_THROW(select_window_over(h, unsorted, Mean{}, FixedThreshold{1}), ParameterError);
    EXPECT_THROW(select_window_over(h, too_big, Mean{}, FixedThreshold{1}), InsufficientHistory);
    EXPECT_THROW(select_window_over(h, empty, Mean{}, FixedThreshold{1}), ParameterError);
    EXPECT_THROW(select_window(std::span<const double>(h).first(10), Mean{}, FixedThreshold{1},
                               CandidateGridConfig{}),
                 InsufficientHistory);
}
