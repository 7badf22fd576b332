#include "baws/estimators.hpp"
#include "baws/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace baws;

namespace {

std::vector<double> iota_window(int n, std::uint64_t shuffle_seed) {
    std::vector<double> w(n);
    std::iota(w.begin(), w.end(), 1.0);
    Xoshiro256 rng(shuffle_seed);
    std::shuffle(w.begin(), w.end(), rng);
    return w;
}

// Minimum of a unimodal function on [lo, hi] by golden-section search.
template <class F>
double golden_min(F f, double lo, double hi) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return std::min(fc, fd);
}

// Mean joint score at (v, e) as a function of e, with the e-free sums hoisted out of the loop.
inline auto es_profile(const std::vector<double>& w, double v, double alpha) {
    double pin = 0.0, tail = 0.0;
    for (double x : w) {
        pin += ((x < v ? 1.0 : 0.0) - alpha) * (v - x);
        if (!(x < v)) tail += (v - x) / (1.0 - alpha);
    }
    const double n = static_cast<double>(w.size());
    return [=](double e) { return (pin + g2(e) * tail) / n + g2(e) * (e - v) - g2_antiderivative(e); };
}

// Minimum over e: a fine grid locates the basin, golden-section search polishes it. The score is
// nearly flat for e far above the tail mean, so a bare golden search on a wide bracket can drift.
// `coarse` evaluates the same function cheaply for the grid scan.
template <class G, class F>
double grid_then_golden(G coarse, F f, double lo, double hi) {
    const int n = 4000;
    const double h = (hi - lo) / n;
    int best = 0;
    double best_f = coarse(lo);
    for (int j = 1; j <= n; ++j) {
        const double fj = coarse(lo + h * j);
        if (fj < best_f) {
            best_f = fj;
            best = j;
        }
    }
    return std::min(f(lo + h * best), golden_min(f, lo + h * std::max(best - 1, 0), lo + h * std::min(best + 1, n)));
}

double brute_var_score(const std::vector<double>& w, double alpha) {
    double best = INFINITY;
    for (double v : w) best = std::min(best, empirical_score(w, ParamVector(v), VaR{alpha}));
    return best;
}

double brute_vares_score(const std::vector<double>& w, double alpha) {
    const auto [mn, mx] = std::minmax_element(w.begin(), w.end());
    const double span = *mx - *mn + 1.0;
    double best = INFINITY;
    for (double v : w) {
        const auto f = [&](double e) { return empirical_score(w, ParamVector(v, e), VaRES{alpha}); };
        best = std::min(best, grid_then_golden(es_profile(w, v, alpha), f, *mn - span, *mx + span / (1.0 - alpha)));
    }
    return best;
}

std::vector<double> random_window(Xoshiro256& rng) {
    const std::size_t k = 1 + uniform_index(rng, 100);
    std::normal_distribution<double> normal;
    std::vector<double> w(k);
    const bool discrete = uniform01(rng) < 0.3;
    for (double& x : w) x = discrete ? std::round(3.0 * normal(rng)) : normal(rng);
    return w;
}

}  // namespace

TEST(VarOrderIndex, CeilingWithIntegerLowerEnd) {
    EXPECT_EQ(var_order_index(20, 0.9), 18u);
    EXPECT_EQ(var_order_index(100, 0.95), 95u);
    EXPECT_EQ(var_order_index(10, 0.95), 10u);
    EXPECT_EQ(var_order_index(7, 0.5), 4u);
    EXPECT_EQ(var_order_index(1, 0.01), 1u);
}

TEST(FitMean, Examples) {
    EXPECT_DOUBLE_EQ(fit_mean(std::vector<double>{1, 2, 3}).theta[0], 2.0);
    EXPECT_DOUBLE_EQ(fit_mean(std::vector<double>{4.5}).theta[0], 4.5);
    EXPECT_DOUBLE_EQ(fit_mean(std::vector<double>{-1, 1}).theta[0], 0.0);
    EXPECT_THROW(fit_mean(std::vector<double>{}), DomainError);
}

TEST(FitMean, IsLocalMinimum) {
    const std::vector<double> w{0.3, -1.2, 2.4, 0.9, 1.7};
    const double mu = fit_mean(w).theta[0];
    const double s = empirical_score(w, ParamVector(mu), Mean{});
    EXPECT_GT(empirical_score(w, ParamVector(mu + 1e-3), Mean{}), s);
    EXPECT_GT(empirical_score(w, ParamVector(mu - 1e-3), Mean{}), s);
}

TEST(FitVar, Examples) {
    EXPECT_EQ(fit_var(iota_window(20, 3), 0.9).theta[0], 18.0);
    EXPECT_EQ(fit_var(iota_window(100, 4), 0.95).theta[0], 95.0);
    const auto c = fit_var(std::vector<double>(9, 2.5), 0.95);
    EXPECT_EQ(c.theta[0], 2.5);
    EXPECT_EQ(c.achieved_score, 0.0);
    EXPECT_THROW(fit_var(std::vector<double>{}, 0.9), DomainError);
}

TEST(TailEs, Examples) {
    EXPECT_NEAR(tail_es_given_v(iota_window(20, 5), 18, 0.9), 19.5, 1e-12);
    EXPECT_EQ(tail_es_given_v(std::vector<double>(4, 3.0), 3.0, 0.95), 3.0);
    EXPECT_NEAR(tail_es_given_v(std::vector<double>{0, 10}, 0, 0.5), 10.0, 1e-12);
}

TEST(FitVarEs, Examples) {
    const auto w = iota_window(20, 6);
    const auto r = fit_var_es(w, 0.9);
    EXPECT_EQ(r.theta[0], 18.0);
    EXPECT_NEAR(r.theta[1], 19.5, 1e-12);
    EXPECT_NEAR(r.achieved_score, brute_vares_score(w, 0.9), 1e-10);

    const auto c = fit_var_es(std::vector<double>(5, -0.5), 0.95);
    EXPECT_EQ(c.theta[0], -0.5);
    EXPECT_EQ(c.theta[1], -0.5);
}

TEST(FitVarEs, LargeNormalSampleNearAnalytic) {
    Xoshiro256 rng(11);
    std::normal_distribution<double> normal;
    std::vector<double> w(100000);
    for (double& x : w) x = normal(rng);
    const auto r = fit_var_es(w, 0.95);
    EXPECT_NEAR(r.theta[0], 1.6449, 0.05);
    EXPECT_NEAR(r.theta[1], 2.0627, 0.05);
}

TEST(FitResult, AchievedScoreMatchesEmpiricalScore) {
    Xoshiro256 rng(12);
    for (int rep = 0; rep < 200; ++rep) {
        const auto w = random_window(rng);
        for (const ForecastTarget target : {ForecastTarget{Mean{}}, ForecastTarget{VaR{0.9}},
                                            ForecastTarget{VaRES{0.95}}}) {
            const auto r = fit(w, target);
            EXPECT_EQ(r.window_length, w.size());
            EXPECT_NEAR(r.achieved_score, empirical_score(w, r.theta, target), 1e-12);
        }
    }
}

TEST(SortedWindow, ScoreAgreesWithDirectEvaluation) {
    Xoshiro256 rng(13);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 100; ++rep) {
        const auto w = random_window(rng);
        const SortedWindow sw(w);
        const ParamVector mean(normal(rng)), v(normal(rng)), ve(normal(rng), normal(rng));
        EXPECT_NEAR(sw.score(Mean{}, mean), empirical_score(w, mean, Mean{}), 1e-10);
        EXPECT_NEAR(sw.score(VaR{0.8}, v), empirical_score(w, v, VaR{0.8}), 1e-12);
        EXPECT_NEAR(sw.score(VaRES{0.9}, ve), empirical_score(w, ve, VaRES{0.9}), 1e-10);
    }
}

TEST(SortedWindow, ExtendedEqualsFreshSort) {
    const std::vector<double> recent{3, 1, 2}, older{5, -1, 2};
    std::vector<double> all(older);
    all.insert(all.end(), recent.begin(), recent.end());
    const auto merged = SortedWindow(recent).extended(older);
    const SortedWindow fresh(all);
    ASSERT_EQ(merged.size(), fresh.size());
    EXPECT_TRUE(std::equal(merged.values().begin(), merged.values().end(), fresh.values().begin()));
    EXPECT_DOUBLE_EQ(merged.mean(), fresh.mean());
}

TEST(Estimators, NoSamplePointBeatsTheFit) {
    Xoshiro256 rng(14);
    for (int rep = 0; rep < 300; ++rep) {
        auto w = random_window(rng);
        for (double alpha : {0.1, 0.5, 0.9, 0.95}) {
            const auto var = fit_var(w, alpha);
            for (double v : w) {
                EXPECT_LE(var.achieved_score, empirical_score(w, ParamVector(v), VaR{alpha}) + 1e-12);
            }
            const auto joint = fit_var_es(w, alpha);
            for (double v : w) {
                const ParamVector p(v, tail_es_given_v(w, v, alpha));
                EXPECT_LE(joint.achieved_score, empirical_score(w, p, VaRES{alpha}) + 1e-12);
            }
        }
    }
}

TEST(Estimators, MatchBruteForceOracle) {
    Xoshiro256 rng(15);
    for (int rep = 0; rep < 150; ++rep) {
        const auto w = random_window(rng);
        const double alpha = 0.05 + 0.9 * uniform01(rng);
        EXPECT_LT(std::abs(fit_var(w, alpha).achieved_score - brute_var_score(w, alpha)), 1e-10);
        EXPECT_LT(std::abs(fit_var_es(w, alpha).achieved_score - brute_vares_score(w, alpha)), 1e-10);
    }
}

TEST(Estimators, JointVarCoincidesWithQuantileOrTies) {
    Xoshiro256 rng(16);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto w = random_window(rng);
        const double alpha = 0.05 + 0.9 * uniform01(rng);
        const auto var = fit_var(w, alpha);
        const auto joint = fit_var_es(w, alpha);
        if (var.theta[0] != joint.theta[0]) {
            const ParamVector at_var(var.theta[0], tail_es_given_v(w, var.theta[0], alpha));
            EXPECT_NEAR(empirical_score(w, at_var, VaRES{alpha}), joint.achieved_score, 1e-12);
        }
    }
}

TEST(Estimators, LocationEquivariance) {
    Xoshiro256 rng(17);
    const double c = 0.75;
    for (int rep = 0; rep < 50; ++rep) {
        auto w = random_window(rng);
        auto shifted = w;
        for (double& x : shifted) x += c;
        EXPECT_NEAR(fit_mean(shifted).theta[0], fit_mean(w).theta[0] + c, 1e-12);
        EXPECT_EQ(fit_var(shifted, 0.9).theta[0], fit_var(w, 0.9).theta[0] + c);
        const auto a = fit_var_es(w, 0.9), b = fit_var_es(shifted, 0.9);
        EXPECT_EQ(b.theta[0], a.theta[0] + c);
        EXPECT_NEAR(b.theta[1], a.theta[1] + c, 1e-9);
    }
}

TEST(Estimators, SinglePointWindow) {
    const std::vector<double> w{-2.0};
    EXPECT_EQ(fit_var(w, 0.95).theta[0], -2.0);
    const auto r = fit_var_es(w, 0.95);
    EXPECT_EQ(r.theta[0], -2.0);
    EXPECT_EQ(r.theta[1], -2.0);
}
