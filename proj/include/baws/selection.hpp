#pragma once

// Bootstrap-based adaptive window selection: candidate grid, pairwise stability tests,
// largest admissible window.

#include "baws/bootstrap.hpp"
#include "baws/error.hpp"
#include "baws/estimators.hpp"
#include "baws/random.hpp"
#include "baws/saws_threshold.hpp"
#include "baws/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

namespace baws {

/// Grid step `step` applies to window lengths below `upper` (and at or above the
/// previous band's upper bound).
struct GridBand {
    std::size_t upper;
    std::size_t step;
};

inline std::vector<GridBand> default_grid_bands() {
    return {{50, 5}, {100, 10}, {300, 20}, {1000, 50}, {std::numeric_limits<std::size_t>::max(), 100}};
}

struct CandidateGridConfig {
    std::size_t min_window = 20;  ///< k0
    std::optional<std::size_t> max_window;
    std::vector<GridBand> bands = default_grid_bands();
    std::size_t exploration_step = 50;  ///< spacing above the previous selection

    void validate() const {
        if (min_window < 2) throw ParameterError("minimum window k0 must be >= 2");
        if (max_window && *max_window < min_window) {
            throw ParameterError("max window must be >= minimum window");
        }
        if (exploration_step < 1) throw ParameterError("exploration step must be positive");
        std::size_t prev = 0;
        for (const auto& band : bands) {
            if (band.step < 1) throw ParameterError("grid increments must be positive");
            if (band.upper <= prev) throw ParameterError("grid breakpoints must be strictly increasing");
            prev = band.upper;
        }
    }
};

/// Grid points (multiples of the band step) inside [lo, hi].
inline std::vector<std::size_t> grid_points(std::size_t lo, std::size_t hi,
                                            const CandidateGridConfig& cfg) {
    std::vector<std::size_t> out;
    std::size_t band_lo = 0;
    for (const auto& band : cfg.bands) {
        const std::size_t from = std::max(lo, band_lo);
        const std::size_t to = std::min(hi, band.upper - 1);
        if (from <= to) {
            for (std::size_t k = (from + band.step - 1) / band.step * band.step; k <= to; k += band.step) {
                out.push_back(k);
            }
        }
        band_lo = band.upper;
        if (band_lo > hi) break;
    }
    return out;
}

/// K_t: ascending, duplicate-free, always containing k0 and min(history, max_window).
inline std::vector<std::size_t> candidate_windows(std::size_t history_length,
                                                  std::optional<std::size_t> prev_k,
                                                  const CandidateGridConfig& cfg) {
    cfg.validate();
    if (history_length < cfg.min_window) {
        throw InsufficientHistory("insufficient history: " + std::to_string(history_length) +
                                  " observations, need at least " + std::to_string(cfg.min_window));
    }
    const std::size_t top = std::min(history_length, cfg.max_window.value_or(history_length));
    std::vector<std::size_t> out{cfg.min_window, top};
    if (!prev_k) {
        const auto grid = grid_points(cfg.min_window, top, cfg);
        out.insert(out.end(), grid.begin(), grid.end());
    } else {
        const std::size_t prev = std::clamp(*prev_k, cfg.min_window, top);
        const auto grid = grid_points(cfg.min_window, prev, cfg);
        out.insert(out.end(), grid.begin(), grid.end());
        out.push_back(prev);
        for (std::size_t k = prev + 1; k <= top; k += cfg.exploration_step) out.push_back(k);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// T_{i,k}: reject (1) iff gap > tau.
inline bool pairwise_test(double gap, double tau) noexcept { return gap > tau; }

/// beta_Bon = 1 - (1 - beta) / s.
inline double bonferroni_level(double beta, std::size_t comparisons) {
    require_level(beta, "beta");
    if (comparisons == 0) throw ParameterError("Bonferroni correction needs s >= 1");
    return 1.0 - (1.0 - beta) / static_cast<double>(comparisons);
}

/// Two independent Gaussian blocks: the older k - k0 points ~ N(mu1, var1), the most
/// recent k0 points ~ N(mu2, var2).
struct GaussianTwoRegime {
    double mu1;
    double mu2;
    double var1;
    double var2;
    std::size_t k;
    std::size_t k0;
};

/// P((Xbar_k - Xbar_k0)^2 > tau) under the two-regime Gaussian model.
inline double rejection_probability_gaussian(const GaussianTwoRegime& m, double tau) {
    if (!(tau > 0.0)) throw ParameterError("threshold tau must be positive");
    if (!(m.k > m.k0 && m.k0 >= 1)) throw ParameterError("need k > k0 >= 1");
    if (!(m.var1 > 0.0 && m.var2 > 0.0)) throw ParameterError("variances must be positive");
    const double k = static_cast<double>(m.k);
    const double k0 = static_cast<double>(m.k0);
    const double w = (k - k0) / k;
    const double mean = w * (m.mu1 - m.mu2);
    const double sd = std::sqrt(w * w * (m.var1 / (k - k0) + m.var2 / k0));
    const double root = std::sqrt(tau);
    const auto upper_tail = [](double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); };
    return upper_tail((root - mean) / sd) + upper_tail((root + mean) / sd);
}

/// Monte Carlo rate of the mean-target test T_{k0,k} firing: k0 recent draws from N(mu2, var2),
/// k - k0 older draws from N(mu1, var1), rejection when f_{k0}(theta_k) - f_{k0}(theta_k0) > tau.
inline double simulate_rejection_rate(const GaussianTwoRegime& m, double tau, std::size_t trials,
                                      std::uint64_t seed) {
    rejection_probability_gaussian(m, tau);  // validates
    if (trials == 0) throw ParameterError("need at least one trial");
    Xoshiro256 rng(seed);
    std::normal_distribution<double> older(m.mu1, std::sqrt(m.var1)), recent(m.mu2, std::sqrt(m.var2));
    std::vector<double> window(m.k);
    std::size_t hits = 0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        for (std::size_t j = 0; j < m.k - m.k0; ++j) window[j] = older(rng);
        for (std::size_t j = m.k - m.k0; j < m.k; ++j) window[j] = recent(rng);
        const std::span<const double> w(window);
        const std::span<const double> ref = w.last(m.k0);
        const double theta_k = fit_mean(w).theta[0];
        const double theta_ref = fit_mean(ref).theta[0];
        const double gap = empirical_score(ref, ParamVector(theta_k), Mean{}) -
                           empirical_score(ref, ParamVector(theta_ref), Mean{});
        if (gap > tau) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

struct FixedThreshold {
    double value;
};

/// User-supplied tau(i), e.g. the exact published SAWS form.
struct CustomThreshold {
    std::function<double(std::size_t)> fn;
};

using ThresholdPolicy = std::variant<BootstrapConfig, SAWSConfig, FixedThreshold, CustomThreshold>;

struct PairRecord {
    std::size_t reference;  ///< i
    std::size_t candidate;  ///< k
    double gap;             ///< f_{t,i}(theta_{t,k}) - f_{t,i}(theta_{t,i})
    double tau;
    bool reject;            ///< T_{i,k}
};

struct SelectionTrace {
    std::size_t t = 0;
    std::vector<std::size_t> candidates;
    /// tau(t, i) per candidate at the base level; NaN for the largest, which is never a reference.
    std::vector<double> thresholds;
    std::vector<PairRecord> pairs;  ///< ordered by candidate, then reference
    std::vector<bool> rejected;     ///< T_k per candidate
    std::size_t k_hat = 0;
    ParamVector theta_hat;
};

/// Checks the bookkeeping invariants of a trace.
inline bool trace_is_consistent(const SelectionTrace& trace) {
    const std::size_t n = trace.candidates.size();
    if (n == 0 || trace.rejected.size() != n || trace.thresholds.size() != n) return false;
    if (!std::is_sorted(trace.candidates.begin(), trace.candidates.end())) return false;
    if (std::adjacent_find(trace.candidates.begin(), trace.candidates.end()) != trace.candidates.end()) {
        return false;
    }
    std::vector<bool> derived(n, false);
    std::size_t expected_pairs = 0;
    for (const auto& p : trace.pairs) {
        if (!(p.gap >= 0.0) || p.reference >= p.candidate) return false;
        if (p.reject != (p.gap > p.tau)) return false;
        const auto it = std::lower_bound(trace.candidates.begin(), trace.candidates.end(), p.candidate);
        if (it == trace.candidates.end() || *it != p.candidate) return false;
        if (p.reject) derived[static_cast<std::size_t>(it - trace.candidates.begin())] = true;
    }
    for (std::size_t b = 0; b < n; ++b) expected_pairs += b;
    if (trace.pairs.size() != expected_pairs) return false;
    std::size_t best = 0;
    bool found = false;
    for (std::size_t b = 0; b < n; ++b) {
        if (derived[b] != trace.rejected[b]) return false;
        if (!derived[b]) {
            best = trace.candidates[b];
            found = true;
        }
    }
    return found && best == trace.k_hat;
}

/// Selection over an explicit candidate set. `history` holds x_1..x_{t-1}; window k is
/// its last k entries. `workspace` optionally carries bootstrap caches between calls.
inline SelectionTrace select_window_over(std::span<const double> history,
                                         std::span<const std::size_t> candidates,
                                         const ForecastTarget& target, const ThresholdPolicy& policy,
                                         BootstrapWorkspace* workspace = nullptr) {
    validate(target);
    if (candidates.empty()) throw ParameterError("candidate set is empty");
    for (std::size_t b = 0; b < candidates.size(); ++b) {
        if (candidates[b] < 1 || (b > 0 && candidates[b] <= candidates[b - 1])) {
            throw ParameterError("candidates must be positive and strictly increasing");
        }
    }
    if (candidates.back() > history.size()) {
        throw InsufficientHistory("candidate window exceeds the available history");
    }
    const std::size_t n = candidates.size();
    const std::size_t t = history.size() + 1;
    const auto window = [&](std::size_t k) { return history.subspan(history.size() - k); };

    std::vector<SortedWindow> sorted;
    sorted.reserve(n);
    std::vector<ParamVector> theta(n);
    for (std::size_t b = 0; b < n; ++b) {
        if (b == 0) {
            sorted.emplace_back(window(candidates[0]));
        } else {
            const auto extra = history.subspan(history.size() - candidates[b], candidates[b] - candidates[b - 1]);
            sorted.push_back(sorted.back().extended(extra));
        }
        theta[b] = sorted[b].fit(target).theta;
    }

    SelectionTrace trace;
    trace.t = t;
    trace.candidates.assign(candidates.begin(), candidates.end());
    trace.thresholds.assign(n, std::nan(""));
    std::vector<ThresholdValue> samples;
    const auto* boot = std::get_if<BootstrapConfig>(&policy);
    for (std::size_t a = 0; a + 1 < n; ++a) {
        const std::size_t i = candidates[a];
        if (boot) {
            samples.push_back(bootstrap_threshold(window(i), sorted[a], theta[a], target, *boot, t, workspace));
            trace.thresholds[a] = samples.back().tau;
        } else if (const auto* saws = std::get_if<SAWSConfig>(&policy)) {
            trace.thresholds[a] = saws_threshold(i, *saws);
        } else if (const auto* fixed = std::get_if<FixedThreshold>(&policy)) {
            trace.thresholds[a] = fixed->value;
        } else {
            trace.thresholds[a] = std::get<CustomThreshold>(policy).fn(i);
        }
    }
    const bool fwer = boot && boot->control == ErrorControl::FWER;

    trace.rejected.assign(n, false);
    trace.pairs.reserve(n * (n - 1) / 2);
    for (std::size_t b = 1; b < n; ++b) {
        for (std::size_t a = 0; a < b; ++a) {
            const double gap =
                std::max(0.0, sorted[a].score(target, theta[b]) - sorted[a].score(target, theta[a]));
            const double tau = fwer ? samples[a].quantile(bonferroni_level(boot->beta, b))
                                    : trace.thresholds[a];
            const bool reject = pairwise_test(gap, tau);
            trace.pairs.push_back({candidates[a], candidates[b], gap, tau, reject});
            if (reject) trace.rejected[b] = true;
        }
    }
    for (std::size_t b = n; b-- > 0;) {
        if (!trace.rejected[b]) {
            trace.k_hat = candidates[b];
            trace.theta_hat = theta[b];
            break;
        }
    }
    return trace;
}

/// One step of the online procedure at t = history.size() + 1.
inline SelectionTrace select_window(std::span<const double> history, const ForecastTarget& target,
                                    const ThresholdPolicy& policy, const CandidateGridConfig& grid,
                                    std::optional<std::size_t> prev_k = std::nullopt,
                                    BootstrapWorkspace* workspace = nullptr) {
    const auto candidates = candidate_windows(history.size(), prev_k, grid);
    return select_window_over(history, candidates, target, policy, workspace);
}

}  // namespace baws
