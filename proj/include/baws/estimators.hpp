#pragma once

// Exact empirical minimizers of f_{t,k} for each forecast target.

#include "baws/error.hpp"
#include "baws/scoring.hpp"
#include "baws/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace baws {

struct FitResult {
    ParamVector theta;
    double achieved_score = 0.0;  ///< f_{t,k} evaluated at theta
    std::size_t window_length = 0;
};

/// 1-based order-statistic index of the empirical VaR: ceil(alpha k), or alpha k itself
/// when that product is an integer (lower end of the minimizer interval).
inline std::size_t var_order_index(std::size_t k, double alpha) {
    const double ak = alpha * static_cast<double>(k);
    const double nearest = std::round(ak);
    double j = std::abs(ak - nearest) <= 1e-9 * std::max(1.0, ak) ? nearest : std::ceil(ak);
    j = std::clamp(j, 1.0, static_cast<double>(k));
    return static_cast<std::size_t>(j);
}

/// A window held in sorted order with prefix sums, so that f_{t,k}(theta) can be
/// evaluated in O(log k) for any theta and the minimizer read off directly.
class SortedWindow {
public:
    SortedWindow() = default;

    explicit SortedWindow(std::span<const double> window)
        : sorted_(window.begin(), window.end()) {
        std::sort(sorted_.begin(), sorted_.end());
        finish();
    }

    /// Adopt an already ascending vector.
    static SortedWindow from_sorted(std::vector<double> ascending) {
        SortedWindow w;
        w.sorted_ = std::move(ascending);
        w.finish();
        return w;
    }

    /// Window obtained by adding `older` observations to this one, via a linear merge.
    SortedWindow extended(std::span<const double> older) const {
        std::vector<double> extra(older.begin(), older.end());
        std::sort(extra.begin(), extra.end());
        std::vector<double> merged(sorted_.size() + extra.size());
        std::merge(sorted_.begin(), sorted_.end(), extra.begin(), extra.end(), merged.begin());
        return from_sorted(std::move(merged));
    }

    std::size_t size() const noexcept { return sorted_.size(); }
    std::span<const double> values() const noexcept { return sorted_; }
    double mean() const noexcept { return mean_; }

    /// Number of observations strictly below v.
    std::size_t count_below(double v) const noexcept {
        return static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), v) -
                                        sorted_.begin());
    }

    double score(const ForecastTarget& target, const ParamVector& theta) const {
        require_dimension(target, theta);
        if (const auto* var = std::get_if<VaR>(&target)) return pinball(theta[0], var->alpha);
        if (const auto* joint = std::get_if<VaRES>(&target)) {
            return joint_score(theta[0], theta[1], joint->alpha);
        }
        const double d = theta[0] - mean_;
        return centered_ss_ / n() + d * d;
    }

    FitResult fit(const ForecastTarget& target) const {
        if (sorted_.empty()) throw DomainError("cannot fit an empty window");
        FitResult r;
        r.window_length = sorted_.size();
        if (const auto* var = std::get_if<VaR>(&target)) {
            r.theta = ParamVector(sorted_[var_order_index(size(), var->alpha) - 1]);
        } else if (const auto* joint = std::get_if<VaRES>(&target)) {
            r.theta = profile_var_es(joint->alpha);
        } else {
            r.theta = ParamVector(mean_);
        }
        r.achieved_score = score(target, r.theta);
        return r;
    }

    /// e(v): the stationary point in e of the empirical joint score for fixed v.
    double tail_es(double v, double alpha) const {
        return v + upper_excess(v) / ((1.0 - alpha) * n());
    }

private:
    double n() const noexcept { return static_cast<double>(sorted_.size()); }
    double total() const noexcept { return prefix_.back(); }

    void finish() {
        prefix_.assign(sorted_.size() + 1, 0.0);
        for (std::size_t i = 0; i < sorted_.size(); ++i) prefix_[i + 1] = prefix_[i] + sorted_[i];
        mean_ = 0.0;
        if (!sorted_.empty()) {
            // shifted by the minimum, which keeps a constant window's mean exact
            double dev = 0.0;
            for (double x : sorted_) dev += x - sorted_.front();
            mean_ = sorted_.front() + dev / n();
        }
        excess_.assign(sorted_.size() + 1, 0.0);
        for (std::size_t c = sorted_.size(); c-- > 1;) {
            excess_[c - 1] = excess_[c] + static_cast<double>(sorted_.size() - c) * (sorted_[c] - sorted_[c - 1]);
        }
        centered_ss_ = 0.0;
        for (double x : sorted_) centered_ss_ += (x - mean_) * (x - mean_);
    }

    // sum over x >= v of (x - v), built from gaps between order statistics so ties cancel exactly
    double upper_excess(double v) const noexcept {
        const std::size_t c = count_below(v);
        if (c == sorted_.size()) return 0.0;
        return excess_[c] + static_cast<double>(sorted_.size() - c) * (sorted_[c] - v);
    }

    double pinball(double v, double alpha) const {
        const std::size_t c = count_below(v);
        const double below = static_cast<double>(c) * v - prefix_[c];
        return (below - alpha * (n() * v - total())) / n();
    }

    double joint_score(double v, double e, double alpha) const {
        const std::size_t c = count_below(v);
        const double below = static_cast<double>(c) * v - prefix_[c];
        const double pin = (below - alpha * (n() * v - total())) / n();
        const double at_or_above = -upper_excess(v);
        const double ge = g2(e);
        return pin + ge * at_or_above / ((1.0 - alpha) * n()) + ge * (e - v) - g2_antiderivative(e);
    }

    // Profile over v in the sample points; e is closed form. Near-ties (relative 1e-12)
    // keep the earlier, i.e. smaller, v.
    ParamVector profile_var_es(double alpha) const {
        ParamVector best;
        double best_score = 0.0;
        bool have = false;
        for (std::size_t c = 0; c < sorted_.size(); ++c) {
            if (c > 0 && sorted_[c] == sorted_[c - 1]) continue;
            const double v = sorted_[c];
            const double e = tail_es(v, alpha);
            const double s = joint_score(v, e, alpha);
            if (!have || s < best_score - 1e-12 * std::max(1.0, std::abs(best_score))) {
                best = ParamVector(v, e);
                best_score = s;
                have = true;
            }
        }
        return best;
    }

    std::vector<double> sorted_;
    std::vector<double> prefix_;
    std::vector<double> excess_;  ///< excess_[c] = sum_{j >= c} (x_(j) - x_(c))
    double mean_ = 0.0;
    double centered_ss_ = 0.0;
};

inline FitResult fit_mean(std::span<const double> window) {
    if (window.empty()) throw DomainError("cannot fit the mean of an empty window");
    // same arithmetic as SortedWindow, so a selected window and a fixed one agree to the bit
    const double mu = SortedWindow(window).mean();
    const ParamVector theta(mu);
    return {theta, empirical_score(window, theta, Mean{}), window.size()};
}

inline FitResult fit_var(std::span<const double> window, double alpha) {
    require_level(alpha, "alpha");
    if (window.empty()) throw DomainError("cannot fit VaR on an empty window");
    std::vector<double> buf(window.begin(), window.end());
    const std::size_t j = var_order_index(buf.size(), alpha);
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(j - 1), buf.end());
    const ParamVector theta(buf[j - 1]);
    return {theta, empirical_score(window, theta, VaR{alpha}), window.size()};
}

inline double tail_es_given_v(std::span<const double> window, double v, double alpha) {
    require_level(alpha, "alpha");
    if (window.empty()) throw DomainError("tail ES of an empty window");
    double upper = 0.0;
    for (double x : window) {
        if (x >= v) upper += x - v;
    }
    return v + upper / ((1.0 - alpha) * static_cast<double>(window.size()));
}

inline FitResult fit_var_es(std::span<const double> window, double alpha) {
    require_level(alpha, "alpha");
    if (window.empty()) throw DomainError("cannot fit (VaR, ES) on an empty window");
    FitResult r = SortedWindow(window).fit(VaRES{alpha});
    r.achieved_score = empirical_score(window, r.theta, VaRES{alpha});
    return r;
}

inline FitResult fit(std::span<const double> window, const ForecastTarget& target) {
    validate(target);
    if (const auto* var = std::get_if<VaR>(&target)) return fit_var(window, var->alpha);
    if (const auto* joint = std::get_if<VaRES>(&target)) return fit_var_es(window, joint->alpha);
    return fit_mean(window);
}

}  // namespace baws
