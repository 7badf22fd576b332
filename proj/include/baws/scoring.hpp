#pragma once

// Pointwise scoring functions and their empirical averages.

#include "baws/error.hpp"
#include "baws/types.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <variant>

namespace baws {

inline double squared_loss(double x, double mu) {
    require_finite(x, "observation");
    require_finite(mu, "mean parameter");
    const double d = x - mu;
    return d * d;
}

/// (1{x < v} - alpha)(v - x), the check function with G(x) = x.
inline double pinball_score(double x, double v, double alpha) {
    require_level(alpha, "alpha");
    return ((x < v ? 1.0 : 0.0) - alpha) * (v - x);
}

/// G2(z) = -exp(-z) / (1 + exp(-z)), evaluated without overflow.
inline double g2(double z) noexcept {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return -e / (1.0 + e);
    }
    return -1.0 / (1.0 + std::exp(z));
}

/// Antiderivative of g2 vanishing at +infinity: log(1 + exp(-z)).
inline double g2_antiderivative(double z) noexcept {
    const double y = -z;
    return std::max(y, 0.0) + std::log1p(std::exp(-std::abs(y)));
}

inline double joint_vares_score(double x, double v, double e, double alpha) {
    require_level(alpha, "alpha");
    require_finite(x, "observation");
    require_finite(v, "VaR parameter");
    require_finite(e, "ES parameter");
    const double ge = g2(e);
    const double exceed = x < v ? 1.0 : 0.0;
    return (exceed - alpha) * (v - x) + ge * (1.0 - exceed) * (v - x) / (1.0 - alpha) +
           ge * (e - v) - g2_antiderivative(e);
}

inline void require_dimension(const ForecastTarget& target, const ParamVector& theta) {
    if (theta.size() != parameter_dimension(target)) {
        throw DomainError("parameter dimension does not match forecast target " +
                             to_string(target));
    }
}

/// Score of a single observation under the target's scoring function.
inline double pointwise_score(const ForecastTarget& target, double x, const ParamVector& theta) {
    require_dimension(target, theta);
    return std::visit(
        [&](const auto& t) -> double {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, Mean>) {
                return squared_loss(x, theta[0]);
            } else if constexpr (std::is_same_v<T, VaR>) {
                return pinball_score(x, theta[0], t.alpha);
            } else {
                return joint_vares_score(x, theta[0], theta[1], t.alpha);
            }
        },
        target);
}

/// f_{t,k}(theta): arithmetic mean of pointwise scores over the window.
inline double empirical_score(std::span<const double> window, const ParamVector& theta,
                              const ForecastTarget& target) {
    if (window.empty()) throw DomainError("empirical score of an empty window");
    require_dimension(target, theta);
    double sum = 0.0;
    for (double x : window) sum += pointwise_score(target, x, theta);
    return sum / static_cast<double>(window.size());
}

}  // namespace baws
