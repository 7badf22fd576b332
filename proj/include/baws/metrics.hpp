#pragma once

// Evaluation metrics over replicated forecasting experiments.

#include "baws/error.hpp"
#include "baws/scenarios.hpp"
#include "baws/scoring.hpp"
#include "baws/types.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace baws {

/// estimates[l][t] and realized[l][t] for replication l and forecast step t (t0..T).
///
/// `truths` is shared by all replications. Scenarios whose parameter path is itself random
/// (random-walk mean, GARCH volatility) set `replication_truths[l][t]` instead, and every
/// metric then compares each replication with its own truth.
struct ExperimentTensor {
    std::vector<std::vector<ParamVector>> estimates;
    std::vector<ParamVector> truths;
    std::vector<std::vector<double>> realized;
    std::vector<std::vector<ParamVector>> replication_truths;

    std::size_t replications() const noexcept { return estimates.size(); }
    std::size_t horizon() const noexcept {
        return replication_truths.empty() ? truths.size() : replication_truths.front().size();
    }

    const ParamVector& truth(std::size_t l, std::size_t t) const {
        return replication_truths.empty() ? truths[t] : replication_truths[l][t];
    }

    void validate() const {
        if (estimates.empty()) throw DomainError("experiment tensor has no replications");
        if (horizon() == 0) throw DomainError("experiment tensor has an empty horizon");
        if (!replication_truths.empty()) {
            if (replication_truths.size() != estimates.size()) {
                throw DomainError("per-replication truth count mismatch");
            }
            for (const auto& row : replication_truths) {
                if (row.size() != horizon()) throw DomainError("per-replication truth length mismatch");
            }
        }
        for (const auto& row : estimates) {
            if (row.size() != horizon()) throw DomainError("estimate/truth dimension mismatch");
        }
        if (!realized.empty()) {
            if (realized.size() != estimates.size()) throw DomainError("realized replication count mismatch");
            for (const auto& row : realized) {
                if (row.size() != horizon()) throw DomainError("realized/truth dimension mismatch");
            }
        }
    }
};

namespace detail {

inline void check_component(const ExperimentTensor& x, std::size_t c) {
    for (std::size_t l = 0; l < x.replications(); ++l) {
        for (std::size_t t = 0; t < x.horizon(); ++t) {
            if (c >= x.truth(l, t).size() || c >= x.estimates[l][t].size()) {
                throw DomainError("parameter component out of range");
            }
        }
    }
}

inline double replication_mean(const ExperimentTensor& x, std::size_t t, std::size_t c) {
    double s = 0.0;
    for (const auto& row : x.estimates) s += row[t][c];
    return s / static_cast<double>(x.replications());
}

// Replication mean of the error theta_t^(l) - theta_t.
inline double mean_error(const ExperimentTensor& x, std::size_t t, std::size_t c) {
    double s = 0.0;
    for (std::size_t l = 0; l < x.replications(); ++l) s += x.estimates[l][t][c] - x.truth(l, t)[c];
    return s / static_cast<double>(x.replications());
}

}  // namespace detail

/// Mean absolute bias: time average of |replication mean - truth|.
inline double mab(const ExperimentTensor& x, std::size_t component = 0) {
    x.validate();
    detail::check_component(x, component);
    double total = 0.0;
    for (std::size_t t = 0; t < x.horizon(); ++t) {
        total += std::abs(detail::mean_error(x, t, component));
    }
    return total / static_cast<double>(x.horizon());
}

/// Time average of the across-replication sample variance (divisor n - 1).
inline double mean_variance(const ExperimentTensor& x, std::size_t component = 0) {
    x.validate();
    detail::check_component(x, component);
    const std::size_t n = x.replications();
    if (n < 2) throw DomainError("variance needs at least two replications");
    double total = 0.0;
    for (std::size_t t = 0; t < x.horizon(); ++t) {
        const double m = detail::replication_mean(x, t, component);
        double ss = 0.0;
        for (const auto& row : x.estimates) ss += (row[t][component] - m) * (row[t][component] - m);
        total += ss / static_cast<double>(n - 1);
    }
    return total / static_cast<double>(x.horizon());
}

inline double mse(const ExperimentTensor& x, std::size_t component = 0) {
    x.validate();
    detail::check_component(x, component);
    double total = 0.0;
    for (std::size_t t = 0; t < x.horizon(); ++t) {
        double s = 0.0;
        for (std::size_t l = 0; l < x.replications(); ++l) {
            const double d = x.estimates[l][t][component] - x.truth(l, t)[component];
            s += d * d;
        }
        total += s / static_cast<double>(x.replications());
    }
    return total / static_cast<double>(x.horizon());
}

/// (1/n) sum_l sum_t (theta_t^(l) - mu_t)^2.
inline double cumulative_risk_mean(const ExperimentTensor& x) {
    x.validate();
    double total = 0.0;
    for (std::size_t l = 0; l < x.replications(); ++l) {
        for (std::size_t t = 0; t < x.horizon(); ++t) {
            const double d = x.estimates[l][t][0] - x.truth(l, t)[0];
            total += d * d;
        }
    }
    return total / static_cast<double>(x.replications());
}

struct GaussianTruth {
    double mu;
    double sigma;
};

/// Loss L = -sigma * eps with eps standardized skewed-t.
struct SkewedTLossTruth {
    double sigma;
    double nu = 5.0;
    double skew = 0.95;
};

using TruthDistribution = std::variant<GaussianTruth, SkewedTLossTruth>;

/// Partial moments of the loss X at v: E[X 1{X < v}] and P(X < v).
struct PartialMoments {
    double expectation_below;
    double probability_below;
};

inline PartialMoments partial_moments(const TruthDistribution& truth, double v) {
    if (const auto* g = std::get_if<GaussianTruth>(&truth)) {
        if (!(g->sigma > 0.0)) throw DomainError("Gaussian truth needs sigma > 0");
        const double z = (v - g->mu) / g->sigma;
        const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
        const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
        return {g->mu * cdf - g->sigma * pdf, cdf};
    }
    // X < v  <=>  eps > a with a = -v / sigma, and E[X 1{X<v}] = -sigma E[eps 1{eps > a}].
    const auto& s = std::get<SkewedTLossTruth>(truth);
    if (!(s.sigma > 0.0)) throw DomainError("skewed-t truth needs sigma > 0");
    const SkewedT dist(s.nu, s.skew);
    const double a = -v / s.sigma;
    const double kink = -dist.raw_mean() / dist.raw_sd();  // eps where the two pieces meet
    const auto integrand = [&](double e) { return e * dist.pdf(e); };
    static thread_local boost::math::quadrature::exp_sinh<double> tail;
    double upper = 0.0;
    if (a < kink) {
        upper = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, a, kink, 15, 1e-12) +
                tail.integrate(integrand, kink, std::numeric_limits<double>::infinity(), 1e-12);
    } else {
        upper = tail.integrate(integrand, a, std::numeric_limits<double>::infinity(), 1e-12);
    }
    return {-s.sigma * upper, 1.0 - dist.cdf(a)};
}

/// Excess expected pinball score of forecast v over the true VaR.
inline double var_excess_risk(double v, double true_var, const TruthDistribution& truth, double alpha) {
    require_level(alpha, "alpha");
    const PartialMoments at_v = partial_moments(truth, v);
    const PartialMoments at_var = partial_moments(truth, true_var);
    return -alpha * v - at_v.expectation_below + at_var.expectation_below + v * at_v.probability_below;
}

/// (1/n) sum_l sum_t CR_t^(l) for VaR forecasts; `truth[t]` is the loss distribution at t.
inline double cumulative_risk_var(const ExperimentTensor& x, std::span<const TruthDistribution> truth,
                                  double alpha) {
    x.validate();
    require_level(alpha, "alpha");
    if (truth.size() != x.horizon()) throw DomainError("truth distribution missing for some forecast times");
    double total = 0.0;
    for (std::size_t t = 0; t < x.horizon(); ++t) {
        for (std::size_t l = 0; l < x.replications(); ++l) {
            total += var_excess_risk(x.estimates[l][t][0], x.truth(l, t)[0], truth[t], alpha);
        }
    }
    return total / static_cast<double>(x.replications());
}

/// As above with a distribution per replication and time, `truth[l][t]`.
inline double cumulative_risk_var(const ExperimentTensor& x,
                                  const std::vector<std::vector<TruthDistribution>>& truth, double alpha) {
    x.validate();
    require_level(alpha, "alpha");
    if (truth.size() != x.replications()) throw DomainError("truth distribution missing for some replications");
    double total = 0.0;
    for (std::size_t l = 0; l < x.replications(); ++l) {
        if (truth[l].size() != x.horizon()) throw DomainError("truth distribution missing for some forecast times");
        for (std::size_t t = 0; t < x.horizon(); ++t) {
            total += var_excess_risk(x.estimates[l][t][0], x.truth(l, t)[0], truth[l][t], alpha);
        }
    }
    return total / static_cast<double>(x.replications());
}

/// (1/n) sum_l sum_t score(x_t^(l), theta_t^(l)) on realized out-of-sample losses.
inline double cumulative_loss(const ExperimentTensor& x, const ForecastTarget& target) {
    x.validate();
    if (x.realized.empty()) throw DomainError("cumulative loss needs realized losses");
    double total = 0.0;
    for (std::size_t l = 0; l < x.replications(); ++l) {
        for (std::size_t t = 0; t < x.horizon(); ++t) {
            total += pointwise_score(target, x.realized[l][t], x.estimates[l][t]);
        }
    }
    return total / static_cast<double>(x.replications());
}

struct MetricsRow {
    std::string method;
    std::string scenario;
    std::string metric;
    double value;
};

using MetricsReport = std::vector<MetricsRow>;

/// First row matching (method, metric); NaN if absent.
inline double lookup(const MetricsReport& report, const std::string& method, const std::string& metric) {
    for (const auto& row : report) {
        if (row.method == method && row.metric == metric) return row.value;
    }
    return std::nan("");
}

}  // namespace baws
