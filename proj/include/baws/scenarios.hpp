#pragma once

// Synthetic loss paths with their ground-truth parameter sequences.

#include "baws/error.hpp"
#include "baws/random.hpp"
#include "baws/types.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace baws {

enum class Scenario { A1, A2, A3, B1, B2, B3, Garch };

inline Scenario parse_scenario(const std::string& name) {
    if (name == "A1") return Scenario::A1;
    if (name == "A2") return Scenario::A2;
    if (name == "A3") return Scenario::A3;
    if (name == "B1") return Scenario::B1;
    if (name == "B2") return Scenario::B2;
    if (name == "B3") return Scenario::B3;
    if (name == "GARCH" || name == "garch") return Scenario::Garch;
    throw ParameterError("unknown scenario '" + name + "'");
}

inline std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::A1: return "A1";
        case Scenario::A2: return "A2";
        case Scenario::A3: return "A3";
        case Scenario::B1: return "B1";
        case Scenario::B2: return "B2";
        case Scenario::B3: return "B3";
        case Scenario::Garch: return "GARCH";
    }
    return "?";
}

/// Losses x_1..x_T (index t-1) with aligned truths. `true_var` is empty unless alpha is set.
struct ScenarioPath {
    Scenario scenario = Scenario::A1;
    std::uint64_t seed = 0;
    std::optional<double> alpha;
    std::vector<double> losses;
    std::vector<double> true_mean;
    std::vector<double> true_sigma;
    std::vector<double> true_var;

    std::size_t size() const noexcept { return losses.size(); }
    bool gaussian() const noexcept { return scenario != Scenario::Garch; }
};

inline double standard_normal_quantile(double p) {
    require_level(p, "probability");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// Fernandez-Steel skewed Student-t, standardized to zero mean and unit variance.
///
/// The unstandardized variable is z = r|T| with probability r^2 / (1 + r^2) and
/// z = -|T| / r otherwise, T ~ t(nu); epsilon = (z - m) / s.
class SkewedT {
public:
    SkewedT(double nu, double r) : nu_(nu), r_(r), t_(nu > 2.0 ? nu : 3.0) {
        if (!(nu > 2.0)) throw ParameterError("skewed-t needs nu > 2 for a finite variance");
        if (!(r > 0.0)) throw ParameterError("skewed-t skewness r must be positive");
        const double abs_mean = 2.0 * std::sqrt(nu) *
                                std::exp(std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0)) /
                                (std::sqrt(std::numbers::pi) * (nu - 1.0));
        mean_ = abs_mean * (r - 1.0 / r);
        const double second = nu / (nu - 2.0) * (r * r - 1.0 + 1.0 / (r * r));
        sd_ = std::sqrt(second - mean_ * mean_);
    }

    double nu() const noexcept { return nu_; }
    double r() const noexcept { return r_; }
    double raw_mean() const noexcept { return mean_; }
    double raw_sd() const noexcept { return sd_; }

    template <class Rng>
    double sample(Rng& rng) const {
        std::student_t_distribution<double> student(nu_);
        const double magnitude = std::abs(student(rng));
        const double p_positive = r_ * r_ / (1.0 + r_ * r_);
        const double z = uniform01(rng) < p_positive ? r_ * magnitude : -magnitude / r_;
        return (z - mean_) / sd_;
    }

    double pdf(double eps) const { return sd_ * raw_pdf(mean_ + sd_ * eps); }
    double cdf(double eps) const { return raw_cdf(mean_ + sd_ * eps); }

    double quantile(double p) const {
        require_level(p, "probability");
        return (raw_quantile(p) - mean_) / sd_;
    }

    double raw_pdf(double z) const {
        const double norm = 2.0 / (r_ + 1.0 / r_);
        return norm * boost::math::pdf(t_, z >= 0.0 ? z / r_ : z * r_);
    }

    double raw_cdf(double z) const {
        const double w = 1.0 + r_ * r_;
        if (z < 0.0) return 2.0 * boost::math::cdf(t_, r_ * z) / w;
        return 1.0 / w + (r_ * r_ / w) * (2.0 * boost::math::cdf(t_, z / r_) - 1.0);
    }

    double raw_quantile(double p) const {
        const double w = 1.0 + r_ * r_;
        if (p < 1.0 / w) return boost::math::quantile(t_, p * w / 2.0) / r_;
        return r_ * boost::math::quantile(t_, (w * p - 1.0) / (2.0 * r_ * r_) + 0.5);
    }

private:
    double nu_;
    double r_;
    boost::math::students_t_distribution<double> t_;
    double mean_ = 0.0;
    double sd_ = 1.0;
};

template <class Rng>
double skewed_t_sample(double nu, double r, Rng& rng) {
    return SkewedT(nu, r).sample(rng);
}

inline double skewed_t_quantile(double p, double nu, double r) { return SkewedT(nu, r).quantile(p); }

namespace detail {

inline ScenarioPath gaussian_path(Scenario tag, std::size_t horizon, std::uint64_t seed,
                                  std::optional<double> alpha, std::vector<double> mean,
                                  std::vector<double> sigma, Xoshiro256& rng) {
    ScenarioPath path;
    path.scenario = tag;
    path.seed = seed;
    path.alpha = alpha;
    path.losses.resize(horizon);
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < horizon; ++i) path.losses[i] = mean[i] + sigma[i] * normal(rng);
    if (alpha) {
        const double z = standard_normal_quantile(*alpha);
        path.true_var.resize(horizon);
        for (std::size_t i = 0; i < horizon; ++i) path.true_var[i] = mean[i] + sigma[i] * z;
    }
    path.true_mean = std::move(mean);
    path.true_sigma = std::move(sigma);
    return path;
}

inline void check_horizon(std::size_t horizon) {
    if (horizon < 1) throw ParameterError("scenario horizon T must be >= 1");
}

}  // namespace detail

/// Settings A1-A3: independent normals with piecewise-constant mean and variance.
inline ScenarioPath gen_setting_a(Scenario variant, std::size_t horizon, std::uint64_t seed,
                                  std::optional<double> alpha = std::nullopt) {
    detail::check_horizon(horizon);
    if (alpha) require_level(*alpha, "alpha");
    std::vector<double> mean(horizon), sigma(horizon);
    for (std::size_t t = 1; t <= horizon; ++t) {
        double mu = 0.0;
        double var = 0.25;
        switch (variant) {
            case Scenario::A1:
                mu = 2 * t <= horizon ? 1.0 : 2.0;
                break;
            case Scenario::A2:
            case Scenario::A3:
                mu = t <= 800 ? 1.0 : (t <= 1400 ? 0.0 : 2.0);
                if (variant == Scenario::A3) var = t <= 800 ? 0.25 : (t <= 1400 ? 1.0 : 0.49);
                break;
            default:
                throw ParameterError("setting A variant must be A1, A2 or A3");
        }
        mean[t - 1] = mu;
        sigma[t - 1] = std::sqrt(var);
    }
    auto rng = derive_stream({seed, static_cast<std::uint64_t>(variant)});
    return detail::gaussian_path(variant, horizon, seed, alpha, std::move(mean), std::move(sigma), rng);
}

/// Settings B1-B3: continuously drifting mean, sigma^2 = 0.25.
inline ScenarioPath gen_setting_b(Scenario variant, std::size_t horizon, std::uint64_t seed,
                                  std::optional<double> alpha = std::nullopt) {
    detail::check_horizon(horizon);
    if (alpha) require_level(*alpha, "alpha");
    if (variant != Scenario::B1 && variant != Scenario::B2 && variant != Scenario::B3) {
        throw ParameterError("setting B variant must be B1, B2 or B3");
    }
    auto rng = derive_stream({seed, static_cast<std::uint64_t>(variant)});
    const double T = static_cast<double>(horizon);
    std::normal_distribution<double> step(0.0, std::sqrt(1.0 / T));
    std::vector<double> mean(horizon), sigma(horizon, 0.5);
    double walk = 0.0;  // B2 mean, B3 Brownian motion; both start at 0
    for (std::size_t t = 1; t <= horizon; ++t) {
        const double tt = static_cast<double>(t);
        if (variant == Scenario::B1) {
            mean[t - 1] = std::sin(2.0 * std::numbers::pi * tt / T);
            continue;
        }
        walk += step(rng);
        if (variant == Scenario::B2) {
            mean[t - 1] = walk;
        } else {
            constexpr double mu0 = 1.0, drift = 0.5, vol2 = 0.25;
            mean[t - 1] = mu0 * std::exp((drift - vol2 / 2.0) * tt / T + std::sqrt(vol2) * walk);
        }
    }
    return detail::gaussian_path(variant, horizon, seed, alpha, std::move(mean), std::move(sigma), rng);
}

struct GarchOptions {
    double omega = 0.00001;
    double arch = 0.04;
    double persistence_before = 0.7;
    double persistence_after = 0.95;  ///< 0.7 + 0.25 once t > break_after
    std::size_t break_after = 1000;
    double nu = 5.0;
    double skew = 0.95;
    std::size_t burn_in = 200;  ///< pre-sample steps run with the pre-break persistence, discarded
};

/// Pre-break unconditional variance, where the recursion starts.
inline double garch_initial_variance(const GarchOptions& opt = {}) {
    return opt.omega / (1.0 - opt.arch - opt.persistence_before);
}

/// L_t = -sigma_t eps_t, sigma_t^2 = omega + a L_{t-1}^2 + gamma_t sigma_{t-1}^2.
inline ScenarioPath gen_garch(std::size_t horizon, std::uint64_t seed,
                              std::optional<double> alpha = std::nullopt, const GarchOptions& opt = {}) {
    detail::check_horizon(horizon);
    if (alpha) require_level(*alpha, "alpha");
    const SkewedT innovations(opt.nu, opt.skew);
    auto rng = derive_stream({seed, static_cast<std::uint64_t>(Scenario::Garch)});

    double var = garch_initial_variance(opt);
    for (std::size_t s = 0; s < opt.burn_in; ++s) {
        const double loss = -std::sqrt(var) * innovations.sample(rng);
        var = opt.omega + opt.arch * loss * loss + opt.persistence_before * var;
    }

    ScenarioPath path;
    path.scenario = Scenario::Garch;
    path.seed = seed;
    path.alpha = alpha;
    path.losses.resize(horizon);
    path.true_mean.assign(horizon, 0.0);
    path.true_sigma.resize(horizon);
    for (std::size_t t = 1; t <= horizon; ++t) {
        const double sigma = std::sqrt(var);
        const double loss = -sigma * innovations.sample(rng);
        path.losses[t - 1] = loss;
        path.true_sigma[t - 1] = sigma;
        const double gamma = t + 1 > opt.break_after ? opt.persistence_after : opt.persistence_before;
        var = opt.omega + opt.arch * loss * loss + gamma * var;
    }
    if (alpha) {
        const double q = -innovations.quantile(1.0 - *alpha);
        path.true_var.resize(horizon);
        for (std::size_t i = 0; i < horizon; ++i) path.true_var[i] = path.true_sigma[i] * q;
    }
    return path;
}

inline ScenarioPath generate(Scenario scenario, std::size_t horizon, std::uint64_t seed,
                             std::optional<double> alpha = std::nullopt) {
    switch (scenario) {
        case Scenario::A1:
        case Scenario::A2:
        case Scenario::A3: return gen_setting_a(scenario, horizon, seed, alpha);
        case Scenario::B1:
        case Scenario::B2:
        case Scenario::B3: return gen_setting_b(scenario, horizon, seed, alpha);
        case Scenario::Garch: return gen_garch(horizon, seed, alpha);
    }
    throw ParameterError("unknown scenario");
}

}  // namespace baws
