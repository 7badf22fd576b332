#pragma once

// Replicated simulation experiments: seeded paths, every method on each path, metrics.

#include "baws/backtest.hpp"
#include "baws/error.hpp"
#include "baws/metrics.hpp"
#include "baws/parallel.hpp"
#include "baws/random.hpp"
#include "baws/scenarios.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace baws {

struct ExperimentSpec {
    Scenario scenario = Scenario::A1;
    std::size_t horizon = 2000;  ///< T
    std::size_t replications = 100;
    std::uint64_t seed = 1;
    std::vector<MethodSpec> methods;
    BacktestConfig base;  ///< target, t0, bootstrap, SAWS and grid settings shared by all methods
    /// Replaces the built-in scenario generator when set; receives the replication seed.
    std::function<ScenarioPath(std::uint64_t)> generator;
    std::string label;  ///< scenario column in the report; defaults to the scenario name
    std::size_t workers = 0;  ///< 0 = worker_count()
};

struct MethodResult {
    MethodSpec method;
    ExperimentTensor tensor;
    std::vector<std::vector<std::size_t>> windows;  ///< selected k_hat per replication and time
};

struct ExperimentResult {
    MetricsReport report;
    std::vector<MethodResult> methods;
};

/// Per-time truth parameter and loss distribution of a path, for the forecast times t0..T.
struct PathTruth {
    std::vector<ParamVector> parameters;
    std::vector<TruthDistribution> distributions;
};

inline TruthDistribution truth_distribution(const ScenarioPath& path, std::size_t index) {
    if (path.gaussian()) return GaussianTruth{path.true_mean[index], path.true_sigma[index]};
    return SkewedTLossTruth{path.true_sigma[index]};
}

inline PathTruth path_truth(const ScenarioPath& path, const ForecastTarget& target, std::size_t t0) {
    PathTruth out;
    for (std::size_t t = t0; t <= path.size(); ++t) {
        const std::size_t i = t - 1;
        out.distributions.push_back(truth_distribution(path, i));
        if (std::holds_alternative<Mean>(target)) {
            out.parameters.emplace_back(path.true_mean[i]);
            continue;
        }
        if (path.true_var.empty()) throw DomainError("scenario path lacks true VaR; generate it with alpha");
        const double v = path.true_var[i];
        if (std::holds_alternative<VaR>(target)) {
            out.parameters.emplace_back(v);
        } else {
            const double alpha = tail_level(target);
            const PartialMoments below = partial_moments(out.distributions.back(), v);
            out.parameters.emplace_back(v, (path.true_mean[i] - below.expectation_below) / (1.0 - alpha));
        }
    }
    return out;
}

inline ExperimentResult run_experiment_detailed(const ExperimentSpec& spec) {
    if (spec.replications < 1) throw ParameterError("experiment needs at least one replication");
    if (spec.methods.empty()) throw ParameterError("experiment needs at least one method");
    spec.base.validate();
    const ForecastTarget& target = spec.base.target;
    const std::optional<double> alpha =
        std::holds_alternative<Mean>(target) ? std::nullopt : std::optional<double>(tail_level(target));
    const std::size_t n = spec.replications;
    const std::size_t t0 = spec.base.first_forecast;

    std::vector<MethodResult> results(spec.methods.size());
    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
        results[m].method = spec.methods[m];
        results[m].tensor.estimates.resize(n);
        results[m].tensor.realized.resize(n);
        results[m].windows.resize(n);
    }
    std::vector<PathTruth> truths(n);

    parallel_for(n, spec.workers ? spec.workers : worker_count(), [&](std::size_t l) {
        const std::uint64_t path_seed = mix_key({spec.seed, l, 0});
        const ScenarioPath path = spec.generator ? spec.generator(path_seed)
                                                 : generate(spec.scenario, spec.horizon, path_seed, alpha);
        truths[l] = path_truth(path, target, t0);
        for (std::size_t m = 0; m < spec.methods.size(); ++m) {
            BacktestConfig cfg = spec.base;
            cfg.method = spec.methods[m];
            cfg.bootstrap.seed = mix_key({spec.seed, l, 1});
            const auto records = run_backtest(path.losses, cfg);
            auto& est = results[m].tensor.estimates[l];
            auto& real = results[m].tensor.realized[l];
            auto& win = results[m].windows[l];
            for (const auto& r : records) {
                est.push_back(r.theta);
                real.push_back(r.realized_loss);
                win.push_back(r.k_hat);
            }
        }
    });

    const std::string scenario = spec.label.empty() ? to_string(spec.scenario) : spec.label;
    for (std::size_t l = 1; l < n; ++l) {
        if (truths[l].parameters.size() != truths[0].parameters.size()) {
            throw DomainError("replications produced paths of different lengths");
        }
    }
    bool shared_truth = true;
    for (std::size_t l = 1; l < n && shared_truth; ++l) {
        for (std::size_t t = 0; t < truths[0].parameters.size(); ++t) {
            if (!(truths[l].parameters[t] == truths[0].parameters[t])) {
                shared_truth = false;
                break;
            }
        }
    }
    std::vector<std::vector<TruthDistribution>> distributions;
    for (auto& tr : truths) distributions.push_back(tr.distributions);

    const std::size_t dims = parameter_dimension(target);
    const std::vector<std::string> suffix =
        dims == 1 ? std::vector<std::string>{""} : std::vector<std::string>{"_v", "_e"};

    ExperimentResult out;
    for (auto& res : results) {
        res.tensor.truths = truths[0].parameters;
        if (!shared_truth) {
            for (const auto& tr : truths) res.tensor.replication_truths.push_back(tr.parameters);
        }
        const std::string method = res.method.label();
        const auto add = [&](const std::string& metric, double value) {
            out.report.push_back({method, scenario, metric, value});
        };
        for (std::size_t c = 0; c < dims; ++c) {
            add("MAB" + suffix[c], mab(res.tensor, c));
            if (n >= 2) add("Var" + suffix[c], mean_variance(res.tensor, c));
            add("MSE" + suffix[c], mse(res.tensor, c));
        }
        if (std::holds_alternative<Mean>(target)) {
            add("CR", cumulative_risk_mean(res.tensor));
        } else if (std::holds_alternative<VaR>(target)) {
            add("CR", cumulative_risk_var(res.tensor, distributions, tail_level(target)));
        }
        add("CL", cumulative_loss(res.tensor, target));
    }
    out.methods = std::move(results);
    return out;
}

inline MetricsReport run_experiment(const ExperimentSpec& spec) { return run_experiment_detailed(spec).report; }

}  // namespace baws
