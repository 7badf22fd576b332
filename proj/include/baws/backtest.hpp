#pragma once

// Online forecasting loop: at each t the forecast uses x_1..x_{t-1} only, then is scored
// against the realized x_t.

#include "baws/baselines.hpp"
#include "baws/bootstrap.hpp"
#include "baws/error.hpp"
#include "baws/saws_threshold.hpp"
#include "baws/scoring.hpp"
#include "baws/selection.hpp"
#include "baws/types.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace baws {

enum class Method { BAWS, SAWS, Fixed, Full };

struct MethodSpec {
    Method kind = Method::BAWS;
    std::size_t window = 250;  ///< Fixed only

    std::string label() const {
        switch (kind) {
            case Method::BAWS: return "BAWS";
            case Method::SAWS: return "SAWS";
            case Method::Fixed: return "Fixed" + std::to_string(window);
            case Method::Full: return "Full";
        }
        return "?";
    }

    /// Accepts "baws", "saws", "full", "fixed250" or "fixed:250" (case-insensitive).
    static MethodSpec parse(std::string name) {
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (name == "baws") return {Method::BAWS, 0};
        if (name == "saws") return {Method::SAWS, 0};
        if (name == "full") return {Method::Full, 0};
        if (name.rfind("fixed", 0) == 0) {
            std::string digits = name.substr(5);
            if (!digits.empty() && digits.front() == ':') digits.erase(0, 1);
            if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit)) {
                const auto k = static_cast<std::size_t>(std::stoull(digits));
                if (k >= 1) return {Method::Fixed, k};
            }
        }
        throw ParameterError("unknown method '" + name + "'");
    }
};

struct BacktestConfig {
    MethodSpec method;
    ForecastTarget target = Mean{};
    std::size_t first_forecast = 501;  ///< t0, 1-based
    BootstrapConfig bootstrap;
    SAWSConfig saws;
    CandidateGridConfig grid;  ///< also carries max_window, applied to every method
    std::optional<std::size_t> initial_prev_k;  ///< k_hat_{t0-1} when resuming a run

    void validate() const {
        baws::validate(target);
        grid.validate();
        if (method.kind == Method::BAWS) bootstrap.validate();
        if (method.kind == Method::SAWS) saws.validate();
        if (method.kind == Method::Fixed && method.window < 1) throw ParameterError("fixed window must be >= 1");
        if (first_forecast <= grid.min_window) {
            throw ParameterError("first forecast index t0 must exceed the minimum window k0");
        }
    }
};

struct ForecastRecord {
    std::size_t t = 0;
    std::string date;
    std::size_t k_hat = 0;
    ParamVector theta;
    double realized_loss = 0.0;
    double realized_score = 0.0;
};

/// Forecasts for t = t0..N from losses x_1..x_N (losses[t-1] = x_t).
inline std::vector<ForecastRecord> run_backtest(std::span<const double> losses, const BacktestConfig& cfg,
                                                std::span<const std::string> dates = {}) {
    cfg.validate();
    if (losses.size() < cfg.first_forecast) {
        throw InsufficientHistory("series has " + std::to_string(losses.size()) +
                                  " observations but the first forecast is at t0 = " +
                                  std::to_string(cfg.first_forecast));
    }
    if (!dates.empty() && dates.size() != losses.size()) throw DomainError("dates are not aligned with losses");
    for (double x : losses) require_finite(x, "loss");

    const std::size_t cap = cfg.grid.max_window.value_or(losses.size());
    std::vector<ForecastRecord> records;
    records.reserve(losses.size() - cfg.first_forecast + 1);
    std::optional<std::size_t> prev = cfg.initial_prev_k;
    BootstrapWorkspace workspace(losses);
    for (std::size_t t = cfg.first_forecast; t <= losses.size(); ++t) {
        const auto history = losses.first(t - 1);
        ForecastRecord rec;
        rec.t = t;
        switch (cfg.method.kind) {
            case Method::BAWS:
            case Method::SAWS: {
                const ThresholdPolicy policy =
                    cfg.method.kind == Method::BAWS ? ThresholdPolicy{cfg.bootstrap} : ThresholdPolicy{cfg.saws};
                const SelectionTrace trace = select_window(history, cfg.target, policy, cfg.grid, prev, &workspace);
                rec.k_hat = trace.k_hat;
                rec.theta = trace.theta_hat;
                prev = trace.k_hat;
                break;
            }
            case Method::Fixed:
            case Method::Full: {
                const std::size_t want = cfg.method.kind == Method::Fixed ? cfg.method.window : history.size();
                rec.k_hat = std::min({want, history.size(), cap});
                rec.theta = rolling_forecast(history, rec.k_hat, cfg.target).theta;
                break;
            }
        }
        rec.realized_loss = losses[t - 1];
        rec.realized_score = pointwise_score(cfg.target, rec.realized_loss, rec.theta);
        if (!dates.empty()) rec.date = dates[t - 1];
        records.push_back(std::move(rec));
    }
    return records;
}

inline std::vector<ForecastRecord> run_backtest(const LossSeries& series, const BacktestConfig& cfg) {
    return run_backtest(series.view(), cfg, series.dates);
}

}  // namespace baws
