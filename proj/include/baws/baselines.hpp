#pragma once

// Reference forecasters: fixed rolling window, full window, and SAWS.

#include "baws/error.hpp"
#include "baws/estimators.hpp"
#include "baws/saws_threshold.hpp"
#include "baws/selection.hpp"

#include <algorithm>
#include <optional>
#include <span>

namespace baws {

/// Fit on the last min(k, history length) observations.
inline FitResult rolling_forecast(std::span<const double> history, std::size_t k,
                                  const ForecastTarget& target) {
    if (history.empty()) throw InsufficientHistory("rolling forecast needs a non-empty history");
    if (k < 1) throw ParameterError("rolling window must be >= 1");
    const std::size_t used = std::min(k, history.size());
    return fit(history.subspan(history.size() - used), target);
}

inline FitResult full_window_forecast(std::span<const double> history, const ForecastTarget& target) {
    if (history.empty()) throw InsufficientHistory("full-window forecast needs a non-empty history");
    return fit(history, target);
}

/// The BAWS selection machinery driven by deterministic SAWS thresholds.
inline SelectionTrace saws_select(std::span<const double> history, const ForecastTarget& target,
                                  const SAWSConfig& cfg, const CandidateGridConfig& grid,
                                  std::optional<std::size_t> prev_k = std::nullopt) {
    cfg.validate();
    return select_window(history, target, ThresholdPolicy{cfg}, grid, prev_k);
}

}  // namespace baws
