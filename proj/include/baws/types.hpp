#pragma once

#include "baws/error.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace baws {

inline void require_level(double level, const char* name) {
    if (!(level > 0.0 && level < 1.0)) {
        throw ParameterError(std::string(name) + " must lie strictly inside (0,1), got " +
                             std::to_string(level));
    }
}

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

/// Forecast the mean under squared loss.
struct Mean {};

/// Forecast the alpha-quantile of the loss under the pinball score.
struct VaR {
    double alpha;
};

/// Forecast (VaR, ES) at level alpha under the joint Fissler-Ziegel type score.
struct VaRES {
    double alpha;
};

using ForecastTarget = std::variant<Mean, VaR, VaRES>;

inline std::size_t parameter_dimension(const ForecastTarget& target) {
    return std::holds_alternative<VaRES>(target) ? 2 : 1;
}

/// Tail level of a VaR/VaRES target; NaN for the mean.
inline double tail_level(const ForecastTarget& target) {
    if (const auto* v = std::get_if<VaR>(&target)) return v->alpha;
    if (const auto* v = std::get_if<VaRES>(&target)) return v->alpha;
    return std::nan("");
}

inline void validate(const ForecastTarget& target) {
    if (!std::holds_alternative<Mean>(target)) require_level(tail_level(target), "alpha");
}

inline std::string to_string(const ForecastTarget& target) {
    if (std::holds_alternative<Mean>(target)) return "mean";
    if (std::holds_alternative<VaR>(target)) return "var";
    return "vares";
}

/// Parameter of a forecast: (mu), (v) or (v, e). Fixed capacity, value semantics.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(double a) : values_{a, 0.0}, size_(1) {}
    ParamVector(double a, double b) : values_{a, b}, size_(2) {}

    std::size_t size() const noexcept { return size_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const double* begin() const noexcept { return values_.data(); }
    const double* end() const noexcept { return values_.data() + size_; }

    bool all_finite() const {
        for (double v : *this) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    friend bool operator==(const ParamVector& a, const ParamVector& b) {
        if (a.size_ != b.size_) return false;
        for (std::size_t i = 0; i < a.size_; ++i) {
            if (a.values_[i] != b.values_[i]) return false;
        }
        return true;
    }

private:
    std::array<double, 2> values_{};
    std::size_t size_ = 0;
};

/// Observed losses x_1, ..., x_N in time order; `dates` is empty or aligned with `values`.
struct LossSeries {
    std::vector<double> values;
    std::vector<std::string> dates;

    std::size_t size() const noexcept { return values.size(); }
    bool has_dates() const noexcept { return !dates.empty(); }
    std::span<const double> view() const noexcept { return values; }
};

}  // namespace baws
