#pragma once

// Deterministic thresholds for stability-based window selection (SAWS).

#include "baws/error.hpp"

#include <cmath>
#include <cstddef>
#include <string>

namespace baws {

enum class SawsFamily {
    ConvexSmooth,  ///< tau = C * i^-(1 - alpha_tau); strongly convex, smooth population loss
    Lipschitz,     ///< tau = C * i^-(1/2 - alpha_tau); Lipschitz population loss
};

struct SAWSConfig {
    double alpha_tau = 0.1;
    double c_tau = 0.3;
    SawsFamily family = SawsFamily::ConvexSmooth;

    void validate() const {
        if (!(alpha_tau > 0.0 && alpha_tau < 1.0)) throw ParameterError("alpha_tau must lie in (0,1)");
        if (!(c_tau > 0.0)) throw ParameterError("C_tau must be positive");
    }
};

inline double saws_threshold(std::size_t i, const SAWSConfig& cfg) {
    cfg.validate();
    if (i < 1) throw DomainError("SAWS threshold needs i >= 1");
    const double exponent =
        cfg.family == SawsFamily::ConvexSmooth ? 1.0 - cfg.alpha_tau : 0.5 - cfg.alpha_tau;
    return cfg.c_tau * std::pow(static_cast<double>(i), -exponent);
}

inline SawsFamily parse_saws_family(const std::string& name) {
    if (name == "convex" || name == "convex-smooth") return SawsFamily::ConvexSmooth;
    if (name == "lipschitz") return SawsFamily::Lipschitz;
    throw ParameterError("unknown SAWS family '" + name + "'");
}

}  // namespace baws
