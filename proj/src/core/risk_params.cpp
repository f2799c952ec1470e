#include "riskflow/core/risk_params.hpp"

#include <cmath>
#include <string>

#include "riskflow/core/errors.hpp"

namespace riskflow {

void validate_theta(double theta, const char* module) {
    if (!(std::isfinite(theta) && theta > 0.0)) {
        throw ConfigurationError(module, "theta must be positive and finite, got " + std::to_string(theta));
    }
}

RiskParams::RiskParams(double theta) : theta_(theta) { validate_theta(theta, "core_model"); }

}  // namespace riskflow
