#include "riskflow/core/time_grid.hpp"

#include <cmath>
#include <string>

#include "riskflow/core/errors.hpp"

namespace riskflow {

TimeGrid::TimeGrid(double horizon, std::size_t steps)
    : horizon_(horizon), steps_(steps), dt_(horizon / static_cast<double>(steps)) {
    if (!(std::isfinite(horizon) && horizon > 0.0)) {
        throw ConfigurationError("core_model", "time horizon must be positive and finite, got " + std::to_string(horizon));
    }
    if (steps == 0) {
        throw ConfigurationError("core_model", "number of time steps must be at least 1");
    }
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> out(nodes());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = time(k);
    return out;
}

TimeGrid build_grid(double horizon, std::size_t steps) { return TimeGrid(horizon, steps); }

}  // namespace riskflow
