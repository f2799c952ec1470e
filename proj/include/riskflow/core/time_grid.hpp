#pragma once

#include <cstddef>
#include <vector>

namespace riskflow {

/// Uniform partition of [0, T] into N steps.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps);

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t nodes() const noexcept { return steps_ + 1; }
    double dt() const noexcept { return dt_; }

    /// t_k = k·dt, with t_N pinned to T exactly.
    double time(std::size_t k) const noexcept { return k == steps_ ? horizon_ : static_cast<double>(k) * dt_; }

    std::vector<double> times() const;

private:
    double horizon_;
    std::size_t steps_;
    double dt_;
};

/// Throws ConfigurationError for T <= 0 (or non-finite) and N == 0.
TimeGrid build_grid(double horizon, std::size_t steps);

}  // namespace riskflow
