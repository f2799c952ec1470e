#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "riskflow/core/mark_set.hpp"
#include "riskflow/core/time_grid.hpp"
#include "riskflow/engine/rng.hpp"

namespace riskflow {

struct JumpEvent {
    double time = 0.0;
    std::uint32_t mark = 0;
};

/// Jumps of one path, sorted by time, all in (0, T].
struct JumpLedger {
    std::vector<JumpEvent> events;
};

JumpLedger sample_jumps(const MarkSet& marks, const TimeGrid& grid, const RngSpec& rng, std::size_t path);

/// Step index k with t_k < time ≤ t_{k+1}.
std::size_t step_of(const TimeGrid& grid, double time) noexcept;

}  // namespace riskflow
