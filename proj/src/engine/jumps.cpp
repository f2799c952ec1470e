#include "riskflow/engine/jumps.hpp"

#include <algorithm>
#include <cmath>

namespace riskflow {

JumpLedger sample_jumps(const MarkSet& marks, const TimeGrid& grid, const RngSpec& rng, std::size_t path) {
    JumpLedger ledger;
    const double rate = marks.total_intensity();
    if (marks.empty() || rate <= 0.0) return ledger;
    auto gen = path_stream(rng, path, StreamKind::jumps);
    const double horizon = grid.horizon();
    double t = gen.exponential(rate);
    while (t <= horizon) {
        const double pick = gen.uniform() * rate;
        double acc = 0.0;
        std::uint32_t mark = static_cast<std::uint32_t>(marks.size() - 1);
        for (std::size_t i = 0; i < marks.size(); ++i) {
            acc += marks.weight(i);
            if (pick < acc) {
                mark = static_cast<std::uint32_t>(i);
                break;
            }
        }
        ledger.events.push_back({t, mark});
        t += gen.exponential(rate);
    }
    return ledger;
}

std::size_t step_of(const TimeGrid& grid, double time) noexcept {
    const double pos = std::ceil(time / grid.dt()) - 1.0;
    if (pos <= 0.0) return 0;
    return std::min(grid.steps() - 1, static_cast<std::size_t>(pos));
}

}  // namespace riskflow
