#include "riskflow/engine/simulate.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "riskflow/core/errors.hpp"
#include "riskflow/engine/jumps.hpp"
#include "riskflow/engine/parallel.hpp"

namespace riskflow {

namespace {

struct Context {
    const CoefficientModel& model;
    const ControlPolicy& policy;
    const BackwardField& field;
    const TimeGrid& grid;
    const MarkSet& marks;
    const RngSpec& rng;
};

[[noreturn]] void fail(std::size_t p, std::size_t k, const char* what, double value) {
    throw SimulationError("jump_sde_engine", std::string("non-finite ") + what + " (" + std::to_string(value) +
                                                 ") on path " + std::to_string(p) + " at node " + std::to_string(k));
}

inline double checked(double v, std::size_t p, std::size_t k, const char* what) {
    if (!std::isfinite(v)) fail(p, k, what, v);
    return v;
}

/// Per-path kernel. Calls node(k, args, xi) for every node and step(k, dW, counts) for every step;
/// returns the clamp count.
template <class NodeSink, class StepSink>
std::size_t run_path(const Context& c, std::size_t p, const JumpLedger& ledger, NodeSink&& node, StepSink&& step,
                     std::size_t start = 0, double x_start = 0.0, double xi_start = 0.0) {
    const std::size_t n_steps = c.grid.steps();
    const std::size_t m = c.marks.size();
    const double dt = c.grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    auto gen = path_stream(c.rng, p, StreamKind::brownian);

    std::vector<double> r(m, 0.0);
    std::vector<std::uint32_t> counts(m, 0);
    std::vector<double> gammas(m, 0.0);
    std::size_t next_jump = 0;
    std::size_t clamps = 0;

    double x = x_start;
    double xi = xi_start;
    const double t_start = c.grid.time(start);
    while (next_jump < ledger.events.size() && ledger.events[next_jump].time <= t_start) ++next_jump;
    for (std::size_t k = start;; ++k) {
        const double t = c.grid.time(k);
        double y = 0.0, z = 0.0;
        c.field.evaluate(k, x, xi, y, z, r);
        const ControlValue cv = c.policy.evaluate(k, t, x, y, r);
        clamps += cv.clamped ? 1 : 0;
        const CoefficientArgs args{t, x, y, z, r, cv.value};
        node(k, args, xi);
        if (k == n_steps) break;

        const double b = checked(c.model.drift ? c.model.drift(args) : 0.0, p, k, "b");
        const double s = checked(c.model.diffusion ? c.model.diffusion(args) : 0.0, p, k, "sigma");
        const double f = checked(c.model.running ? c.model.running(args) : 0.0, p, k, "f");
        const double dw = sqrt_dt * gen.normal();

        double jump_sum = 0.0;
        if (m > 0) {
            double compensator = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                gammas[i] = checked(c.model.jump ? c.model.jump(args, i, c.marks.mark(i)) : 0.0, p, k, "gamma");
                compensator += c.marks.weight(i) * gammas[i];
                counts[i] = 0;
            }
            while (next_jump < ledger.events.size() && step_of(c.grid, ledger.events[next_jump].time) == k) {
                const auto i = ledger.events[next_jump].mark;
                ++counts[i];
                jump_sum += gammas[i];
                ++next_jump;
            }
            jump_sum -= dt * compensator;
        }
        step(k, dw, counts);
        x = checked(x + b * dt + s * dw + jump_sum, p, k + 1, "x");
        xi = checked(xi + f * dt, p, k + 1, "xi");
    }
    return clamps;
}

std::size_t reduce(const std::vector<std::size_t>& v) {
    std::size_t s = 0;
    for (auto c : v) s += c;
    return s;
}

}  // namespace

PathBundle simulate_forward(const CoefficientModel& model, const ControlPolicy& policy, const BackwardField& field,
                            const TimeGrid& grid, const MarkSet& marks, const RngSpec& rng, std::size_t n_paths) {
    if (n_paths == 0) throw UsageError("jump_sde_engine", "n_paths must be positive");
    PathBundle out(n_paths, grid, marks, rng);
    const Context ctx{model, policy, field, grid, marks, rng};
    std::vector<std::size_t> clamps(n_paths, 0);
    const std::size_t m = marks.size();
    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            out.ledgers()[p] = sample_jumps(marks, grid, rng, p);
            clamps[p] = run_path(
                ctx, p, out.ledgers()[p],
                [&](std::size_t k, const CoefficientArgs& a, double xi) {
                    out.x(p, k) = a.x;
                    out.xi(p, k) = xi;
                    out.y(p, k) = a.y;
                    out.z(p, k) = a.z;
                    out.u(p, k) = a.v;
                    auto rr = out.r(p, k);
                    for (std::size_t i = 0; i < m; ++i) rr[i] = a.r[i];
                },
                [&](std::size_t k, double dw, const std::vector<std::uint32_t>& counts) {
                    out.dW(p, k) = dw;
                    for (std::size_t i = 0; i < m; ++i) out.dN(p, k, i) = counts[i];
                },
                0, model.initial_state, 0.0);
        }
    });
    out.set_has_xi(true);
    out.set_clamp_count(reduce(clamps));
    return out;
}

PathSummary simulate_summary(const CoefficientModel& model, const ControlPolicy& policy, const BackwardField& field,
                             const TimeGrid& grid, const MarkSet& marks, const RngSpec& rng, std::size_t n_paths,
                             const AuxIntegrand& aux) {
    return simulate_summary_from(model, policy, field, grid, marks, rng, n_paths, 0, model.initial_state, 0.0, aux);
}

PathSummary simulate_summary_from(const CoefficientModel& model, const ControlPolicy& policy,
                                  const BackwardField& field, const TimeGrid& grid, const MarkSet& marks,
                                  const RngSpec& rng, std::size_t n_paths, std::size_t start_node, double x_start,
                                  double xi_start, const AuxIntegrand& aux) {
    if (n_paths == 0) throw UsageError("jump_sde_engine", "n_paths must be positive");
    if (start_node > grid.steps()) throw UsageError("jump_sde_engine", "start node beyond the grid");
    PathSummary out;
    out.x_terminal.assign(n_paths, 0.0);
    out.xi_terminal.assign(n_paths, 0.0);
    out.aux.assign(n_paths, 0.0);
    const Context ctx{model, policy, field, grid, marks, rng};
    std::vector<std::size_t> clamps(n_paths, 0);
    const std::size_t n_steps = grid.steps();
    const double dt = grid.dt();
    parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double acc = 0.0;
            clamps[p] = run_path(
                ctx, p, sample_jumps(marks, grid, rng, p),
                [&](std::size_t k, const CoefficientArgs& a, double xi) {
                    if (k == n_steps) {
                        out.x_terminal[p] = a.x;
                        out.xi_terminal[p] = xi;
                        return;
                    }
                    if (aux) acc += aux(a) * dt;
                },
                [](std::size_t, double, const std::vector<std::uint32_t>&) {}, start_node, x_start, xi_start);
            out.aux[p] = acc;
        }
    });
    out.clamp_count = reduce(clamps);
    return out;
}

}  // namespace riskflow
