#include "riskflow/fbsde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "riskflow/engine/simulate.hpp"

namespace riskflow {

namespace {

/// (1 − ω)·previous + ω·current, applied to every component.
class DampedField final : public BackwardField {
public:
    DampedField(std::shared_ptr<const BackwardField> previous, std::shared_ptr<const BackwardField> current,
                double weight)
        : previous_(std::move(previous)), current_(std::move(current)), weight_(weight) {}

    void evaluate(std::size_t k, double x, double xi, double& y, double& z, std::span<double> r) const override {
        std::vector<double> r_prev(r.size());
        double y_prev = 0.0, z_prev = 0.0;
        previous_->evaluate(k, x, xi, y_prev, z_prev, r_prev);
        current_->evaluate(k, x, xi, y, z, r);
        y = (1.0 - weight_) * y_prev + weight_ * y;
        z = (1.0 - weight_) * z_prev + weight_ * z;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = (1.0 - weight_) * r_prev[i] + weight_ * r[i];
    }

private:
    std::shared_ptr<const BackwardField> previous_;
    std::shared_ptr<const BackwardField> current_;
    double weight_;
};

struct Deltas {
    double x = 0.0, y = 0.0, z = 0.0;
};

Deltas sup_mean_square(const PathBundle& a, const PathBundle& b) {
    Deltas d;
    const std::size_t n = a.n_paths();
    std::vector<double> sx(n), sy(n), sz(n);
    for (std::size_t k = 0; k < a.nodes(); ++k) {
        for (std::size_t p = 0; p < n; ++p) {
            sx[p] = (a.x(p, k) - b.x(p, k)) * (a.x(p, k) - b.x(p, k));
            sy[p] = (a.y(p, k) - b.y(p, k)) * (a.y(p, k) - b.y(p, k));
            sz[p] = (a.z(p, k) - b.z(p, k)) * (a.z(p, k) - b.z(p, k));
        }
        d.x = std::max(d.x, pairwise_sum(sx) / static_cast<double>(n));
        d.y = std::max(d.y, pairwise_sum(sy) / static_cast<double>(n));
        d.z = std::max(d.z, pairwise_sum(sz) / static_cast<double>(n));
    }
    return d;
}

}  // namespace

CoupledSolution picard_couple(const CoefficientModel& model, const ControlPolicy& policy, const TimeGrid& grid,
                              const MarkSet& marks, const RngSpec& rng, std::size_t n_paths,
                              const PicardOptions& options) {
    if (options.max_iter < 1) throw UsageError("fbsde_solver", "max_iter must be at least 1");
    if (!(options.damping > 0.0 && options.damping <= 1.0)) {
        throw UsageError("fbsde_solver", "damping must lie in (0, 1]");
    }
    CouplingReport report;
    report.tol = options.tol;

    std::shared_ptr<const BackwardField> field = std::make_shared<ZeroField>();
    std::optional<PathBundle> previous;
    std::size_t growth = 0;

    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        PathBundle paths = simulate_forward(model, policy, *field, grid, marks, rng, n_paths);
        BackwardSolution backward = solve_backward(model, paths, model.terminal_value, options.basis);
        report.iterations = it;

        bool done = false;
        if (previous) {
            const Deltas d = sup_mean_square(paths, *previous);
            const double total = std::max({d.x, d.y, d.z});
            if (!report.delta.empty() && total > report.delta.back()) {
                ++growth;
            } else {
                growth = 0;
            }
            report.delta_x.push_back(d.x);
            report.delta_y.push_back(d.y);
            report.delta_z.push_back(d.z);
            report.delta.push_back(total);
            done = total <= options.tol;
            if (growth >= 3) {
                std::ostringstream msg;
                msg << "Picard iteration diverges: delta grew for 3 consecutive iterations (last " << total << ")";
                throw CouplingError(msg.str(), report);
            }
        }

        auto next = std::make_shared<RegressionField>(backward.fit);
        if (options.damping < 1.0 && it > 1) {
            field = std::make_shared<DampedField>(field, next, options.damping);
        } else {
            field = next;
        }
        if (done || it == options.max_iter) {
            report.converged = done;
            return CoupledSolution{std::move(paths), std::move(report), std::move(backward)};
        }
        previous.emplace(std::move(paths));
    }
    throw SolverError("fbsde_solver", "unreachable");
}

}  // namespace riskflow
