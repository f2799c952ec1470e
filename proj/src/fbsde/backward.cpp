#include "riskflow/fbsde/solver.hpp"

#include <algorithm>
#include <string>

#include "riskflow/engine/parallel.hpp"

namespace riskflow {

namespace {

constexpr const char* kModule = "fbsde_solver";

double driver_at(const CoefficientModel& model, const PathBundle& paths, std::size_t p, std::size_t k,
                 double y_next) {
    if (!model.driver) return 0.0;
    const CoefficientArgs a{paths.grid().time(k), paths.x(p, k), y_next, paths.z(p, k), paths.r(p, k),
                            paths.u(p, k)};
    return model.driver(a);
}

std::vector<std::size_t> fold_indices(std::size_t n, int fold) {
    std::vector<std::size_t> out;
    out.reserve(n / 2 + 1);
    for (std::size_t p = static_cast<std::size_t>(fold); p < n; p += 2) out.push_back(p);
    return out;
}

std::vector<double> gather(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
    std::vector<double> out(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) out[j] = v[idx[j]];
    return out;
}

std::vector<std::span<const double>> spans_of(const std::vector<std::vector<double>>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

void apply_field(const BackwardField& field, PathBundle& paths) {
    const std::size_t m = paths.n_marks();
    parallel_for(paths.n_paths(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> r(m);
        for (std::size_t p = begin; p < end; ++p) {
            for (std::size_t k = 0; k < paths.nodes(); ++k) {
                double y = 0.0, z = 0.0;
                field.evaluate(k, paths.x(p, k), paths.xi(p, k), y, z, r);
                paths.y(p, k) = y;
                paths.z(p, k) = z;
                auto rr = paths.r(p, k);
                for (std::size_t i = 0; i < m; ++i) rr[i] = r[i];
            }
        }
    });
    paths.set_has_backward(true);
}

void RegressionField::evaluate(std::size_t k, double x, double xi, double& y, double& z, std::span<double> r) const {
    y = fit_->y_fits[k].predict(0, x, xi);
    const NodeFit& zr = fit_->zr_fits[k];
    z = zr.predict(0, x, xi);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = zr.predict(i + 1, x, xi);
}

BackwardSolution solve_backward(const CoefficientModel& model, PathBundle& paths, double terminal,
                                const RegressionBasis& basis) {
    if (!paths.has_xi()) throw UsageError(kModule, "backward solve needs forward paths with the auxiliary process");
    const std::size_t n = paths.n_paths();
    const std::size_t n_steps = paths.steps();
    const std::size_t m = paths.n_marks();
    const double dt = paths.grid().dt();

    auto fit = std::make_shared<BackwardFit>();
    fit->y_fits.resize(n_steps + 1);
    fit->zr_fits.resize(n_steps + 1);
    fit->y_fits[n_steps] = NodeFit::constant({terminal});
    fit->zr_fits[n_steps] = NodeFit::constant(std::vector<double>(m + 1, 0.0));

    BackwardReport report;
    report.condition_numbers.assign(n_steps, 1.0);
    for (std::size_t p = 0; p < n; ++p) {
        paths.y(p, n_steps) = terminal;
        paths.z(p, n_steps) = 0.0;
        for (double& v : paths.r(p, n_steps)) v = 0.0;
    }

    std::vector<double> x(n), xi(n), y_next(n), target_y(n);
    std::vector<std::vector<double>> target_zr(m + 1, std::vector<double>(n));
    for (std::size_t kk = n_steps; kk-- > 0;) {
        const std::size_t k = kk;
        for (std::size_t p = 0; p < n; ++p) {
            x[p] = paths.x(p, k);
            xi[p] = paths.xi(p, k);
            y_next[p] = paths.y(p, k + 1);
        }
        const auto [lo, hi] = std::minmax_element(y_next.begin(), y_next.end());
        const bool flat = *lo == *hi;
        const double y_mean = pairwise_sum(y_next) / static_cast<double>(n);
        for (std::size_t p = 0; p < n; ++p) {
            const double centered = flat ? 0.0 : y_next[p] - y_mean;
            target_zr[0][p] = centered * paths.dW(p, k) / dt;
            for (std::size_t i = 0; i < m; ++i) {
                target_zr[i + 1][p] = centered * paths.dN_tilde(p, k, i) / (paths.marks().weight(i) * dt);
            }
        }
        NodeFit zr = NodeFit::fit(x, xi, spans_of(target_zr), basis, kModule);
        zr.clear_fitted();
        // Two-fold cross-fit: each path receives (z, r) from the fold it did not train.
        for (int fold = 0; fold < 2; ++fold) {
            const auto train = fold_indices(n, fold);
            const auto other = fold_indices(n, 1 - fold);
            const auto xs = gather(x, train);
            const auto xis = gather(xi, train);
            std::vector<std::vector<double>> ts;
            for (const auto& col : target_zr) ts.push_back(gather(col, train));
            const NodeFit part = NodeFit::fit(xs, xis, spans_of(ts), basis, kModule);
            for (std::size_t p : other) {
                paths.z(p, k) = part.predict(0, x[p], xi[p]);
                auto rr = paths.r(p, k);
                for (std::size_t i = 0; i < m; ++i) rr[i] = part.predict(i + 1, x[p], xi[p]);
            }
        }

        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                double v = y_next[p] + driver_at(model, paths, p, k, y_next[p]) * dt - paths.z(p, k) * paths.dW(p, k);
                const auto rr = paths.r(p, k);
                for (std::size_t i = 0; i < m; ++i) v -= rr[i] * paths.dN_tilde(p, k, i);
                target_y[p] = v;
            }
        });
        for (std::size_t p = 0; p < n; ++p) {
            if (!std::isfinite(target_y[p])) {
                throw SolverError(kModule, "non-finite backward target on path " + std::to_string(p) + " at node " +
                                               std::to_string(k));
            }
        }
        NodeFit yf = NodeFit::fit(x, xi, {std::span<const double>(target_y)}, basis, kModule);
        for (std::size_t p = 0; p < n; ++p) paths.y(p, k) = yf.fitted(0)[p];
        yf.clear_fitted();

        report.condition_numbers[k] = std::max(zr.condition(), yf.condition());
        report.basis_dimension = std::max({report.basis_dimension, zr.dimension(), yf.dimension()});
        fit->zr_fits[k] = std::move(zr);
        fit->y_fits[k] = std::move(yf);
    }
    paths.set_has_backward(true);

    report.max_condition = *std::max_element(report.condition_numbers.begin(), report.condition_numbers.end());
    const std::vector<double> y0 = paths.y_at(0);
    report.y0 = pairwise_sum(y0) / static_cast<double>(n);

    std::vector<double> pathwise(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double s = terminal;
            for (std::size_t k = 0; k < n_steps; ++k) s += driver_at(model, paths, p, k, paths.y(p, k + 1)) * dt;
            pathwise[p] = s;
        }
    });
    report.y0_pathwise = mc_estimate(pathwise);
    return {std::move(fit), std::move(report)};
}

std::vector<Estimate> martingale_residuals(const CoefficientModel& model, const PathBundle& paths) {
    if (!paths.has_backward()) throw UsageError(kModule, "martingale residuals need a solved backward component");
    const std::size_t n = paths.n_paths();
    const std::size_t m = paths.n_marks();
    const double dt = paths.grid().dt();
    std::vector<Estimate> out(paths.steps());
    std::vector<double> e(n);
    for (std::size_t k = 0; k < paths.steps(); ++k) {
        for (std::size_t p = 0; p < n; ++p) {
            double v = paths.y(p, k + 1) - paths.y(p, k) + driver_at(model, paths, p, k, paths.y(p, k + 1)) * dt -
                       paths.z(p, k) * paths.dW(p, k);
            const auto rr = paths.r(p, k);
            for (std::size_t i = 0; i < m; ++i) v -= rr[i] * paths.dN_tilde(p, k, i);
            e[p] = v;
        }
        out[k] = mc_estimate(e);
    }
    return out;
}

}  // namespace riskflow
