#include "riskflow/risk/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskflow/core/errors.hpp"
#include "riskflow/core/risk_params.hpp"
#include "riskflow/engine/parallel.hpp"
#include "riskflow/engine/simulate.hpp"
#include "riskflow/risk/cost.hpp"

namespace riskflow {

namespace {

constexpr const char* kModule = "risk_sensitive";

double log_mean_exp(const std::vector<double>& v) {
    const double top = *std::max_element(v.begin(), v.end());
    std::vector<double> scaled(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) scaled[i] = std::exp(v[i] - top);
    return top + std::log(pairwise_sum(scaled) / static_cast<double>(v.size()));
}

}  // namespace

VBounds v_bounds(double bound_c, double horizon, double theta) {
    const double e = (2.0 + horizon) * bound_c * theta;
    return {std::exp(-e), std::exp(e)};
}

VThetaEstimate v_theta(const PathBundle& paths, const CoefficientModel& model, double theta, std::size_t k,
                       const RegressionBasis& basis) {
    validate_theta(theta, kModule);
    if (k > paths.steps()) throw UsageError(kModule, "node index beyond the grid");
    const auto big_theta = theta_T(paths, model);
    std::vector<double> a(big_theta.size());
    for (std::size_t p = 0; p < a.size(); ++p) a[p] = std::exp(theta * big_theta[p]);
    VThetaEstimate out;
    if (k == paths.steps()) {
        out.values = std::move(a);
        return out;
    }
    const auto x = paths.x_at(k);
    const auto xi = paths.xi_at(k);
    NodeFit fit = NodeFit::fit(x, xi, {std::span<const double>(a)}, basis, kModule);
    out.values = fit.fitted(0);
    out.condition = fit.condition();
    if (model.bound) {
        const auto b = v_bounds(*model.bound, paths.grid().horizon(), theta);
        for (double& v : out.values) {
            if (v < b.lower || v > b.upper) {
                v = std::clamp(v, b.lower, b.upper);
                ++out.projected;
            }
        }
    }
    return out;
}

NestedLambda nested_lambda(const PathBundle& outer, std::size_t n_outer, const CoefficientModel& model,
                           const ControlPolicy& policy, const BackwardField& field, const RngSpec& inner_rng,
                           double theta, const NestedOptions& options) {
    validate_theta(theta, kModule);
    if (!outer.has_xi()) throw UsageError(kModule, "nested estimate needs outer paths with xi");
    if (n_outer == 0 || n_outer > outer.n_paths()) throw UsageError(kModule, "n_outer must be in [1, n_paths]");
    if (options.n_inner < 2) throw UsageError(kModule, "n_inner must be at least 2");
    const std::size_t nodes = outer.nodes();
    const std::size_t n_steps = outer.steps();
    NestedLambda out;
    out.n_outer = n_outer;
    out.nodes = nodes;
    out.v.assign(n_outer * nodes, 0.0);
    out.lambda.assign(n_outer * nodes, 0.0);
    if (options.gradient) out.lambda_x.assign(n_outer * nodes, 0.0);

    auto log_v = [&](std::size_t p, std::size_t k, double x_start, const RngSpec& rng) {
        const auto s = simulate_summary_from(model, policy, field, outer.grid(), outer.marks(), rng, options.n_inner,
                                             k, x_start, outer.xi(p, k));
        const std::vector<double> y0{outer.y(p, 0)};
        auto th = theta_T(s.x_terminal, s.xi_terminal, y0, model);
        for (double& v : th) v *= theta;
        return log_mean_exp(th);
    };

    for (std::size_t p = 0; p < n_outer; ++p) {
        for (std::size_t k = 0; k < nodes; ++k) {
            double lv;
            if (k == n_steps) {
                const std::vector<double> xt{outer.x(p, k)}, xit{outer.xi(p, k)}, y0{outer.y(p, 0)};
                lv = theta * theta_T(xt, xit, y0, model)[0];
            } else {
                const RngSpec rng = inner_rng.child(p * nodes + k);
                lv = log_v(p, k, outer.x(p, k), rng);
                if (options.gradient) {
                    const double h = options.gradient_step * std::max(1.0, std::abs(outer.x(p, k)));
                    const double up = log_v(p, k, outer.x(p, k) + h, rng);
                    const double down = log_v(p, k, outer.x(p, k) - h, rng);
                    out.lambda_x[p * nodes + k] = (up - down) / (2.0 * h * theta);
                }
            }
            out.v[p * nodes + k] = std::exp(lv);
            out.lambda[p * nodes + k] = lv / theta - outer.xi(p, k);
        }
        if (options.gradient) {
            // Terminal gradient of Λ(T) = Φ(x) + Ψ(y_0) + ξ − ξ is Φ_x.
            const CoefficientArgs at{outer.grid().horizon(), outer.x(p, n_steps), outer.y(p, 0), 0.0, {}, 0.0};
            out.lambda_x[p * nodes + n_steps] = partial(model, Coefficient::terminal_x, {Variable::x}, at).value;
        }
    }
    return out;
}

std::vector<double> GirsanovPaths::terminal() const {
    std::vector<double> out(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) out[p] = at(p, nodes - 1);
    return out;
}

GirsanovPaths girsanov_density(const PathBundle& paths, double theta, const PathFn& l, const PathMarkFn& L) {
    validate_theta(theta, kModule);
    if (!l) throw UsageError(kModule, "Girsanov density needs the diffusion kernel l");
    const std::size_t n = paths.n_paths(), nodes = paths.nodes(), steps = paths.steps(), m = paths.n_marks();
    const double dt = paths.grid().dt();
    GirsanovPaths out;
    out.n_paths = n;
    out.nodes = nodes;
    out.n_marks = m;
    out.density.assign(n * nodes, 1.0);
    out.dW_theta.assign(n * steps, 0.0);
    out.dN_theta.assign(n * steps * m, 0.0);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            double log_density = 0.0;
            for (std::size_t k = 0; k < steps; ++k) {
                const double lk = l(p, k);
                log_density += theta * lk * paths.dW(p, k) - 0.5 * theta * theta * lk * lk * dt;
                out.dW_theta[p * steps + k] = paths.dW(p, k) - theta * lk * dt;
                for (std::size_t i = 0; i < m; ++i) {
                    const double Lk = L ? L(p, k, i) : 0.0;
                    const double w = paths.marks().weight(i);
                    const auto jumps = paths.dN(p, k, i);
                    const double factor = 1.0 + theta * Lk;
                    if (jumps > 0) {
                        if (!(factor > 0.0)) {
                            std::ostringstream msg;
                            msg << "Girsanov density turns nonpositive on path " << p << " at step " << k
                                << ": 1 + theta*L = " << factor << " for mark " << i;
                            throw NumericError(kModule, msg.str());
                        }
                        log_density += static_cast<double>(jumps) * std::log(factor);
                    }
                    log_density -= theta * w * Lk * dt;
                    out.dN_theta[(p * steps + k) * m + i] = static_cast<double>(jumps) - w * factor * dt;
                }
                out.density[p * nodes + k + 1] = std::exp(log_density);
            }
        }
    });
    return out;
}

QuadraticResidual quadratic_generator_residual(const PathBundle& paths, std::span<const double> lambda,
                                               std::size_t n_outer, const CoefficientModel& model, double theta,
                                               const PathFn& l, const PathMarkFn& L, const PathMarkFn& r) {
    validate_theta(theta, kModule);
    const std::size_t nodes = paths.nodes(), steps = paths.steps(), m = paths.n_marks();
    if (lambda.empty()) throw UsageError(kModule, "quadratic residual needs a Lambda trajectory");
    if (n_outer < 2 || n_outer > paths.n_paths() || lambda.size() != n_outer * nodes) {
        throw UsageError(kModule, "Lambda trajectory must hold n_outer x nodes values");
    }
    if (!paths.has_xi()) throw UsageError(kModule, "quadratic residual needs the running-cost process");
    const double dt = paths.grid().dt();
    QuadraticResidual out;
    std::vector<double> e(n_outer);
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t p = 0; p < n_outer; ++p) {
            const double lk = l ? l(p, k) : 0.0;
            const double f_dt = paths.xi(p, k + 1) - paths.xi(p, k);
            double generator = f_dt + 0.5 * theta * lk * lk * dt;
            double martingale = lk * paths.dW(p, k);
            for (std::size_t i = 0; i < m; ++i) {
                const double w = paths.marks().weight(i);
                const double Li = L ? L(p, k, i) : 0.0;
                const double ri = r ? r(p, k, i) : 0.0;
                const double jump_r = std::expm1(theta * ri) / theta;
                generator += (0.5 * theta * w * Li * Li + w * (jump_r - ri)) * dt;
                martingale += (Li - jump_r) * paths.dN_tilde(p, k, i);
            }
            e[p] = lambda[p * nodes + k + 1] - lambda[p * nodes + k] + generator - martingale;
        }
        out.per_node.push_back(mc_estimate(e));
    }
    std::vector<double> mis(n_outer), mis_x(n_outer);
    for (std::size_t p = 0; p < n_outer; ++p) {
        const double xt = paths.x(p, steps);
        const double psi = model.terminal_y ? model.terminal_y(paths.y(p, 0)) : 0.0;
        const double phi = model.terminal_x ? model.terminal_x(xt) : 0.0;
        const CoefficientArgs at{paths.grid().horizon(), xt, paths.y(p, 0), 0.0, {}, 0.0};
        const double phi_x = partial(model, Coefficient::terminal_x, {Variable::x}, at).value;
        mis[p] = std::abs(lambda[p * nodes + steps] - (phi + psi));
        mis_x[p] = std::abs(lambda[p * nodes + steps] - (phi_x + psi));
    }
    out.terminal_mismatch = mc_estimate(mis);
    out.terminal_mismatch_phi_x = mc_estimate(mis_x);
    return out;
}

}  // namespace riskflow
