#include "riskflow/cashflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "riskflow/adjoint/adjoints.hpp"
#include "riskflow/core/errors.hpp"
#include "riskflow/engine/simulate.hpp"

namespace riskflow::cashflow {

namespace {

constexpr const char* kModule = "cashflow_example";

std::size_t node_of(const TimeGrid& grid, double t) {
    const auto k = static_cast<std::size_t>(std::llround(t / grid.dt()));
    return std::min(k, grid.steps());
}

LinearAdjointCoefficients linear_coefficients(const Params& p, const Riccati& s, const TimeGrid& grid) {
    LinearAdjointCoefficients c;
    c.A = s.A.values;
    c.B = s.B.values;
    c.psi = s.psi_phi.psi;
    c.phi = s.psi_phi.phi;
    const std::size_t m = p.weights.size();
    c.l.resize(grid.nodes());
    c.L.resize(grid.nodes() * m);
    c.r.resize(grid.nodes() * m);
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const double t = grid.time(k);
        c.l[k] = p.l_at(t);
        for (std::size_t i = 0; i < m; ++i) {
            c.L[k * m + i] = p.L_at(t, i);
            c.r[k * m + i] = p.r_at(t, i);
        }
    }
    return c;
}

HamiltonianInput hamiltonian_input(const Params& p, const PathBundle& paths, const AdjointBundle& adj,
                                   std::size_t path, std::size_t k) {
    HamiltonianInput in;
    in.state.t = paths.grid().time(k);
    in.state.x = paths.x(path, k);
    in.state.y = paths.y(path, k);
    in.state.z = paths.z(path, k);
    const auto r = paths.r(path, k);
    in.state.r.assign(r.begin(), r.end());
    in.v = paths.u(path, k);
    in.adjoint = adj.slice(path, k);
    in.theta = p.theta;
    in.weights = p.weights;
    in.marks = p.marks;
    return in;
}

}  // namespace

CoefficientModel make_model(const Params& p, double ybar0, DriverSign sign) {
    CoefficientModel m;
    m.name = sign == DriverSign::dynamics ? "cashflow" : "cashflow_hamiltonian";
    const double s = sign == DriverSign::dynamics ? -1.0 : 1.0;
    m.drift = [p](const CoefficientArgs& a) { return p.rho * a.v - p.c * a.x; };
    m.diffusion = [p](const CoefficientArgs& a) { return p.sigma * a.v; };
    m.jump = [p](const CoefficientArgs& a, std::size_t i, double) { return a.v * (1.0 + p.r_at(a.t, i)); };
    m.driver = [p, s](const CoefficientArgs& a) { return s * (p.rho * a.v - p.c * a.x + p.disc_rate * a.y); };
    m.terminal_x = [p, ybar0](double x) { return x + 0.5 * p.theta * std::pow(x - ybar0 - p.a, 2); };
    m.terminal_y = [p](double y) { return (1.0 + p.theta * p.a) * y; };
    m.analytic = [p, s, ybar0](Coefficient c, Wrt w, const CoefficientArgs& a, std::size_t i,
                               double) -> std::optional<double> {
        switch (c) {
            case Coefficient::b:
                return w.var == Variable::x ? -p.c : w.var == Variable::v ? p.rho : 0.0;
            case Coefficient::sigma:
                return w.var == Variable::v ? p.sigma : 0.0;
            case Coefficient::gamma:
                return w.var == Variable::v ? 1.0 + p.r_at(a.t, i) : 0.0;
            case Coefficient::g:
                switch (w.var) {
                    case Variable::x: return -s * p.c;
                    case Variable::y: return s * p.disc_rate;
                    case Variable::v: return s * p.rho;
                    default: return 0.0;
                }
            case Coefficient::f:
                return 0.0;
            case Coefficient::terminal_x:
                return w.var == Variable::x ? 1.0 + p.theta * (a.x - ybar0 - p.a) : 0.0;
            case Coefficient::terminal_y:
                return w.var == Variable::y ? 1.0 + p.theta * p.a : 0.0;
        }
        return std::nullopt;
    };
    m.initial_state = p.m0;
    m.terminal_value = p.y_terminal;
    return m;
}

CoefficientModel hara_cashflow(const HaraParams& h) {
    CoefficientModel m;
    m.name = "hara_cashflow";
    m.drift = [h](const CoefficientArgs& a) { return h.rho * a.v - h.payout * a.x; };
    m.diffusion = [h](const CoefficientArgs& a) { return h.sigma * a.v; };
    m.running = [h](const CoefficientArgs& a) {
        const double s2 = h.sigma * h.sigma;
        return 0.5 * (h.theta - 1.0) * s2 * a.v * a.v + (0.5 * s2 + h.m - h.rate - h.payout * a.x) * a.v + h.rate;
    };
    return m;
}

ControlPolicy feedback_policy(const Params& p, std::shared_ptr<const Riccati> s, const TimeGrid& grid) {
    return ControlPolicy::feedback([p, s, grid](double t, double x, double y, std::span<const double>) {
        return feedback(p, *s, grid, node_of(grid, t), x, y);
    });
}

Pilot run_pilot(const Params& p, const TimeGrid& grid, const RngSpec& rng, const PilotOptions& options) {
    validate(p, grid);
    if (options.max_outer == 0) throw UsageError(kModule, "pilot needs at least one iteration");
    if (!(options.relaxation > 0.0 && options.relaxation <= 1.0)) {
        throw ConfigurationError(kModule, "pilot relaxation must lie in (0, 1]");
    }
    Pilot out;
    const MarkSet marks = p.mark_set();
    double y0 = 0.0;
    std::vector<double> ybar(grid.nodes(), 0.0);
    for (std::size_t it = 0; it < options.max_outer; ++it) {
        auto riccati = std::make_shared<const Riccati>(solve_riccati(p, grid, y0, ybar, options.method));
        const auto model = make_model(p, y0, DriverSign::dynamics);
        auto sol = picard_couple(model, feedback_policy(p, riccati, grid), grid, marks, rng, options.n_paths,
                                 options.picard);
        out.riccati = riccati;
        out.y0 = y0;
        out.ybar = ybar;
        out.fit = sol.backward.fit;
        out.coupling = sol.report;
        out.y0_pathwise = sol.backward.report.y0_pathwise;
        out.outer_iterations = it + 1;
        const double next = sol.backward.report.y0;
        out.y0_history.push_back(next);
        const bool done = std::abs(next - y0) <= options.tol;
        const double w = options.relaxation;
        y0 += w * (next - y0);
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
            double s = 0.0;
            for (std::size_t q = 0; q < sol.paths.n_paths(); ++q) s += sol.paths.y(q, k);
            ybar[k] += w * (s / static_cast<double>(sol.paths.n_paths()) - ybar[k]);
        }
        if (done) {
            out.converged = true;
            break;
        }
    }
    return out;
}

CostSampler make_cost_sampler(const Params& p, const TimeGrid& grid, const Pilot& pilot, const RngSpec& rng,
                              std::size_t n_paths) {
    auto model = std::make_shared<const CoefficientModel>(make_model(p, pilot.y0, DriverSign::dynamics));
    auto field = std::make_shared<const RegressionField>(pilot.fit);
    const MarkSet marks = p.mark_set();
    return [p, grid, model, field, marks, rng, n_paths](const ControlPolicy& policy) {
        const double lambda = p.disc_rate;
        const auto s = simulate_summary(*model, policy, *field, grid, marks, rng, n_paths,
                                        [p, lambda](const CoefficientArgs& a) {
                                            return std::exp(-lambda * a.t) * (p.c * a.x - p.rho * a.v);
                                        });
        const double y0 = pairwise_sum(s.aux) / static_cast<double>(n_paths) +
                          std::exp(-lambda * grid.horizon()) * p.y_terminal;
        const std::vector<double> y{y0};
        return theta_T(s.x_terminal, s.xi_terminal, y, *model);
    };
}

ExperimentResult run_mean_variance_experiment(const Params& p, const TimeGrid& grid,
                                              const ExperimentOptions& options) {
    validate(p, grid);
    ExperimentResult out;
    const RngSpec root{options.seed};
    const MarkSet marks = p.mark_set();
    out.pilot = run_pilot(p, grid, root.child(1), options.pilot);
    const auto& pilot = out.pilot;
    const Riccati& ric = *pilot.riccati;
    const auto model = make_model(p, pilot.y0, DriverSign::dynamics);
    const auto hmodel = make_model(p, pilot.y0, DriverSign::hamiltonian);
    const auto policy = feedback_policy(p, pilot.riccati, grid);
    const RegressionField field(pilot.fit);

    out.paths = std::make_shared<PathBundle>(
        simulate_forward(model, policy, field, grid, marks, root.child(2), options.n_paths));
    const PathBundle& paths = *out.paths;
    out.clamp_count = paths.clamp_count();
    const std::size_t n = paths.n_paths(), steps = grid.steps();

    std::vector<double> xt(n), xit(n), psi(n);
    for (std::size_t q = 0; q < n; ++q) {
        xt[q] = paths.x(q, steps);
        xit[q] = paths.xi(q, steps);
        psi[q] = xt[q] + pilot.y0;
    }
    const std::vector<double> y0v{pilot.y0};
    const auto big_theta = theta_T(xt, xit, y0v, model);
    out.cost = cost_J_theta(big_theta, p.theta);
    out.loss = risk_loss(big_theta, p.theta).value;
    out.mean_psi = mc_estimate(psi);
    std::vector<double> dev(n);
    for (std::size_t q = 0; q < n; ++q) dev[q] = std::pow(psi[q] - out.mean_psi.mean, 2);
    out.var_psi = mc_estimate(dev);
    out.var_psi.mean = population_variance(psi);

    // First-order condition along the first paths.
    const std::size_t foc = std::min(options.foc_paths, n);
    const auto adj = linear_transformed_adjoints(paths, linear_coefficients(p, ric, grid), p.sigma, p.theta, foc);
    auto& d = out.foc;
    d.paths = foc;
    d.min_curvature = std::numeric_limits<double>::infinity();
    d.max_curvature = -std::numeric_limits<double>::infinity();
    d.max_fixed_gap = -std::numeric_limits<double>::infinity();
    bool curvature_ok = true;
    for (std::size_t q = 0; q < foc; ++q) {
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
            const auto in = hamiltonian_input(p, paths, adj, q, k);
            const double hv = std::abs(hamiltonian_v(in, hmodel));
            if (hv > d.max_abs_hv) {
                d.max_abs_hv = hv;
                d.worst_path = q;
                d.worst_node = k;
            }
            d.max_abs_self_gap = std::max(d.max_abs_self_gap, std::abs(hamiltonian_control_gap(in, hmodel, in.v)));
            const double h = 1e-3 * std::max(1.0, std::abs(in.v));
            for (ZlSign zl : {ZlSign::minus, ZlSign::plus}) {
                auto up = in, down = in;
                up.v += h;
                down.v -= h;
                const double fd = (hamiltonian(up, hmodel, zl) - hamiltonian(down, hmodel, zl)) / (2.0 * h);
                double& slot = zl == ZlSign::minus ? d.max_abs_hv_zl_minus : d.max_abs_hv_zl_plus;
                slot = std::max(slot, std::abs(fd));
            }
            if (q < options.scan_paths) {
                const auto scan = scan_control_gap(in, hmodel, in.v - options.gap_halfwidth,
                                                   in.v + options.gap_halfwidth, options.gap_points);
                d.max_fixed_gap = std::max(d.max_fixed_gap, scan.max_gap);
                // Closed loop: q̃₂ and π̃₂ follow v through σvA and A(1 + r)v.
                const double A = ric.A.values[k];
                std::vector<double> hs;
                for (double v : scan.v_alt) {
                    auto alt = in;
                    alt.v = v;
                    alt.adjoint.q2 = p.theta * alt.adjoint.l * alt.adjoint.p2 + p.sigma * v * A;
                    for (std::size_t i = 0; i < p.weights.size(); ++i) {
                        alt.adjoint.pi2[i] =
                            p.theta * alt.adjoint.L[i] * alt.adjoint.p2 + A * (1.0 + p.r_at(in.state.t, i)) * v;
                    }
                    hs.push_back(hamiltonian(alt, hmodel));
                }
                const double expected = A * g_of_t(p, in.state.t) > 0.0 ? 1.0 : -1.0;
                for (std::size_t j = 1; j + 1 < hs.size(); ++j) {
                    const double c2 = hs[j + 1] - 2.0 * hs[j] + hs[j - 1];
                    d.min_curvature = std::min(d.min_curvature, c2);
                    d.max_curvature = std::max(d.max_curvature, c2);
                    curvature_ok = curvature_ok && c2 * expected > 0.0;
                }
            }
        }
    }
    d.curvature_matches_G = curvature_ok && options.scan_paths > 0;
    out.necessary.condition = "necessary";
    out.necessary.verdict = d.max_abs_hv <= 1e-10 && d.max_abs_self_gap == 0.0 ? "pass" : "fail";
    out.necessary.worst_gap = d.max_abs_hv;
    out.necessary.worst_location =
        "path " + std::to_string(d.worst_path) + " node " + std::to_string(d.worst_node);

    // u01/u02 coherence and B with the pathwise p̃₃.
    double b_res = 0.0;
    for (std::size_t q = 0; q < foc; ++q) {
        std::vector<double> p3_half(2 * steps + 1);
        for (std::size_t j = 0; j <= 2 * steps; ++j) {
            const double y = j % 2 == 0 ? paths.y(q, j / 2) : 0.5 * (paths.y(q, j / 2) + paths.y(q, j / 2 + 1));
            p3_half[j] = ric.psi_phi.psi_half[j] * y + ric.psi_phi.phi_half[j];
        }
        b_res += std::abs(solve_B(p, grid, pilot.y0, p3_half, RiccatiMethod::closed_form).values[0] -
                          ric.B.values[0]);
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
            out.u_coherence = std::max(out.u_coherence,
                                       std::abs(feedback(p, ric, grid, k, paths.x(q, k), paths.y(q, k)) -
                                                feedback_u02(p, ric, grid, k, paths.x(q, k), paths.y(q, k))));
        }
    }
    out.b_pathwise_residual = foc > 0 ? b_res / static_cast<double>(foc) : 0.0;

    // Convexity hypotheses and the perturbation table.
    const std::vector<double> lo1{-10.0}, hi1{10.0};
    out.convexity.push_back(midpoint_convexity(
        "Phi", [&](std::span<const double> v) { return model.terminal_x(v[0]); }, lo1, hi1,
        options.convexity_probes, options.seed));
    out.convexity.push_back(midpoint_convexity(
        "Psi", [&](std::span<const double> v) { return model.terminal_y(v[0]); }, lo1, hi1,
        options.convexity_probes, options.seed + 1));
    if (foc > 0) {
        const auto base = hamiltonian_input(p, paths, adj, 0, 0);
        const std::vector<double> lo4{-10.0, -10.0, -10.0, base.v - 10.0}, hi4{10.0, 10.0, 10.0, base.v + 10.0};
        out.convexity.push_back(midpoint_convexity(
            "H(x,y,z,v)",
            [&](std::span<const double> v) {
                auto in = base;
                in.state.x = v[0];
                in.state.y = v[1];
                in.state.z = v[2];
                in.v = v[3];
                return hamiltonian(in, hmodel);
            },
            lo4, hi4, options.convexity_probes, options.seed + 2));
    }
    if (options.run_probe) {
        const std::size_t np = options.probe_paths == 0 ? n : options.probe_paths;
        const auto sampler = make_cost_sampler(p, grid, pilot, root.child(3), np);
        const ControlPolicy center = options.policy_shift == 0.0 ? policy : perturbed(policy, options.policy_shift);
        out.probe = sufficient_condition_probe(center, {{"constant", {}}}, options.epsilons, p.theta, sampler,
                                               out.convexity);
    }

    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        double sx = 0.0, sy = 0.0, su = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            sx += paths.x(q, k);
            sy += paths.y(q, k);
            su += paths.u(q, k);
        }
        const double inv = 1.0 / static_cast<double>(n);
        out.plot.push_back({grid.time(k), ric.A.values[k], ric.B.values[k], ric.psi_phi.psi[k], ric.psi_phi.phi[k],
                            sx * inv, sy * inv, su * inv});
    }
    return out;
}

void write_plot_csv(const std::vector<PlotRow>& rows, std::ostream& os) {
    os << "t,A,B,psi,phi,mean_x,mean_y,mean_u\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.A, r.B, r.psi,
                      r.phi, r.mean_x, r.mean_y, r.mean_u);
        os << buf;
    }
}

}  // namespace riskflow::cashflow
