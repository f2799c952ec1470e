#include "riskflow/cli/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "riskflow/cashflow/experiment.hpp"
#include "riskflow/cli/result.hpp"
#include "riskflow/core/errors.hpp"
#include "riskflow/engine/backward_field.hpp"
#include "riskflow/engine/simulate.hpp"
#include "riskflow/fbsde/solver.hpp"
#include "riskflow/risk/cost.hpp"
#include "riskflow/risk/martingale.hpp"

#ifndef RISKFLOW_VERSION
#define RISKFLOW_VERSION "0.0.0"
#endif
#ifndef RISKFLOW_GIT_REV
#define RISKFLOW_GIT_REV "unknown"
#endif

namespace riskflow::cli {

using nlohmann::json;

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

json to_json(const ConditionVerdict& v) {
    return {{"condition", v.condition},
            {"verdict", v.verdict},
            {"worst_gap", v.worst_gap},
            {"worst_location", v.worst_location},
            {"warnings", v.warnings}};
}

json cost_json(const CostEstimate& c) {
    json j = {{"theta", c.theta}, {"log_J", c.log_J}, {"log_se", c.log_se}, {"max_theta_T", c.max_theta_T}};
    j["linear"] = c.linear_finite ? metric(c.linear)
                                  : json{{"value", nullptr}, {"reason", "exp(theta * Theta_T) overflows; see log_J"}};
    return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cli", "cannot write " + path.string());
    out << text;
}

RunOutcome run_cashflow(const ExperimentConfig& c) {
    const auto grid = build_grid(c.grid.horizon, c.grid.steps);
    auto params = c.cashflow;
    params.theta = c.theta;
    auto opts = c.cashflow_options;
    opts.n_paths = c.mc.n_paths;
    opts.seed = c.mc.seed;
    opts.pilot.method = c.riccati_method;
    const auto res = cashflow::run_mean_variance_experiment(params, grid, opts);

    RunOutcome out;
    json& r = out.result;
    r["J_theta"] = cost_json(res.cost);
    r["risk_loss"] = metric(res.loss);
    r["mean_psi"] = metric(res.mean_psi);
    r["var_psi"] = metric(res.var_psi);

    json nec = to_json(res.necessary);
    const auto& f = res.foc;
    nec["paths"] = f.paths;
    nec["max_abs_hv"] = f.max_abs_hv;
    nec["max_abs_self_gap"] = f.max_abs_self_gap;
    nec["max_fixed_gap"] = f.max_fixed_gap;
    nec["curvature"] = {{"min", f.min_curvature}, {"max", f.max_curvature}, {"matches_G", f.curvature_matches_G}};
    nec["zl_sign"] = {{"minus", f.max_abs_hv_zl_minus}, {"plus", f.max_abs_hv_zl_plus}};
    r["necessary_condition"] = nec;

    json probe = to_json(res.probe.verdict);
    probe["enabled"] = opts.run_probe;
    probe["baseline"] = cost_json(res.probe.baseline);
    probe["cells"] = json::array();
    for (const auto& cell : res.probe.cells) {
        probe["cells"].push_back({{"direction", cell.direction},
                                  {"epsilon", cell.epsilon},
                                  {"log_J", cell.cost.log_J},
                                  {"relative_margin", metric(cell.relative_margin)},
                                  {"consistent", cell.consistent},
                                  {"improving", cell.improving}});
    }
    probe["convexity"] = json::array();
    for (const auto& cv : res.convexity) {
        probe["convexity"].push_back({{"name", cv.name},
                                      {"probes", cv.probes},
                                      {"violations", cv.violations},
                                      {"worst_excess", cv.worst_excess},
                                      {"convex", cv.convex}});
    }
    r["sufficient_probe"] = probe;

    const auto& pil = res.pilot;
    const auto& ric = *pil.riccati;
    r["solver"] = {
        {"pilot",
         {{"y0", pil.y0},
          {"y0_pathwise", metric(pil.y0_pathwise)},
          {"y0_history", pil.y0_history},
          {"outer_iterations", pil.outer_iterations},
          {"converged", pil.converged},
          {"picard", {{"iterations", pil.coupling.iterations},
                      {"converged", pil.coupling.converged},
                      {"delta", pil.coupling.delta},
                      {"tol", pil.coupling.tol}}}}},
        {"riccati",
         {{"method", ric.A.method},
          {"A0", ric.A.values.front()},
          {"B0", ric.B.values.front()},
          {"psi_T", ric.psi_phi.psi.back()},
          {"phi_T", ric.psi_phi.phi.back()},
          {"max_B_mismatch", ric.max_B_mismatch}}},
        {"u01_u02_max_gap", res.u_coherence},
        {"B_pathwise_residual", res.b_pathwise_residual},
        {"clamp_count", res.clamp_count}};

    const bool nec_ok = res.necessary.verdict == "pass";
    const bool probe_ok = !opts.run_probe || res.probe.consistent;
    out.exit_code = nec_ok && probe_ok ? kSuccess : kVerdictFailed;

    if (!c.output.dir.empty()) {
        const std::filesystem::path dir(c.output.dir);
        if (c.output.plot_csv) {
            std::ostringstream os;
            cashflow::write_plot_csv(res.plot, os);
            write_file(dir / "plot.csv", os.str());
        }
        if (c.output.dump_paths && res.paths) {
            std::ostringstream os;
            write_paths_csv(*res.paths, os, c.output.max_dump_paths);
            write_file(dir / "paths.csv", os.str());
        }
    }
    return out;
}

RunOutcome run_generic(const ExperimentConfig& c) {
    const auto& g = c.generic;
    CoefficientModel m;
    m.name = "linear_gaussian";
    m.initial_state = g.x0;
    const double kappa = g.kappa, level = g.level, s = g.s, beta = g.beta;
    m.drift = [=](const CoefficientArgs& a) { return kappa * (level - a.x); };
    m.diffusion = [=](const CoefficientArgs&) { return s; };
    m.driver = [=](const CoefficientArgs& a) { return a.x + beta * a.y; };
    const auto grid = build_grid(c.grid.horizon, c.grid.steps);
    auto paths = simulate_forward(m, ControlPolicy::constant(0.0), ZeroField{}, grid, MarkSet{}, RngSpec{c.mc.seed},
                                  c.mc.n_paths);
    const auto sol = solve_backward(m, paths, 0.0);

    const double T = c.grid.horizon;
    const auto integral = [T](double rate) { return std::abs(rate) < 1e-12 ? T : (std::exp(rate * T) - 1.0) / rate; };
    const double exact = level * integral(beta) + (g.x0 - level) * integral(beta - kappa);

    const auto residuals = martingale_residuals(m, paths);
    const double floor = 1e-14 * (1.0 + std::abs(exact));
    std::size_t outside = 0;
    for (const auto& e : residuals) outside += std::abs(e.mean) > 3.0 * e.se + floor ? 1 : 0;

    RunOutcome out;
    json& r = out.result;
    const double err = std::abs(sol.report.y0 - exact);
    const bool ok = err <= 3.0 * sol.report.y0_pathwise.se;
    r["y0"] = metric(sol.report.y0);
    r["y0_pathwise"] = metric(sol.report.y0_pathwise);
    r["y0_exact"] = exact;
    r["verdicts"] = {{"y0_within_3se", {{"pass", ok}, {"abs_error", err}}},
                     {"martingale_residual", {{"nodes", residuals.size()}, {"outside_3se", outside}}}};
    r["solver"] = {{"basis_dimension", sol.report.basis_dimension}, {"max_condition", sol.report.max_condition}};
    out.exit_code = ok ? kSuccess : kVerdictFailed;
    if (!c.output.dir.empty() && c.output.dump_paths) {
        std::ostringstream os;
        write_paths_csv(paths, os, c.output.max_dump_paths);
        write_file(std::filesystem::path(c.output.dir) / "paths.csv", os.str());
    }
    return out;
}

json property(const std::string& name, bool pass, json detail) {
    return {{"name", name}, {"pass", pass}, {"detail", std::move(detail)}};
}

RunOutcome run_properties(const ExperimentConfig& c) {
    json props = json::array();

    {
        const double p = 0.2;
        const std::vector<double> thetas{0.05, 0.1, 0.2, 0.4};
        std::vector<double> losses;
        for (double th : thetas) losses.push_back(std::log(1.0 - p + p * std::exp(th)) / th);
        const auto e = expansion_residual(losses, thetas, p, p * (1.0 - p));
        props.push_back(property("bernoulli_expansion_slope", !e.degenerate && e.slope >= 1.7 && e.slope <= 2.3,
                                 {{"slope", e.slope}, {"residuals", e.residuals}}));
    }

    const auto grid = build_grid(c.grid.horizon, c.grid.steps);
    const std::size_t n = c.mc.n_paths;
    const RngSpec root{c.mc.seed};
    {
        CoefficientModel m;
        m.diffusion = [](const CoefficientArgs&) { return 1.0; };
        const auto paths = simulate_forward(m, ControlPolicy::constant(0.0), ZeroField{}, grid, MarkSet{},
                                            root.child(1), n);
        std::vector<double> xt(n);
        for (std::size_t q = 0; q < n; ++q) xt[q] = paths.x(q, grid.steps());
        const auto mean = mc_estimate(xt).mean;
        const auto loss = risk_loss(xt, c.theta);
        props.push_back(property("jensen", loss.value >= mean, {{"loss", loss.value}, {"mean", mean}}));
        double var = 0.0;
        for (double v : xt) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        const double small = 1e-3;
        const double gap = risk_loss(xt, small).value - mean - 0.5 * small * var;
        props.push_back(property("small_theta_reduction", std::abs(gap) <= 1e-5 * (1.0 + var),
                                 {{"theta", small}, {"gap", gap}, {"variance", var}}));
        const auto dens = girsanov_density(paths, c.theta, [](std::size_t, std::size_t) { return 0.3; });
        const auto e = mc_estimate(dens.terminal());
        props.push_back(property("density_pure_diffusion", std::abs(e.mean - 1.0) <= 3.0 * e.se, metric(e)));
    }
    {
        const std::vector<double> mk{0.5}, w{2.0};
        const auto marks = validate_mark_set(mk, w);
        CoefficientModel m;
        m.diffusion = [](const CoefficientArgs&) { return 1.0; };
        const auto paths = simulate_forward(m, ControlPolicy::constant(0.0), ZeroField{}, grid, marks,
                                            root.child(2), n);
        const auto zero_l = [](std::size_t, std::size_t) { return 0.0; };
        const auto L = [](std::size_t, std::size_t, std::size_t) { return 0.5; };
        const auto jump = mc_estimate(girsanov_density(paths, c.theta, zero_l, L).terminal());
        props.push_back(property("density_pure_jump", std::abs(jump.mean - 1.0) <= 3.0 * jump.se, metric(jump)));
        const auto mixed = mc_estimate(
            girsanov_density(paths, c.theta, [](std::size_t, std::size_t) { return 0.3; }, L).terminal());
        props.push_back(property("density_mixed", std::abs(mixed.mean - 1.0) <= 3.0 * mixed.se, metric(mixed)));
    }

    RunOutcome out;
    bool all = true;
    for (const auto& p : props) all = all && p["pass"].get<bool>();
    out.result["properties"] = props;
    out.result["all_pass"] = all;
    out.exit_code = all ? kSuccess : kVerdictFailed;
    return out;
}

}  // namespace

RunOutcome run(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    if (!config.output.dir.empty()) std::filesystem::create_directories(config.output.dir);

    RunOutcome out;
    if (config.experiment == "cashflow") {
        out = run_cashflow(config);
    } else if (config.experiment == "generic_fbsde") {
        out = run_generic(config);
    } else if (config.experiment == "property_suite") {
        out = run_properties(config);
    } else {
        throw ConfigurationError("cli", "unknown experiment '" + config.experiment + "'");
    }

    json& r = out.result;
    r["experiment"] = config.experiment;
    r["config"] = config.resolved;
    r["version"] = {{"version", RISKFLOW_VERSION}, {"git_rev", RISKFLOW_GIT_REV}};
    r["exit_code"] = out.exit_code;
    r["timestamp"] = utc_timestamp();
    r["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r["determinism_hash"] = determinism_hash(r);

    if (!config.output.dir.empty()) {
        write_file(std::filesystem::path(config.output.dir) / "result.json", canonical_dump(r) + "\n");
    }
    return out;
}

}  // namespace riskflow::cli
