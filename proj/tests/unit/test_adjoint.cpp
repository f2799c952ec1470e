#include <doctest.h>

#include <cmath>
#include <vector>

#include "riskflow/adjoint/adjoints.hpp"
#include "riskflow/adjoint/hamiltonian.hpp"
#include "riskflow/adjoint/probe.hpp"
#include "riskflow/cashflow/experiment.hpp"
#include "riskflow/core/errors.hpp"
#include "riskflow/engine/simulate.hpp"

using namespace riskflow;

namespace {

HamiltonianInput plain_input(double x, double y, double v) {
    HamiltonianInput in;
    in.state.x = x;
    in.state.y = y;
    in.v = v;
    in.theta = 0.5;
    return in;
}

}  // namespace

TEST_CASE("Hamiltonian of trivial inputs") {
    CoefficientModel zero;
    CHECK(hamiltonian(plain_input(1.0, 2.0, 3.0), zero) == 0.0);
    CoefficientModel unit;
    unit.running = [](const CoefficientArgs&) { return 1.0; };
    CHECK(hamiltonian(plain_input(1.0, 2.0, 3.0), unit) == 1.0);
}

TEST_CASE("example Hamiltonian by hand") {
    cashflow::Params p;  // ρ = 0.2, c = 0.1, σ = 0.3, λ = 0.05
    const auto model = cashflow::make_model(p, 0.0, cashflow::DriverSign::hamiltonian);
    for (double x : {-1.0, 0.0, 2.0}) {
        for (double y : {0.0, 0.5}) {
            auto in = plain_input(x, y, 1.0);
            in.adjoint.p2 = 1.0;
            in.adjoint.q2 = 0.5;
            in.adjoint.p3 = 0.2;
            const double expected = (0.2 * 1 - 0.1 * x) * 1 + 0.3 * 1 * 0.5 + (0.2 * 1 - 0.1 * x + 0.05 * y) * 0.2;
            CHECK(hamiltonian(in, model) == doctest::Approx(expected).epsilon(1e-15));
        }
    }
}

TEST_CASE("z l sign") {
    CoefficientModel m;
    auto in = plain_input(0.0, 0.0, 0.0);
    in.state.z = 2.0;
    in.adjoint.l = 0.3;
    in.adjoint.p3 = 1.5;
    const double minus = hamiltonian(in, m, ZlSign::minus), plus = hamiltonian(in, m, ZlSign::plus);
    CHECK(minus == doctest::Approx(-0.5 * 0.3 * 2.0 * 1.5));
    CHECK(plus - minus == doctest::Approx(2.0 * 0.5 * 0.3 * 2.0 * 1.5));
}

TEST_CASE("jump terms") {
    CoefficientModel m;
    m.jump = [](const CoefficientArgs& a, std::size_t, double lambda) { return a.v * lambda; };
    m.driver = [](const CoefficientArgs&) { return 1.0; };
    auto in = plain_input(0.0, 0.0, 2.0);
    in.weights = {0.5};
    in.marks = {3.0};
    in.state.r = {0.4};
    in.adjoint.pi2 = {0.1};
    in.adjoint.L = {0.2};
    in.adjoint.p3 = 1.0;
    // g·p̃₃ + w[γπ̃₂ − (g − θLr)p̃₃]
    const double expected = 1.0 + 0.5 * (6.0 * 0.1 - (1.0 - 0.5 * 0.2 * 0.4));
    CHECK(hamiltonian(in, m) == doctest::Approx(expected).epsilon(1e-15));
    in.marks = {};
    CHECK_THROWS_AS(hamiltonian(in, m), UsageError);
}

TEST_CASE("control gap") {
    cashflow::Params p;
    const auto model = cashflow::make_model(p, 0.0, cashflow::DriverSign::hamiltonian);
    auto in = plain_input(1.3, 0.4, -0.7);
    in.adjoint.p2 = 0.9;
    in.adjoint.q2 = -0.2;
    in.adjoint.p3 = 1.1;
    CHECK(hamiltonian_control_gap(in, model, in.v) == 0.0);
    CHECK_THROWS_AS(hamiltonian_control_gap(in, model, 5.0, ControlRange{-1.0, 1.0}), UsageError);
    // ∂H/∂v = ρp̃₂ + σq̃₂ + ρp̃₃, affine in v.
    const double hv = 0.2 * 0.9 + 0.3 * -0.2 + 0.2 * 1.1;
    CHECK(hamiltonian_v(in, model) == doctest::Approx(hv).epsilon(1e-15));
    CHECK(hamiltonian_control_gap(in, model, 0.3) == doctest::Approx(hv * 1.0).epsilon(1e-12));

    CoefficientModel free;
    free.drift = [](const CoefficientArgs& a) { return a.x; };
    for (double v : {-3.0, 0.0, 4.0}) CHECK(hamiltonian_control_gap(in, free, v) == 0.0);
}

TEST_CASE("linear adjoints at maturity") {
    // θ = 0.1, x_T = 2, y₀ = 0.5, a = 1: p̃₂(T) = A(T)x + B(T) = 0.2 + 1 − 0.15 = 1.05.
    CoefficientModel m;
    m.initial_state = 2.0;
    const auto grid = build_grid(1.0, 4);
    const auto paths = simulate_forward(m, ControlPolicy::constant(0.0), ZeroField{}, grid, {}, RngSpec{1}, 3);
    LinearAdjointCoefficients c;
    const double theta = 0.1, y0 = 0.5, a = 1.0;
    c.A.assign(grid.nodes(), theta);
    c.B.assign(grid.nodes(), 1.0 - theta * (y0 + a));
    c.psi.assign(grid.nodes(), theta);
    c.phi.assign(grid.nodes(), 1.0);
    const auto adj = linear_transformed_adjoints(paths, c, 0.3, theta);
    CHECK(adj.p2[adj.at(1, grid.steps())] == doctest::Approx(1.05).epsilon(1e-15));
    CHECK(AdjointBundle::p1_tilde() == 1.0);

    c.A.assign(grid.nodes(), 0.0);
    CHECK_THROWS_AS(linear_transformed_adjoints(paths, c, 0.3, theta), ConfigurationError);
}

TEST_CASE("raw reconstruction on the example") {
    cashflow::Params p;
    const auto grid = build_grid(1.0, 50);
    cashflow::ExperimentOptions opt;
    opt.n_paths = 2000;
    opt.pilot.n_paths = 2000;
    opt.run_probe = false;
    opt.foc_paths = 20;
    opt.scan_paths = 2;
    const auto res = cashflow::run_mean_variance_experiment(p, grid, opt);
    const auto& paths = *res.paths;
    const auto& ric = *res.pilot.riccati;
    LinearAdjointCoefficients c{ric.A.values, ric.B.values, ric.psi_phi.psi, ric.psi_phi.phi, {}, {}, {}};
    auto adj = linear_transformed_adjoints(paths, c, p.sigma, p.theta, 20);
    // V^θ only needs to be positive for the identity; the terminal check uses A_T itself.
    const auto model = cashflow::make_model(p, res.pilot.y0, cashflow::DriverSign::dynamics);
    std::vector<double> v(20 * grid.nodes(), 1.0);
    for (std::size_t q = 0; q < 20; ++q) {
        const double x = paths.x(q, grid.steps());
        const double big_theta = model.terminal_x(x) + model.terminal_y(res.pilot.y0);
        v[q * grid.nodes() + grid.steps()] = std::exp(p.theta * big_theta);
        for (std::size_t k = 0; k < grid.steps(); ++k) v[q * grid.nodes() + k] = 1.0 + 0.01 * static_cast<double>(k);
    }
    adj.reconstruct_raw(v);
    CHECK(adj.transform_identity_error() <= 1e-10);
    for (std::size_t q = 0; q < 20; ++q) {
        const double x = paths.x(q, grid.steps());
        const double a_t = v[q * grid.nodes() + grid.steps()];
        const double phi_x = 1.0 + p.theta * (x - res.pilot.y0 - p.a);
        const double raw = adj.raw_p2[adj.at(q, grid.steps())];
        CHECK(std::abs(raw - p.theta * phi_x * a_t) <= 1e-8 * std::abs(p.theta * phi_x * a_t));
    }
}

TEST_CASE("midpoint convexity") {
    const std::vector<double> lo{-3.0, -3.0}, hi{3.0, 3.0};
    const auto convex = midpoint_convexity(
        "bowl", [](std::span<const double> v) { return v[0] * v[0] + std::abs(v[1]); }, lo, hi, 1000, 3);
    CHECK(convex.convex);
    const auto concave =
        midpoint_convexity("cap", [](std::span<const double> v) { return -v[0] * v[0]; }, lo, hi, 1000, 3);
    CHECK_FALSE(concave.convex);
    CHECK(concave.violations > 900);
}

namespace {

/// dx = v dt + 0.3 dW, x₀ = 1, Θ_T = x_T²: the optimal constant control is v = −1.
CostSampler quadratic_sampler(std::size_t n) {
    auto m = std::make_shared<CoefficientModel>();
    m->initial_state = 1.0;
    m->drift = [](const CoefficientArgs& a) { return a.v; };
    m->diffusion = [](const CoefficientArgs&) { return 0.3; };
    m->terminal_x = [](double x) { return x * x; };
    return [m, n](const ControlPolicy& u) {
        const auto grid = build_grid(1.0, 20);
        const auto s = simulate_summary(*m, u, ZeroField{}, grid, {}, RngSpec{17}, n);
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = m->terminal_x(s.x_terminal[i]);
        return out;
    };
}

}  // namespace

TEST_CASE("sufficient-condition probe") {
    const auto sampler = quadratic_sampler(20000);
    const std::vector<PerturbationDirection> dirs{{"constant", {}}};
    const std::vector<double> eps{-0.25, -0.1, 0.0, 0.1, 0.25};

    SUBCASE("optimal control dominates") {
        const auto probe = sufficient_condition_probe(ControlPolicy::constant(-1.0), dirs, eps, 0.5, sampler);
        CHECK(probe.consistent);
        CHECK(probe.verdict.verdict == "consistent with optimality");
        for (const auto& c : probe.cells) {
            if (c.epsilon == 0.0) {
                CHECK(c.cost.log_J == probe.baseline.log_J);
                CHECK(c.relative_margin.mean == 0.0);
            }
        }
    }
    SUBCASE("shifted control is improvable") {
        const auto probe = sufficient_condition_probe(ControlPolicy::constant(-0.5), dirs, eps, 0.5, sampler);
        CHECK(probe.improving_found);
        CHECK_FALSE(probe.consistent);
        bool downward = false;
        for (const auto& c : probe.cells) downward = downward || (c.improving && c.epsilon < 0.0);
        CHECK(downward);
    }
    SUBCASE("failed convexity becomes a warning") {
        ConvexityReport bad;
        bad.name = "Phi";
        bad.convex = false;
        bad.probes = 10;
        bad.violations = 4;
        const auto probe =
            sufficient_condition_probe(ControlPolicy::constant(-1.0), dirs, {0.1}, 0.5, sampler, {bad});
        REQUIRE(probe.verdict.warnings.size() == 1);
        CHECK(probe.verdict.warnings[0].find("Phi") != std::string::npos);
    }
}
