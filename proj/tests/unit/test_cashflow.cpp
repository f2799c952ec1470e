#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "riskflow/cashflow/experiment.hpp"
#include "riskflow/cashflow/riccati.hpp"
#include "riskflow/core/errors.hpp"

using namespace riskflow;
using namespace riskflow::cashflow;

namespace {

// Fixture from tests/oracles/cashflow_pipeline.py (scipy quadrature and ODE integration):
// benchmark set, y₀ = 0.3, ȳ(t) = 0.3(T − t)/T.
constexpr double kA0 = 0.95246422083416649;
constexpr double kB0 = 0.79684676503122764;
constexpr double kPsiT = 0.50695422476826824;
constexpr double kPhiT = 1.4201495032291482;
constexpr double kU0 = -7.5810628071435673;

std::vector<double> linear_ybar(const TimeGrid& grid, double y0) {
    std::vector<double> v(grid.nodes());
    for (std::size_t k = 0; k < grid.nodes(); ++k) v[k] = y0 * (grid.horizon() - grid.time(k)) / grid.horizon();
    return v;
}

}  // namespace

TEST_CASE("G(t)") {
    Params p;
    p.sigma = 1.0;
    CHECK(g_of_t(p, 0.3) == 1.0);
    p.sigma = 2.0;
    p.marks = {1.0};
    p.weights = {0.25};
    p.r = [](double, std::size_t) { return 1.0; };  // w(1 + r)² = 1
    CHECK(g_of_t(p, 0.3) == doctest::Approx(3.0));
    p.sigma = 1.0;
    CHECK_THROWS_AS(validate(p, build_grid(1.0, 10)), ConfigurationError);
    p.sigma = -0.3;
    CHECK_THROWS_AS(validate(p, build_grid(1.0, 10)), ConfigurationError);
}

TEST_CASE("A: constant-coefficient closed form and solver agreement") {
    Params p;
    const auto grid = build_grid(1.0, 1000);
    const auto closed = solve_A(p, grid, RiccatiMethod::closed_form);
    const auto rk4 = solve_A(p, grid, RiccatiMethod::rk4);
    const double rate = 2.0 * p.c + p.rho * p.rho / (p.sigma * p.sigma);
    double worst_exact = 0.0, worst_cross = 0.0;
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const double exact = p.theta * std::exp(rate * (1.0 - grid.time(k)));
        worst_exact = std::max(worst_exact, std::abs(closed.values[k] - exact));
        worst_cross = std::max(worst_cross, std::abs(closed.values[k] - rk4.values[k]));
        CHECK(closed.values[k] > 0.0);
    }
    CHECK(worst_exact <= 1e-10);
    CHECK(worst_cross <= 1e-8);
    CHECK(closed.values.back() == p.theta);
    CHECK(rk4.values.back() == p.theta);

    p.orientation = RiccatiOrientation::printed_ode;
    const auto printed = solve_A(p, grid, RiccatiMethod::rk4);
    CHECK(printed.values[0] == doctest::Approx(p.theta * std::exp(-rate)).epsilon(1e-10));
}

TEST_CASE("psi and phi") {
    Params p;
    const auto grid = build_grid(1.0, 400);
    SUBCASE("initial values") {
        const auto s = solve_psi_phi(p, grid, 0.3);
        CHECK(s.psi[0] == p.theta);
        CHECK(s.phi[0] == 1.0 - p.theta * (0.3 - p.a));
    }
    SUBCASE("rho = 0: exponential of the integrated A") {
        p.rho = 0.0;
        const auto s = solve_psi_phi(p, grid, 0.3);
        // A(t) = θe^{2c(T−t)}: ∫₀^t A = θ(e^{2cT} − e^{2c(T−t)})/(2c).
        bool monotone = true;
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
            const double t = grid.time(k);
            const double integral = p.theta * (std::exp(2 * p.c) - std::exp(2 * p.c * (1.0 - t))) / (2 * p.c);
            const double exact = p.theta * std::exp(-2.0 * p.disc_rate * p.sigma * p.sigma * integral);
            CHECK(s.psi[k] == doctest::Approx(exact).epsilon(1e-10));
            if (k > 0) monotone = monotone && s.psi[k] <= s.psi[k - 1];
        }
        CHECK(monotone);
    }
    SUBCASE("homogeneous phi from zero") {
        const double y0 = p.a + 1.0 / p.theta;  // φ(0) = 0
        const auto s = solve_psi_phi(p, grid, y0);
        for (double v : s.phi) CHECK(v == 0.0);
    }
    SUBCASE("blow-up") {
        p.rho = 40.0;
        p.sigma = 0.5;
        p.theta = 5.0;
        CHECK_THROWS_AS(solve_psi_phi(p, grid, 0.0), NumericError);
    }
}

TEST_CASE("B") {
    Params p;
    const auto grid = build_grid(1.0, 1000);
    const std::vector<double> zero(2 * grid.steps() + 1, 0.0);
    SUBCASE("zero terminal, zero source") {
        const double y0 = 1.0 / p.theta - p.a;
        for (auto method : {RiccatiMethod::closed_form, RiccatiMethod::rk4}) {
            for (double v : solve_B(p, grid, y0, zero, method).values) CHECK(v == 0.0);
        }
    }
    SUBCASE("no payout: homogeneous exponential") {
        p.c = 0.0;
        std::vector<double> src(2 * grid.steps() + 1, 0.7);
        const auto rk4 = solve_B(p, grid, 0.3, src, RiccatiMethod::rk4);
        const auto closed = solve_B(p, grid, 0.3, src, RiccatiMethod::closed_form);
        const double rate = p.rho * p.rho / (p.sigma * p.sigma);
        const double bt = 1.0 - p.theta * (0.3 + p.a);
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
            const double exact = bt * std::exp(rate * (1.0 - grid.time(k)));
            CHECK(std::abs(rk4.values[k] - exact) <= 1e-8);
            CHECK(std::abs(closed.values[k] - exact) <= 1e-10);
        }
    }
}

TEST_CASE("benchmark pipeline against the independent oracle") {
    Params p;
    const auto grid = build_grid(1.0, 1000);
    const auto s = solve_riccati(p, grid, 0.3, linear_ybar(grid, 0.3));
    CHECK(s.A.values[0] == doctest::Approx(kA0).epsilon(1e-12));
    CHECK(s.B.values[0] == doctest::Approx(kB0).epsilon(1e-12));
    CHECK(s.psi_phi.psi.back() == doctest::Approx(kPsiT).epsilon(1e-12));
    CHECK(s.psi_phi.phi.back() == doctest::Approx(kPhiT).epsilon(1e-12));
    CHECK(feedback(p, s, grid, 0, p.m0, 0.3) == doctest::Approx(kU0).epsilon(1e-12));
    CHECK(s.max_B_mismatch <= 1e-10);
    const auto rk = solve_riccati(p, grid, 0.3, linear_ybar(grid, 0.3), RiccatiMethod::rk4);
    CHECK(rk.B.values[0] == doctest::Approx(kB0).epsilon(1e-12));
}

TEST_CASE("terminal pinning over random parameter sets") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.05, 0.6);
    const auto grid = build_grid(1.0, 200);
    for (int trial = 0; trial < 20; ++trial) {
        Params p;
        p.rho = u(gen);
        p.c = u(gen);
        p.sigma = u(gen) + 0.1;
        p.disc_rate = u(gen) * 0.2;
        p.theta = u(gen);
        p.a = 2.0 * u(gen);
        const double y0 = u(gen);
        for (auto method : {RiccatiMethod::closed_form, RiccatiMethod::rk4}) {
            const auto s = solve_riccati(p, grid, y0, std::vector<double>(grid.nodes(), y0), method);
            CHECK(s.A.values.back() == p.theta);
            CHECK(s.B.values.back() == 1.0 - p.theta * (y0 + p.a));
        }
    }
}

TEST_CASE("feedback vanishes without risk premium") {
    Params p;
    p.rho = 0.0;
    const auto grid = build_grid(1.0, 50);
    const auto s = solve_riccati(p, grid, 0.2, std::vector<double>(grid.nodes(), 0.2));
    for (std::size_t k : {0ul, 20ul, 50ul}) {
        for (double x : {-2.0, 0.5, 3.0}) CHECK(feedback(p, s, grid, k, x, 0.7) == 0.0);
    }
}

TEST_CASE("model partials agree with finite differences") {
    Params p;
    const auto m = make_model(p, 0.4, DriverSign::dynamics);
    const std::vector<double> r;
    const CoefficientArgs at{0.3, 1.2, 0.5, 0.1, r, -0.8};
    auto fd = m;
    fd.analytic = {};
    for (auto c : {Coefficient::b, Coefficient::sigma, Coefficient::g, Coefficient::terminal_x,
                   Coefficient::terminal_y}) {
        for (auto v : {Variable::x, Variable::y, Variable::v}) {
            const auto exact = partial(m, c, {v}, at);
            CHECK(exact.analytic);
            CHECK(partial(fd, c, {v}, at).value == doctest::Approx(exact.value).epsilon(1e-8));
        }
    }
}

TEST_CASE("first-order condition along simulated paths") {
    Params p;
    const auto grid = build_grid(1.0, 100);
    ExperimentOptions opt;
    opt.n_paths = 2000;
    opt.pilot.n_paths = 2000;
    opt.run_probe = false;
    const auto res = run_mean_variance_experiment(p, grid, opt);
    CHECK(res.foc.paths == 100);
    CHECK(res.foc.max_abs_hv <= 1e-10);
    CHECK(res.foc.max_abs_self_gap == 0.0);
    CHECK(res.necessary.verdict == "pass");
    CHECK(res.foc.curvature_matches_G);
    CHECK(res.foc.max_abs_hv_zl_minus <= 1e-9);
    CHECK(res.foc.max_abs_hv_zl_plus <= 1e-9);
    CHECK(res.pilot.converged);
    CHECK(res.clamp_count == 0);
    for (const auto& c : res.convexity) CHECK(c.convex);

    std::ostringstream csv;
    write_plot_csv(res.plot, csv);
    CHECK(csv.str().rfind("t,A,B,psi,phi,mean_x,mean_y,mean_u\n", 0) == 0);
    CHECK(res.plot.size() == grid.nodes());
}

TEST_CASE("zero-noise run") {
    Params p;
    p.rho = 0.0;
    p.sigma = 1e-3;
    const auto grid = build_grid(1.0, 50);
    ExperimentOptions opt;
    opt.n_paths = 500;
    opt.pilot.n_paths = 500;
    opt.run_probe = false;
    opt.foc_paths = 5;
    const auto res = run_mean_variance_experiment(p, grid, opt);
    CHECK(res.var_psi.mean <= 1e-10);
}

TEST_CASE("small theta: J close to 1 + theta E[Theta]") {
    Params p;
    p.theta = 0.01;
    const auto grid = build_grid(1.0, 50);
    ExperimentOptions opt;
    opt.n_paths = 20000;
    opt.pilot.n_paths = 5000;
    opt.run_probe = false;
    opt.foc_paths = 5;
    const auto res = run_mean_variance_experiment(p, grid, opt);
    const double mean_theta = res.loss;  // Θ_θ at θ = 0.01
    // J − (1 + θE) = θ²E[Θ²]/2 + O(θ³); with E[Θ²] ≈ Θ_θ² + Var the bound below holds with margin.
    const double second = 0.5 * p.theta * p.theta * (mean_theta * mean_theta + 2.0 * res.var_psi.mean + 1.0);
    CHECK(res.cost.linear_finite);
    const double first_order = 1.0 + p.theta * mean_theta;
    CHECK(std::abs(res.cost.J() - first_order) <= second + 3.0 * res.cost.linear.se);
}

TEST_CASE("grid refinement is first order") {
    // ρ = 0 gives u ≡ 0 and deterministic dynamics, so only the time-step bias remains.
    Params p;
    p.rho = 0.0;
    std::vector<double> j;
    for (std::size_t n : {25ul, 50ul, 100ul}) {
        const auto grid = build_grid(1.0, n);
        ExperimentOptions opt;
        opt.n_paths = 200;
        opt.pilot.n_paths = 200;
        opt.run_probe = false;
        opt.foc_paths = 2;
        j.push_back(run_mean_variance_experiment(p, grid, opt).cost.log_J);
    }
    const double slope = std::log2(std::abs(j[0] - j[1]) / std::abs(j[1] - j[2]));
    CHECK(slope >= 0.8);
}

TEST_CASE("HARA preset") {
    HaraParams h;
    const auto m = hara_cashflow(h);
    const std::vector<double> r;
    const CoefficientArgs at{0.0, 2.0, 0.0, 0.0, r, 1.5};
    const double s2 = h.sigma * h.sigma;
    const double f = 0.5 * (h.theta - 1.0) * s2 * 2.25 + (0.5 * s2 + h.m - h.rate - h.payout * 2.0) * 1.5 + h.rate;
    CHECK(evaluate(m, Coefficient::f, at) == doctest::Approx(f).epsilon(1e-15));
}
