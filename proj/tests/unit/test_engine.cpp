#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "riskflow/core/errors.hpp"
#include "riskflow/engine/jumps.hpp"
#include "riskflow/engine/parallel.hpp"
#include "riskflow/engine/path_bundle.hpp"
#include "riskflow/engine/rng.hpp"
#include "riskflow/engine/simulate.hpp"
#include "riskflow/engine/statistics.hpp"

using namespace riskflow;

namespace {

const std::vector<double> kNoR;

struct WorkerGuard {
    explicit WorkerGuard(std::size_t n) { set_worker_override(n); }
    ~WorkerGuard() { set_worker_override(0); }
};

bool same_bundle(const PathBundle& a, const PathBundle& b) {
    for (std::size_t p = 0; p < a.n_paths(); ++p) {
        for (std::size_t k = 0; k < a.nodes(); ++k) {
            if (a.x(p, k) != b.x(p, k) || a.xi(p, k) != b.xi(p, k) || a.u(p, k) != b.u(p, k)) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
    const RngSpec spec{42};
    auto a = path_stream(spec, 7, StreamKind::brownian);
    auto b = path_stream(spec, 7, StreamKind::brownian);
    auto c = path_stream(spec, 7, StreamKind::jumps);
    auto d = path_stream(spec, 8, StreamKind::brownian);
    bool any_diff_c = false, any_diff_d = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next();
        CHECK(va == b.next());
        any_diff_c |= va != c.next();
        any_diff_d |= va != d.next();
    }
    CHECK(any_diff_c);
    CHECK(any_diff_d);
    CHECK(spec.child(1).master_seed != spec.child(2).master_seed);
}

TEST_CASE("mc_estimate") {
    const std::vector<double> ones{1, 1, 1, 1};
    const auto e1 = mc_estimate(ones);
    CHECK(e1.mean == 1.0);
    CHECK(e1.se == 0.0);

    const std::vector<double> two{0, 2};
    const auto e2 = mc_estimate(two);
    CHECK(e2.mean == 1.0);
    CHECK(e2.se == doctest::Approx(1.0));
    CHECK(e2.ci_low == doctest::Approx(1.0 - 1.96));

    auto g = path_stream(RngSpec{2024}, 0, StreamKind::brownian);
    std::vector<double> z(100000);
    for (auto& v : z) v = g.normal();
    const auto ez = mc_estimate(z);
    CHECK(std::abs(ez.mean) <= 0.02);
    CHECK(ez.se == doctest::Approx(1.0 / std::sqrt(1e5)).epsilon(0.02));

    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(mc_estimate(one), StatisticsError);
    const std::vector<double> bad{1.0, std::nan("")};
    CHECK_THROWS_AS(mc_estimate(bad), StatisticsError);
}

TEST_CASE("sample_jumps") {
    const auto grid = build_grid(1.0, 50);
    const RngSpec rng{11};
    SUBCASE("no activity") {
        for (std::size_t p = 0; p < 100; ++p) CHECK(sample_jumps(MarkSet{}, grid, rng, p).events.empty());
    }
    SUBCASE("poisson count with rate 2") {
        const std::vector<double> m{-0.1, 0.4}, w{0.5, 1.5};
        const auto marks = validate_mark_set(m, w);
        const std::size_t n = 100000;
        std::vector<double> counts(n), second(n);
        for (std::size_t p = 0; p < n; ++p) {
            const auto ledger = sample_jumps(marks, grid, rng, p);
            counts[p] = static_cast<double>(ledger.events.size());
            double prev = 0.0, s = 0.0;
            for (const auto& e : ledger.events) {
                REQUIRE(e.time > prev);
                REQUIRE(e.time <= 1.0);
                REQUIRE(e.mark < 2);
                prev = e.time;
                s += e.mark;
            }
            second[p] = s;
        }
        const auto est = mc_estimate(counts);
        CHECK(std::abs(est.mean - 2.0) <= 3.0 * est.se);
        const auto mark1 = mc_estimate(second);
        CHECK(std::abs(mark1.mean - 1.5) <= 3.0 * mark1.se);
    }
    SUBCASE("single mark") {
        const std::vector<double> m{0.7}, w{3.0};
        const auto marks = validate_mark_set(m, w);
        for (std::size_t p = 0; p < 200; ++p) {
            for (const auto& e : sample_jumps(marks, grid, rng, p).events) CHECK(e.mark == 0);
        }
    }
}

TEST_CASE("step_of assigns each time to its step") {
    const auto grid = build_grid(1.0, 4);
    CHECK(step_of(grid, 0.1) == 0);
    CHECK(step_of(grid, 0.25) == 0);
    CHECK(step_of(grid, 0.26) == 1);
    CHECK(step_of(grid, 1.0) == 3);
}

TEST_CASE("simulate_forward trivial dynamics") {
    CoefficientModel m;
    m.initial_state = 2.5;
    const auto grid = build_grid(1.0, 64);
    const ZeroField zero;
    const auto u0 = ControlPolicy::constant(0.0);
    const auto still = simulate_forward(m, u0, zero, grid, MarkSet{}, RngSpec{1}, 10);
    for (std::size_t p = 0; p < 10; ++p) {
        CHECK(still.xi(p, 0) == 0.0);
        for (std::size_t k = 0; k < grid.nodes(); ++k) CHECK(still.x(p, k) == 2.5);
    }

    CoefficientModel ode;
    ode.drift = [](const CoefficientArgs&) { return 1.0; };
    const auto line = simulate_forward(ode, u0, zero, grid, MarkSet{}, RngSpec{1}, 3);
    for (std::size_t p = 0; p < 3; ++p) CHECK(line.x(p, grid.steps()) == 1.0);
}

TEST_CASE("cash-flow forward mean matches the mean ODE") {
    const double rho = 0.2, c = 0.1, sigma = 0.3, d = 1.0;
    CoefficientModel m;
    m.initial_state = d;
    m.drift = [=](const CoefficientArgs& a) { return rho * a.v - c * a.x; };
    m.diffusion = [=](const CoefficientArgs& a) { return sigma * a.v; };
    const auto grid = build_grid(1.0, 200);
    const auto s = simulate_summary(m, ControlPolicy::constant(1.0), ZeroField{}, grid, MarkSet{}, RngSpec{5}, 20000);
    const double exact = rho / c + (d - rho / c) * std::exp(-c);
    const auto est = mc_estimate(s.x_terminal);
    CHECK(std::abs(est.mean - exact) <= 3.0 * est.se);
}

TEST_CASE("compensated jumps have zero mean") {
    CoefficientModel m;
    m.jump = [](const CoefficientArgs&, std::size_t, double) { return 0.8; };
    const std::vector<double> mk{1.0}, w{2.0};
    const auto marks = validate_mark_set(mk, w);
    const auto s = simulate_summary(m, ControlPolicy::constant(0.0), ZeroField{}, build_grid(1.0, 20), marks,
                                    RngSpec{9}, 100000);
    const auto est = mc_estimate(s.x_terminal);
    CHECK(std::abs(est.mean) <= 3.0 * est.se);
    CHECK(est.se > 0.0);
}

TEST_CASE("jump-free run equals a pure Brownian reference") {
    const double mu = 0.05, vol = 0.4;
    CoefficientModel m;
    m.initial_state = 1.0;
    m.drift = [=](const CoefficientArgs& a) { return mu * a.x; };
    m.diffusion = [=](const CoefficientArgs& a) { return vol * a.x; };
    const auto grid = build_grid(1.0, 100);
    const RngSpec rng{77};
    const auto paths = simulate_forward(m, ControlPolicy::constant(0.0), ZeroField{}, grid, MarkSet{}, rng, 50);
    bool identical = true;
    for (std::size_t p = 0; p < 50; ++p) {
        auto g = path_stream(rng, p, StreamKind::brownian);
        double x = 1.0;
        for (std::size_t k = 0; k < grid.steps(); ++k) {
            const double dw = std::sqrt(grid.dt()) * g.normal();
            x = x + mu * x * grid.dt() + vol * x * dw;
            identical &= paths.x(p, k + 1) == x;
            identical &= paths.dW(p, k) == dw;
        }
    }
    CHECK(identical);
}

TEST_CASE("xi accumulates the running cost") {
    CoefficientModel m;
    m.diffusion = [](const CoefficientArgs&) { return 1.0; };
    m.running = [](const CoefficientArgs& a) { return a.x * a.x; };
    const auto grid = build_grid(1.0, 50);
    const auto paths = simulate_forward(m, ControlPolicy::constant(0.0), ZeroField{}, grid, MarkSet{}, RngSpec{3}, 40);
    for (std::size_t p = 0; p < 40; ++p) {
        for (std::size_t k = 0; k < grid.steps(); ++k) CHECK(paths.xi(p, k + 1) >= paths.xi(p, k));
    }
}

TEST_CASE("simulation is deterministic and independent of worker count") {
    CoefficientModel m;
    m.initial_state = 0.5;
    m.drift = [](const CoefficientArgs& a) { return -a.x + a.v; };
    m.diffusion = [](const CoefficientArgs&) { return 0.2; };
    m.jump = [](const CoefficientArgs& a, std::size_t, double lambda) { return lambda * (1.0 + 0.1 * a.x); };
    m.running = [](const CoefficientArgs& a) { return a.v * a.v; };
    const std::vector<double> mk{-0.3, 0.2}, w{0.7, 1.1};
    const auto marks = validate_mark_set(mk, w);
    const auto grid = build_grid(1.0, 40);
    const auto policy = ControlPolicy::feedback([](double t, double x, double, std::span<const double>) { return t - x; });
    std::vector<PathBundle> runs;
    for (std::size_t workers : {1u, 2u, 5u}) {
        WorkerGuard guard(workers);
        runs.push_back(simulate_forward(m, policy, ZeroField{}, grid, marks, RngSpec{123}, 1500));
    }
    CHECK(same_bundle(runs[0], runs[1]));
    CHECK(same_bundle(runs[0], runs[2]));
}

TEST_CASE("clamp count is exact") {
    CoefficientModel m;
    m.diffusion = [](const CoefficientArgs&) { return 1.0; };
    const auto grid = build_grid(1.0, 30);
    const auto policy = ControlPolicy::feedback([](double, double x, double, std::span<const double>) { return x; },
                                                ControlRange{-0.5, 0.5});
    const auto paths = simulate_forward(m, policy, ZeroField{}, grid, MarkSet{}, RngSpec{8}, 300);
    std::size_t expected = 0;
    for (std::size_t p = 0; p < 300; ++p) {
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
            expected += std::abs(paths.x(p, k)) > 0.5;
            CHECK(policy.range().contains(paths.u(p, k)));
        }
    }
    CHECK(paths.clamp_count() == expected);
    CHECK(expected > 0);
}

TEST_CASE("non-finite state reports path and node") {
    CoefficientModel m;
    m.drift = [](const CoefficientArgs& a) { return a.x > 0.5 ? std::nan("") : 1.0; };
    try {
        simulate_forward(m, ControlPolicy::constant(0.0), ZeroField{}, build_grid(1.0, 10), MarkSet{}, RngSpec{1}, 2);
        FAIL("expected a simulation error");
    } catch (const SimulationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("path 0") != std::string::npos);
        CHECK(msg.find("node 6") != std::string::npos);
        CHECK(msg.find("b") != std::string::npos);
    }
}

TEST_CASE("path dump csv layout") {
    CoefficientModel m;
    const std::vector<double> mk{0.1}, w{1.0};
    const auto paths = simulate_forward(m, ControlPolicy::constant(0.0), ZeroField{}, build_grid(1.0, 3),
                                        validate_mark_set(mk, w), RngSpec{1}, 4);
    std::ostringstream out;
    write_paths_csv(paths, out, 2);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "path,k,t,x,y,z,r_0,xi,u");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2 * 4);
}

TEST_CASE("continuation honours the starting state at every node") {
    CoefficientModel m;
    m.initial_state = -3.0;
    m.drift = [](const CoefficientArgs&) { return 1.0; };
    m.running = [](const CoefficientArgs&) { return 2.0; };
    const auto grid = build_grid(1.0, 4);
    for (std::size_t start : {0ul, 2ul}) {
        const auto s = simulate_summary_from(m, ControlPolicy::constant(0.0), ZeroField{}, grid, {}, RngSpec{1}, 3,
                                             start, 5.0, 0.5);
        const double left = 1.0 - grid.time(start);
        CHECK(s.x_terminal[0] == doctest::Approx(5.0 + left).epsilon(1e-15));
        CHECK(s.xi_terminal[2] == doctest::Approx(0.5 + 2.0 * left).epsilon(1e-15));
    }
}
