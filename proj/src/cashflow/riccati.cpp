#include "riskflow/cashflow/riccati.hpp"

#include <cmath>
#include <sstream>

#include "riskflow/core/errors.hpp"
#include "riskflow/core/risk_params.hpp"

namespace riskflow::cashflow {

namespace {

constexpr const char* kModule = "cashflow_example";

double orientation_sign(const Params& p) { return p.orientation == RiccatiOrientation::explicit_form ? 1.0 : -1.0; }

double rate_a(const Params& p, double t) {
    const double k = kappa(p, t);
    return 2.0 * p.c + k * k / g_of_t(p, t);
}

double rate_b(const Params& p, double t) {
    const double k = kappa(p, t);
    return p.c + k * k / g_of_t(p, t);
}

/// Simpson on [t0, t1] with two panels.
template <class F>
double simpson(F&& f, double t0, double t1) {
    return (t1 - t0) / 6.0 * (f(t0) + 4.0 * f(0.5 * (t0 + t1)) + f(t1));
}

double checked(double v, const char* what, double t) {
    if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << what << " is not finite at t = " << t;
        throw NumericError(kModule, msg.str());
    }
    return v;
}

double half_time(const TimeGrid& grid, std::size_t j) {
    return j == 2 * grid.steps() ? grid.horizon() : 0.5 * static_cast<double>(j) * grid.dt();
}

/// Cubic Hermite midpoint from end values and derivatives.
double hermite_mid(double y0, double y1, double d0, double d1, double h) {
    return 0.5 * (y0 + y1) + h * (d0 - d1) / 8.0;
}

/// Derivative of a node trajectory: central inside, second-order one-sided at the ends.
double node_derivative(const std::vector<double>& v, std::size_t k, double dt) {
    const std::size_t n = v.size() - 1;
    if (k == 0) return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
    if (k == n) return (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * dt);
    return (v[k + 1] - v[k - 1]) / (2.0 * dt);
}

}  // namespace

MarkSet Params::mark_set() const { return validate_mark_set(marks, weights); }

double g_of_t(const Params& p, double t) {
    double g = p.sigma * p.sigma;
    for (std::size_t i = 0; i < p.weights.size(); ++i) g -= p.weights[i] * std::pow(1.0 + p.r_at(t, i), 2);
    return g;
}

double kappa(const Params& p, double t) {
    double k = p.rho + p.sigma * p.theta * p.l_at(t);
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        k += p.weights[i] * (1.0 + p.r_at(t, i)) * p.theta * p.L_at(t, i);
    }
    return k;
}

void validate(const Params& p, const TimeGrid& grid) {
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) {
        throw ConfigurationError(kModule, "sigma must be positive, got " + std::to_string(p.sigma));
    }
    validate_theta(p.theta, kModule);
    (void)p.mark_set();
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const double t = grid.time(k);
        const double g = g_of_t(p, t);
        if (!(std::abs(g) >= 1e-8)) {
            std::ostringstream msg;
            msg << "G(t) = sigma^2 - sum w(1+r)^2 vanishes at t = " << t << " (G = " << g
                << "); the feedback law divides by G";
            throw ConfigurationError(kModule, msg.str());
        }
        if (g < 0.0) {
            std::ostringstream msg;
            msg << "G(t) is negative at t = " << t << " (G = " << g << "): jump second moment exceeds sigma^2";
            throw ConfigurationError(kModule, msg.str());
        }
    }
}

std::vector<double> a_half_nodes(const Params& p, const TimeGrid& grid) {
    const std::size_t m = 2 * grid.steps();
    const double sgn = orientation_sign(p);
    std::vector<double> out(m + 1);
    double integral = 0.0;
    out[m] = p.theta;
    for (std::size_t j = m; j-- > 0;) {
        const double t0 = half_time(grid, j), t1 = half_time(grid, j + 1);
        integral += simpson([&](double t) { return rate_a(p, t); }, t0, t1);
        out[j] = checked(p.theta * std::exp(sgn * integral), "A", t0);
    }
    return out;
}

Trajectory solve_A(const Params& p, const TimeGrid& grid, RiccatiMethod method) {
    Trajectory out;
    out.steps = grid.steps();
    const std::size_t n = grid.steps();
    if (method == RiccatiMethod::closed_form) {
        out.method = "closed_form";
        const auto half = a_half_nodes(p, grid);
        out.values.resize(n + 1);
        for (std::size_t k = 0; k <= n; ++k) out.values[k] = half[2 * k];
        return out;
    }
    out.method = "rk4";
    const double sgn = orientation_sign(p);
    const double h = -grid.dt();
    auto rhs = [&](double t, double a) { return -sgn * rate_a(p, t) * a; };
    out.values.assign(n + 1, 0.0);
    out.values[n] = p.theta;
    for (std::size_t k = n; k-- > 0;) {
        const double t = grid.time(k + 1), a = out.values[k + 1];
        const double k1 = rhs(t, a);
        const double k2 = rhs(t + 0.5 * h, a + 0.5 * h * k1);
        const double k3 = rhs(t + 0.5 * h, a + 0.5 * h * k2);
        const double k4 = rhs(grid.time(k), a + h * k3);
        out.values[k] = checked(a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), "A", grid.time(k));
    }
    return out;
}

PsiPhi solve_psi_phi(const Params& p, const TimeGrid& grid, double y0) {
    const auto a_half = a_half_nodes(p, grid);
    const std::size_t n = grid.steps();
    const double dt = grid.dt();
    const double lambda = p.disc_rate, s2 = p.sigma * p.sigma, th2 = p.theta * p.theta;
    // Right-hand side at half-node index j.
    auto rhs = [&](std::size_t j, double psi, double phi, double& dpsi, double& dphi) {
        const double t = half_time(grid, j);
        const double l2 = std::pow(p.l_at(t), 2);
        dpsi = p.rho * p.rho * psi * psi - (2.0 * lambda * s2 * a_half[j] - th2 * l2) * psi;
        dphi = (p.rho * psi + th2 * l2 - lambda) * phi + p.K_at(t);
    };
    PsiPhi out;
    out.psi.assign(n + 1, 0.0);
    out.phi.assign(n + 1, 0.0);
    const bool forward = p.psi_boundary == PsiBoundary::initial;
    const std::size_t start = forward ? 0 : n;
    out.psi[start] = p.theta;
    out.phi[start] = 1.0 - p.theta * (y0 - p.a);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t k = forward ? s : n - s;
        const std::size_t next = forward ? k + 1 : k - 1;
        const double h = forward ? dt : -dt;
        const std::size_t j0 = 2 * k, jm = forward ? 2 * k + 1 : 2 * k - 1, j1 = 2 * next;
        const double y1 = out.psi[k], f1 = out.phi[k];
        double a1, b1, a2, b2, a3, b3, a4, b4;
        rhs(j0, y1, f1, a1, b1);
        rhs(jm, y1 + 0.5 * h * a1, f1 + 0.5 * h * b1, a2, b2);
        rhs(jm, y1 + 0.5 * h * a2, f1 + 0.5 * h * b2, a3, b3);
        rhs(j1, y1 + h * a3, f1 + h * b3, a4, b4);
        out.psi[next] = y1 + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        out.phi[next] = f1 + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        if (!(std::abs(out.psi[next]) <= 1e12) || !std::isfinite(out.phi[next])) {
            std::ostringstream msg;
            msg << "Riccati blow-up of psi at t = " << grid.time(next) << " (psi = " << out.psi[next] << ")";
            throw NumericError(kModule, msg.str());
        }
    }
    out.psi_half.assign(2 * n + 1, 0.0);
    out.phi_half.assign(2 * n + 1, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
        out.psi_half[2 * k] = out.psi[k];
        out.phi_half[2 * k] = out.phi[k];
    }
    for (std::size_t k = 0; k < n; ++k) {
        double dp0, df0, dp1, df1;
        rhs(2 * k, out.psi[k], out.phi[k], dp0, df0);
        rhs(2 * k + 2, out.psi[k + 1], out.phi[k + 1], dp1, df1);
        out.psi_half[2 * k + 1] = hermite_mid(out.psi[k], out.psi[k + 1], dp0, dp1, dt);
        out.phi_half[2 * k + 1] = hermite_mid(out.phi[k], out.phi[k + 1], df0, df1, dt);
    }
    return out;
}

Trajectory solve_B(const Params& p, const TimeGrid& grid, double y0, const std::vector<double>& p3_half,
                   RiccatiMethod method) {
    const std::size_t n = grid.steps();
    if (p3_half.size() != 2 * n + 1) throw UsageError(kModule, "p3 source must be given on the half nodes");
    const double sgn = orientation_sign(p);
    Trajectory out;
    out.steps = n;
    out.values.assign(n + 1, 0.0);
    out.values[n] = 1.0 - p.theta * (y0 + p.a);
    if (method == RiccatiMethod::rk4) {
        out.method = "rk4";
        const double h = -grid.dt();
        auto rhs = [&](std::size_t j, double b) {
            return -sgn * (rate_b(p, half_time(grid, j)) * b + p.c * p3_half[j]);
        };
        for (std::size_t k = n; k-- > 0;) {
            const double b = out.values[k + 1];
            const double k1 = rhs(2 * k + 2, b);
            const double k2 = rhs(2 * k + 1, b + 0.5 * h * k1);
            const double k3 = rhs(2 * k + 1, b + 0.5 * h * k2);
            const double k4 = rhs(2 * k, b + h * k3);
            out.values[k] = checked(b + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), "B", grid.time(k));
        }
        return out;
    }
    out.method = "closed_form";
    auto rb = [&](double t) { return rate_b(p, t); };
    for (std::size_t k = n; k-- > 0;) {
        const double t0 = grid.time(k), tm = half_time(grid, 2 * k + 1), t1 = grid.time(k + 1);
        const double first = simpson(rb, t0, tm), second = simpson(rb, tm, t1);
        const double grow_mid = std::exp(sgn * first), grow = std::exp(sgn * (first + second));
        const double source = (t1 - t0) / 6.0 *
                              (p3_half[2 * k] + 4.0 * grow_mid * p3_half[2 * k + 1] + grow * p3_half[2 * k + 2]);
        out.values[k] = checked(grow * out.values[k + 1] + sgn * p.c * source, "B", t0);
    }
    return out;
}

Riccati solve_riccati(const Params& p, const TimeGrid& grid, double y0, const std::vector<double>& ybar,
                      RiccatiMethod method) {
    validate(p, grid);
    const std::size_t n = grid.steps();
    if (ybar.size() != n + 1) throw UsageError(kModule, "mean backward trajectory must be given on the nodes");
    Riccati s;
    s.y0 = y0;
    s.ybar = ybar;
    s.A = solve_A(p, grid, method);
    for (double a : s.A.values) {
        if (!(a * p.theta > 0.0)) throw NumericError(kModule, "A lost the sign of theta");
    }
    s.psi_phi = solve_psi_phi(p, grid, y0);
    std::vector<double> p3_half(2 * n + 1);
    for (std::size_t j = 0; j <= 2 * n; ++j) {
        const double yb = j % 2 == 0 ? ybar[j / 2] : 0.5 * (ybar[j / 2] + ybar[j / 2 + 1]);
        p3_half[j] = s.psi_phi.psi_half[j] * yb + s.psi_phi.phi_half[j];
    }
    s.B = solve_B(p, grid, y0, p3_half, method);
    s.B_closed = solve_B(p, grid, y0, p3_half,
                         method == RiccatiMethod::rk4 ? RiccatiMethod::closed_form : RiccatiMethod::rk4);
    for (std::size_t k = 0; k <= n; ++k) {
        s.max_B_mismatch = std::max(s.max_B_mismatch, std::abs(s.B.values[k] - s.B_closed.values[k]));
    }
    return s;
}

double feedback(const Params& p, const Riccati& s, const TimeGrid& grid, std::size_t k, double x, double y) {
    const double t = grid.time(k);
    const double A = s.A.values[k], B = s.B.values[k];
    const double p3 = s.psi_phi.psi[k] * y + s.psi_phi.phi[k];
    return -(kappa(p, t) * (A * x + B) + p.rho * p3) / (A * g_of_t(p, t));
}

double feedback_u02(const Params& p, const Riccati& s, const TimeGrid& grid, std::size_t k, double x, double y) {
    const double dt = grid.dt();
    const double A = s.A.values[k], B = s.B.values[k];
    const double dA = node_derivative(s.A.values, k, dt), dB = node_derivative(s.B.values, k, dt);
    const double p3 = s.psi_phi.psi[k] * y + s.psi_phi.phi[k];
    return -(dA * x - 2.0 * p.c * A * x - p.c * B + dB - p.c * p3) / (A * kappa(p, grid.time(k)));
}

}  // namespace riskflow::cashflow
