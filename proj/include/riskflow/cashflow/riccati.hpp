#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "riskflow/core/mark_set.hpp"
#include "riskflow/core/time_grid.hpp"

namespace riskflow::cashflow {

/// Direction of the exponent in A and B. `explicit_form` integrates A' = −(2c + κ²/G)A so that
/// A(t) = θ·exp ∫_t^T (2c + κ²/G); `printed_ode` integrates A' = +(2c + κ²/G)A.
enum class RiccatiOrientation { explicit_form, printed_ode };
enum class RiccatiMethod { closed_form, rk4 };
/// Where ψ = θ and φ = 1 − θ(y₀ − a) are imposed.
enum class PsiBoundary { initial, terminal };

/**
 * @brief Mean-variance cash-flow model.
 *
 * dx = (ρv − cx)dt + σv dW + Σ_i v(1 + r_i) dÑ_i,  x(0) = m₀
 * dy = (ρv − cx + λy)dt + z dW + Σ_i r_i dÑ_i,     y(T) = y_terminal
 */
struct Params {
    double rho = 0.2;
    double c = 0.1;
    double sigma = 0.3;
    double disc_rate = 0.05;
    double a = 1.0;
    double m0 = 1.0;
    double theta = 0.5;
    double y_terminal = 0.0;
    std::vector<double> marks;
    std::vector<double> weights;

    /// Deterministic transform inputs and jump integrand; empty means zero.
    std::function<double(double t)> l;
    std::function<double(double t, std::size_t mark)> L;
    std::function<double(double t, std::size_t mark)> r;
    std::function<double(double t)> K;

    RiccatiOrientation orientation = RiccatiOrientation::explicit_form;
    PsiBoundary psi_boundary = PsiBoundary::initial;

    MarkSet mark_set() const;
    double l_at(double t) const { return l ? l(t) : 0.0; }
    double L_at(double t, std::size_t i) const { return L ? L(t, i) : 0.0; }
    double r_at(double t, std::size_t i) const { return r ? r(t, i) : 0.0; }
    double K_at(double t) const { return K ? K(t) : 0.0; }
};

/// Rejects σ ≤ 0, θ ≤ 0, and |G| < 1e−8 or G < 0 at any node.
void validate(const Params& p, const TimeGrid& grid);

/// G(t) = σ² − Σ_i w_i(1 + r(t, λ_i))².
double g_of_t(const Params& p, double t);
/// κ(t) = ρ + σθl(t) + Σ_i w_i(1 + r(t, λ_i))θL(t, λ_i).
double kappa(const Params& p, double t);

struct Trajectory {
    std::vector<double> values;  // one per node
    std::string method;
    std::size_t steps = 0;
};

Trajectory solve_A(const Params& p, const TimeGrid& grid, RiccatiMethod method);

/// Closed-form A at the half nodes t_0, t_0 + dt/2, …, T (2N + 1 values).
std::vector<double> a_half_nodes(const Params& p, const TimeGrid& grid);

struct PsiPhi {
    std::vector<double> psi, phi;            // nodes
    std::vector<double> psi_half, phi_half;  // half nodes, 2N + 1
};

/// RK4 on ψ' = ρ²ψ² − (2λσ²A − θ²l²)ψ, φ' = (ρψ + θ²l² − λ)φ + K; blow-up |ψ| > 1e12 is a numeric error.
PsiPhi solve_psi_phi(const Params& p, const TimeGrid& grid, double y0);

/// RK4 on B' = ∓{(c + κ²/G)B + c·p̃₃} from B(T) = 1 − θ(y₀ + a). `p3_half` holds p̃₃ on half nodes.
Trajectory solve_B(const Params& p, const TimeGrid& grid, double y0, const std::vector<double>& p3_half,
                   RiccatiMethod method);

struct Riccati {
    Trajectory A, B;
    PsiPhi psi_phi;
    Trajectory B_closed;  // variation-of-constants cross-check
    double y0 = 0.0;
    std::vector<double> ybar;  // nodes
    double max_B_mismatch = 0.0;
};

/// Full pipeline for given y₀ and mean backward trajectory ȳ (nodes).
Riccati solve_riccati(const Params& p, const TimeGrid& grid, double y0, const std::vector<double>& ybar,
                      RiccatiMethod method = RiccatiMethod::closed_form);

/// u = −[κ(Ax + B) + ρ(ψy + φ)] / (A·G) at node k.
double feedback(const Params& p, const Riccati& s, const TimeGrid& grid, std::size_t k, double x, double y);

/// The alternative expression u = −[A'x − 2cAx − cB + B' − c p̃₃] / (Aκ) with A', B' from the trajectories.
double feedback_u02(const Params& p, const Riccati& s, const TimeGrid& grid, std::size_t k, double x, double y);

}  // namespace riskflow::cashflow
