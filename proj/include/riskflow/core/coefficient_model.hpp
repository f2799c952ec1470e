#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace riskflow {

/// Owning snapshot of (t, x, y, z, r) used for reporting and Hamiltonian inputs.
struct StatePoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    std::vector<double> r;  // one entry per mark
};

/// Non-owning evaluation arguments; `r` has one entry per mark.
struct CoefficientArgs {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    std::span<const double> r;
    double v = 0.0;
};

CoefficientArgs args_at(const StatePoint& state, double v);

enum class Coefficient { b, sigma, gamma, g, f, terminal_x, terminal_y };
enum class Variable { x, y, z, r, v };

const char* to_string(Coefficient c) noexcept;
const char* to_string(Variable v) noexcept;

/// Differentiation target; `index` selects r_i when `var == Variable::r`.
struct Wrt {
    Variable var = Variable::x;
    std::size_t index = 0;
};

using ScalarFn = std::function<double(const CoefficientArgs&)>;
/// γ(t−, x, y, z, r(·, λ_i), v, λ_i): receives the mark index and its value.
using JumpFn = std::function<double(const CoefficientArgs&, std::size_t mark, double lambda)>;
using TerminalFn = std::function<double(double)>;
/// Optional analytic partials; returning nullopt falls back to finite differences.
using AnalyticPartialFn =
    std::function<std::optional<double>(Coefficient, Wrt, const CoefficientArgs&, std::size_t mark, double lambda)>;

/**
 * @brief Evaluatable coefficients of the controlled forward-backward system.
 *
 * Forward:  dx = b dt + σ dW + Σ_i γ(λ_i) dÑ_i,  x(0) = d
 * Backward: dy = −g dt + z dW + Σ_i r_i dÑ_i,     y(T) = a
 * Cost:     Θ_T = Φ(x_T) + Ψ(y_0) + ∫ f dt
 *
 * Every evaluator must be pure: models are shared read-only across worker threads.
 * Empty evaluators are treated as identically zero.
 */
struct CoefficientModel {
    std::string name = "model";

    ScalarFn drift;       // b
    ScalarFn diffusion;   // σ
    JumpFn jump;          // γ
    ScalarFn driver;      // g
    ScalarFn running;     // f
    TerminalFn terminal_x;  // Φ
    TerminalFn terminal_y;  // Ψ

    AnalyticPartialFn analytic;

    /// Declared bound C with |f|, |Φ|, |Ψ| ≤ C; nullopt means unbounded.
    std::optional<double> bound;
    /// Declared Lipschitz constant of (b, σ, −g); used only for reporting.
    std::optional<double> lipschitz;

    double initial_state = 0.0;    // d
    double terminal_value = 0.0;   // a
};

/// Evaluate one coefficient; throws EvaluationError naming it if the result is NaN.
double evaluate(const CoefficientModel& model, Coefficient which, const CoefficientArgs& at,
                std::size_t mark = 0, double lambda = 0.0);

struct PartialResult {
    double value = 0.0;
    bool analytic = false;
};

/**
 * Partial derivative of one coefficient. Uses the model's analytic hook when it
 * answers, otherwise a central difference with step cbrt(eps)·max(1, |arg|).
 */
PartialResult partial(const CoefficientModel& model, Coefficient which, Wrt wrt, const CoefficientArgs& at,
                      std::size_t mark = 0, double lambda = 0.0);

}  // namespace riskflow
