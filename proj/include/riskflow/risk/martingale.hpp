#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "riskflow/core/coefficient_model.hpp"
#include "riskflow/core/control_policy.hpp"
#include "riskflow/engine/backward_field.hpp"
#include "riskflow/engine/path_bundle.hpp"
#include "riskflow/engine/statistics.hpp"
#include "riskflow/fbsde/regression.hpp"

namespace riskflow {

/// Bounds e^{∓(2+T)Cθ} of A_T^θ and V^θ when |f|, |Φ|, |Ψ| ≤ C.
struct VBounds {
    double lower = 0.0;
    double upper = 0.0;
};

VBounds v_bounds(double bound_c, double horizon, double theta);

struct VThetaEstimate {
    std::vector<double> values;    // per path
    std::size_t projected = 0;     // values moved onto the declared bounds
    double condition = 1.0;
};

/**
 * Regression estimate of V^θ(t_k) = E[A_T^θ | F_k] on the (x_k, ξ_k) basis.
 * At k = N the values are A_T^θ exactly. When the model declares a bound C the
 * estimates are projected onto [e^{−(2+T)Cθ}, e^{(2+T)Cθ}] and the count is reported.
 */
VThetaEstimate v_theta(const PathBundle& paths, const CoefficientModel& model, double theta, std::size_t k,
                       const RegressionBasis& basis = {});

struct NestedOptions {
    std::size_t n_inner = 1000;
    /// Also estimate ∂Λ/∂x at each node by central differences with common inner draws.
    bool gradient = false;
    double gradient_step = 1e-3;
};

/// Nested Monte Carlo V^θ and Λ^θ = (1/θ)·log V^θ − ξ on the first `n_outer` paths.
struct NestedLambda {
    std::size_t n_outer = 0;
    std::size_t nodes = 0;
    std::vector<double> v;         // n_outer × nodes
    std::vector<double> lambda;    // n_outer × nodes
    std::vector<double> lambda_x;  // n_outer × nodes when gradient was requested

    double v_at(std::size_t p, std::size_t k) const { return v[p * nodes + k]; }
    double lambda_at(std::size_t p, std::size_t k) const { return lambda[p * nodes + k]; }
    double lambda_x_at(std::size_t p, std::size_t k) const { return lambda_x[p * nodes + k]; }
};

NestedLambda nested_lambda(const PathBundle& outer, std::size_t n_outer, const CoefficientModel& model,
                           const ControlPolicy& policy, const BackwardField& field, const RngSpec& inner_rng,
                           double theta, const NestedOptions& options = {});

/// l(p, k) and L(p, k, i) along the paths of a bundle.
using PathFn = std::function<double(std::size_t p, std::size_t k)>;
using PathMarkFn = std::function<double(std::size_t p, std::size_t k, std::size_t mark)>;

/**
 * @brief Discrete Girsanov density and the shifted drivers.
 *
 * log L^θ accumulates θlΔW − θ²l²dt/2 per step; each jump of mark i multiplies by
 * (1 + θL_i) and the step carries the compensator e^{−θ Σ w_i L_i dt}.
 */
struct GirsanovPaths {
    std::size_t n_paths = 0;
    std::size_t nodes = 0;
    std::size_t n_marks = 0;
    std::vector<double> density;   // n_paths × nodes
    std::vector<double> dW_theta;  // ΔW − θ l dt, n_paths × steps
    std::vector<double> dN_theta;  // ΔN − w(1 + θL)dt, n_paths × steps × marks

    double at(std::size_t p, std::size_t k) const { return density[p * nodes + k]; }
    std::vector<double> terminal() const;
};

GirsanovPaths girsanov_density(const PathBundle& paths, double theta, const PathFn& l, const PathMarkFn& L = {});

struct QuadraticResidual {
    std::vector<Estimate> per_node;  // steps entries
    Estimate terminal_mismatch;      // |Λ(T) − (Φ(x_T) + Ψ(y_0))|
    Estimate terminal_mismatch_phi_x;  // |Λ(T) − (Φ_x(x_T) + Ψ(y_0))|
};

/**
 * Per-node residual of
 *   dΛ = −{f + θ|l|²/2 + θ/2 Σ w L² + Σ w((e^{θr} − 1)/θ − r)}dt + l dW
 *        − Σ (e^{θr} − 1)/θ dÑ + Σ L dÑ
 * over the first `n_outer` paths; f·dt is read from the increments of ξ.
 * `lambda` is n_outer × nodes. Empty `L` or `r` mean zero.
 */
QuadraticResidual quadratic_generator_residual(const PathBundle& paths, std::span<const double> lambda,
                                               std::size_t n_outer, const CoefficientModel& model, double theta,
                                               const PathFn& l, const PathMarkFn& L = {},
                                               const PathMarkFn& r = {});

}  // namespace riskflow
