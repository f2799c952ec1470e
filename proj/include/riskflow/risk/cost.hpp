#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "riskflow/core/coefficient_model.hpp"
#include "riskflow/engine/path_bundle.hpp"
#include "riskflow/engine/statistics.hpp"

namespace riskflow {

/// Θ_T = Φ(x_N) + Ψ(y_0) + ξ_N per path.
std::vector<double> theta_T(const PathBundle& paths, const CoefficientModel& model);

/// Same aggregate from terminal summaries and per-path (or a single shared) y_0.
std::vector<double> theta_T(std::span<const double> x_terminal, std::span<const double> xi_terminal,
                            std::span<const double> y0, const CoefficientModel& model);

/**
 * @brief Monte Carlo estimate of J^θ = E[exp(θΘ_T)].
 *
 * `log_J` is always computed by log-sum-exp. `linear` holds the direct estimate
 * with its interval when exp(θΘ_T) is finite for every sample.
 */
struct CostEstimate {
    double theta = 0.0;
    double log_J = 0.0;
    double log_se = 0.0;       // delta-method SE of log J
    bool linear_finite = false;
    Estimate linear;           // valid only if linear_finite
    double max_theta_T = 0.0;

    double J() const;
};

CostEstimate cost_J_theta(std::span<const double> theta_T, double theta);

/// Certainty equivalent Θ_θ = (1/θ)·log mean exp(θΘ_T) with delta-method SE.
struct RiskLoss {
    double value = 0.0;
    double se = 0.0;
};

RiskLoss risk_loss(std::span<const double> theta_T, double theta);

struct ExpansionResult {
    std::vector<double> thetas;
    std::vector<double> residuals;  // Θ_θ − (mean + θ/2·variance)
    double slope = 0.0;             // least-squares slope of log|residual| against log θ
    bool degenerate = false;        // zero variance or a zero residual: slope undefined
};

/// Residuals of the small-θ expansion for the empirical law of the samples (population variance).
ExpansionResult expansion_residual(std::span<const double> theta_T, std::span<const double> thetas);

/// Residuals given closed-form losses Θ_θ at each θ together with the exact mean and variance.
ExpansionResult expansion_residual(std::span<const double> losses, std::span<const double> thetas, double mean,
                                   double variance);

}  // namespace riskflow
