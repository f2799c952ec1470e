#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "riskflow/core/coefficient_model.hpp"
#include "riskflow/core/control_policy.hpp"
#include "riskflow/core/errors.hpp"
#include "riskflow/engine/backward_field.hpp"
#include "riskflow/engine/path_bundle.hpp"
#include "riskflow/engine/statistics.hpp"
#include "riskflow/fbsde/regression.hpp"

namespace riskflow {

/// Per-node regression fits: y_fits[k] predicts y_k, zr_fits[k] predicts (z_k, r_k[0..M)).
struct BackwardFit {
    std::vector<NodeFit> y_fits;
    std::vector<NodeFit> zr_fits;
};

/// Decoupling field read off a backward fit.
class RegressionField final : public BackwardField {
public:
    explicit RegressionField(std::shared_ptr<const BackwardFit> fit) : fit_(std::move(fit)) {}
    void evaluate(std::size_t k, double x, double xi, double& y, double& z, std::span<double> r) const override;

private:
    std::shared_ptr<const BackwardFit> fit_;
};

struct BackwardReport {
    std::size_t basis_dimension = 0;
    std::vector<double> condition_numbers;  // per node 0..N−1, worst of the two fits
    double max_condition = 0.0;
    double y0 = 0.0;            // regression value at t = 0
    Estimate y0_pathwise;       // mean of a + Σ g·dt with its standard error
};

struct BackwardSolution {
    std::shared_ptr<const BackwardFit> fit;
    BackwardReport report;
};

/**
 * Least-squares Monte Carlo backward induction. Fills y, z, r of `paths`:
 * z_k, r_k from regressions of y_{k+1}·ΔW_k/dt and y_{k+1}·ΔÑ_k(i)/(w_i·dt),
 * then y_k from a regression of y_{k+1} + g(t_k, x_k, y_{k+1}, z_k, r_k, u_k)·dt
 * with the martingale increment z_k·ΔW_k + Σ r_k(i)·ΔÑ_k(i) subtracted as a control variate.
 */
BackwardSolution solve_backward(const CoefficientModel& model, PathBundle& paths, double terminal,
                                const RegressionBasis& basis = {});

/// Overwrite y, z, r of `paths` with the field's values at the stored (x, ξ).
void apply_field(const BackwardField& field, PathBundle& paths);

/// Per-node estimate of y_{k+1} − y_k + g·dt − z_k·ΔW_k − Σ r_k(i)·ΔÑ_k(i).
std::vector<Estimate> martingale_residuals(const CoefficientModel& model, const PathBundle& paths);

struct PicardOptions {
    std::size_t max_iter = 10;
    double tol = 1e-3;
    double damping = 1.0;
    RegressionBasis basis;
};

/// Deltas are listed from the second iteration on: delta[j] compares iterations j+2 and j+1.
struct CouplingReport {
    std::size_t iterations = 0;
    std::vector<double> delta_x;
    std::vector<double> delta_y;
    std::vector<double> delta_z;
    std::vector<double> delta;
    bool converged = false;
    double tol = 0.0;
};

class CouplingError : public SolverError {
public:
    CouplingError(const std::string& message, CouplingReport report)
        : SolverError("fbsde_solver", message), report_(std::move(report)) {}
    const CouplingReport& report() const noexcept { return report_; }

private:
    CouplingReport report_;
};

struct CoupledSolution {
    PathBundle paths;
    CouplingReport report;
    BackwardSolution backward;
};

/**
 * Picard iteration: forward simulation under the previous decoupling field, then
 * backward regression, until the sup-node mean-square change of (x, y, z) is ≤ tol.
 * All iterations reuse the same random draws. Throws CouplingError when the change
 * grows three iterations in a row.
 */
CoupledSolution picard_couple(const CoefficientModel& model, const ControlPolicy& policy, const TimeGrid& grid,
                              const MarkSet& marks, const RngSpec& rng, std::size_t n_paths,
                              const PicardOptions& options = {});

}  // namespace riskflow
