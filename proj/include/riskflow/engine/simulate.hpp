#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "riskflow/core/coefficient_model.hpp"
#include "riskflow/core/control_policy.hpp"
#include "riskflow/core/mark_set.hpp"
#include "riskflow/core/time_grid.hpp"
#include "riskflow/engine/backward_field.hpp"
#include "riskflow/engine/path_bundle.hpp"
#include "riskflow/engine/rng.hpp"

namespace riskflow {

/**
 * Euler–Maruyama simulation of the forward line and the auxiliary process ξ.
 *
 * Coefficients are frozen at the left node; every jump in (t_k, t_{k+1}] adds
 * γ(t_k, ·, λ_i) and the step subtracts dt·Σ_i w_i γ(λ_i). (y, z, r) come from `field`.
 */
PathBundle simulate_forward(const CoefficientModel& model, const ControlPolicy& policy, const BackwardField& field,
                            const TimeGrid& grid, const MarkSet& marks, const RngSpec& rng, std::size_t n_paths);

/// Integrand accumulated alongside the forward step as Σ aux(args_k)·dt.
using AuxIntegrand = std::function<double(const CoefficientArgs&)>;

/// Terminal values only, for large path counts.
struct PathSummary {
    std::vector<double> x_terminal;
    std::vector<double> xi_terminal;
    std::vector<double> aux;
    std::size_t clamp_count = 0;
};

/// Same scheme and random draws as simulate_forward, keeping only terminal values.
PathSummary simulate_summary(const CoefficientModel& model, const ControlPolicy& policy, const BackwardField& field,
                             const TimeGrid& grid, const MarkSet& marks, const RngSpec& rng, std::size_t n_paths,
                             const AuxIntegrand& aux = {});

/**
 * Continuation from (t_k, x, ξ) at node `start_node` to T, one fresh path per
 * substream of `rng`. Jumps at or before t_k are discarded.
 */
PathSummary simulate_summary_from(const CoefficientModel& model, const ControlPolicy& policy,
                                  const BackwardField& field, const TimeGrid& grid, const MarkSet& marks,
                                  const RngSpec& rng, std::size_t n_paths, std::size_t start_node, double x_start,
                                  double xi_start, const AuxIntegrand& aux = {});

}  // namespace riskflow
