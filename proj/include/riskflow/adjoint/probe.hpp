#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "riskflow/adjoint/hamiltonian.hpp"
#include "riskflow/core/control_policy.hpp"
#include "riskflow/engine/statistics.hpp"
#include "riskflow/risk/cost.hpp"

namespace riskflow {

/// Randomized midpoint test f((a+b)/2) ≤ (f(a) + f(b))/2 on a box.
struct ConvexityReport {
    std::string name;
    std::size_t probes = 0;
    std::size_t violations = 0;
    double worst_excess = 0.0;  // largest f(mid) − (f(a) + f(b))/2, scaled by 1 + |average|
    bool convex = true;
};

using VectorFn = std::function<double(std::span<const double>)>;

ConvexityReport midpoint_convexity(const std::string& name, const VectorFn& fn, std::span<const double> lo,
                                   std::span<const double> hi, std::size_t probes = 1000, std::uint64_t seed = 1,
                                   double tolerance = 1e-9);

struct PerturbationDirection {
    std::string name;
    std::function<double(double t, double x)> fn;  // empty means the constant 1
};

/// Θ_T samples of one policy. The sampler must reuse its random draws across calls.
using CostSampler = std::function<std::vector<double>(const ControlPolicy&)>;

struct ProbeCell {
    std::string direction;
    double epsilon = 0.0;
    CostEstimate cost;
    /// Paired J^θ(u_ε) − J^θ(u) in units of J^θ(u).
    Estimate relative_margin;
    bool consistent = true;   // margin ≥ −3·SE
    bool improving = false;   // margin < −3·SE
};

struct SufficientProbe {
    CostEstimate baseline;
    std::vector<ProbeCell> cells;
    ConditionVerdict verdict;
    bool consistent = true;
    bool improving_found = false;
};

/**
 * J^θ(u + ε·dir) against J^θ(u) under common random numbers. The verdict is
 * "consistent with optimality" iff every cell has J^θ(u) ≤ J^θ(u_ε) + 3·SE.
 * Failed convexity reports are attached as warnings.
 */
SufficientProbe sufficient_condition_probe(const ControlPolicy& policy,
                                           const std::vector<PerturbationDirection>& directions,
                                           const std::vector<double>& epsilons, double theta,
                                           const CostSampler& sampler,
                                           const std::vector<ConvexityReport>& hypotheses = {});

}  // namespace riskflow
