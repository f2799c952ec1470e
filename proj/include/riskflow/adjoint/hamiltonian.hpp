#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "riskflow/core/coefficient_model.hpp"
#include "riskflow/core/control_policy.hpp"

namespace riskflow {

/// Transformed adjoints and the (l, L) companion at one node of one path.
struct AdjointSlice {
    double p2 = 0.0;
    double q2 = 0.0;
    double p3 = 0.0;
    std::vector<double> pi2;  // per mark
    double l = 0.0;
    std::vector<double> L;    // per mark
};

/// Sign in front of θ·l·z in H^θ. The Lemma display carries −θlz, the closing display of its proof +θlz.
enum class ZlSign : int { minus = -1, plus = 1 };

struct HamiltonianInput {
    StatePoint state;
    double v = 0.0;
    AdjointSlice adjoint;
    double theta = 1.0;
    std::vector<double> weights;  // mark intensities w_i
    std::vector<double> marks;    // mark values λ_i
};

/**
 * H^θ = f + b·p̃₂ + σ·q̃₂ + (g ∓ θlz)·p̃₃ + Σ_i w_i[γ(λ_i)·π̃₂ᵢ − (g − θLᵢrᵢ)·p̃₃]
 */
double hamiltonian(const HamiltonianInput& in, const CoefficientModel& model, ZlSign zl = ZlSign::minus);

/// ∂H^θ/∂v with adjoints held fixed, through the model's partials.
double hamiltonian_v(const HamiltonianInput& in, const CoefficientModel& model);

/// H^θ(v_alt) − H^θ(v) with state and adjoints fixed; v_alt must lie in U.
double hamiltonian_control_gap(const HamiltonianInput& in, const CoefficientModel& model, double v_alt,
                               const ControlRange& range = {}, ZlSign zl = ZlSign::minus);

/// Gaps over an evenly spaced grid of alternative controls.
struct GapScan {
    std::vector<double> v_alt;
    std::vector<double> gaps;
    double max_gap = 0.0;
    double min_second_difference = 0.0;
    double max_second_difference = 0.0;
};

GapScan scan_control_gap(const HamiltonianInput& in, const CoefficientModel& model, double lo, double hi,
                         std::size_t points, ZlSign zl = ZlSign::minus);

/// Serialized verdict of one optimality condition.
struct ConditionVerdict {
    std::string condition;  // "necessary" | "sufficient"
    std::string verdict;
    double worst_gap = 0.0;
    std::string worst_location;
    std::vector<std::string> warnings;
};

}  // namespace riskflow
