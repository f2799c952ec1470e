#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "riskflow/adjoint/hamiltonian.hpp"
#include "riskflow/engine/path_bundle.hpp"

namespace riskflow {

/**
 * @brief Transformed adjoints (p̃₂, q̃₂, π̃₂, p̃₃) on a path bundle, with the
 * (V^θ, l, L) companion and optional raw-scale adjoints p⃗ = θV^θ·p̃.
 */
struct AdjointBundle {
    std::size_t n_paths = 0;
    std::size_t nodes = 0;
    std::size_t n_marks = 0;
    double theta = 1.0;

    std::vector<double> p2, q2, p3;  // n_paths × nodes
    std::vector<double> pi2;         // n_paths × nodes × marks
    std::vector<double> l;           // nodes
    std::vector<double> L;           // nodes × marks

    std::vector<double> v_theta;     // n_paths × nodes, empty until attached
    std::vector<double> raw_p2, raw_p3;  // θV^θ·p̃, empty until reconstructed

    std::size_t at(std::size_t p, std::size_t k) const { return p * nodes + k; }
    AdjointSlice slice(std::size_t p, std::size_t k) const;

    /// p̃₁ ≡ 1 under the transform.
    static constexpr double p1_tilde() { return 1.0; }

    /// Attach V^θ (n_paths × nodes) and fill raw_p2, raw_p3.
    void reconstruct_raw(std::vector<double> v);
    /// max over nodes of |p̃ − p⃗/(θV^θ)| for p̃₂ and p̃₃; requires reconstruct_raw.
    double transform_identity_error() const;
};

/// Deterministic inputs of the linear conjecture p̃₂ = A·x + B, p̃₃ = ψ·y + φ.
struct LinearAdjointCoefficients {
    std::vector<double> A, B, psi, phi;  // nodes
    std::vector<double> l;               // nodes; empty means zero
    std::vector<double> L;               // nodes × marks; empty means zero
    std::vector<double> r;               // nodes × marks, the deterministic r(t, λ_i); empty means zero
};

/**
 * p̃₂ = A x + B, p̃₃ = ψ y + φ, q̃₂ = θl·p̃₂ + σuA, π̃₂ᵢ = θLᵢ·p̃₂ + A(1 + rᵢ)u along the
 * first `n_paths` paths (0 means all), with u read from the bundle. A vanishing anywhere is rejected.
 */
AdjointBundle linear_transformed_adjoints(const PathBundle& paths, const LinearAdjointCoefficients& c, double sigma,
                                          double theta, std::size_t n_paths = 0);

}  // namespace riskflow
