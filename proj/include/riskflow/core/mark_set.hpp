#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace riskflow {

/**
 * @brief Finite-activity Lévy measure: atoms λ_i with intensity w_i.
 *
 * M = 0 is the pure-diffusion model. Weights are strictly positive.
 */
class MarkSet {
public:
    MarkSet() = default;

    std::size_t size() const noexcept { return marks_.size(); }
    bool empty() const noexcept { return marks_.empty(); }

    const std::vector<double>& marks() const noexcept { return marks_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double mark(std::size_t i) const { return marks_.at(i); }
    double weight(std::size_t i) const { return weights_.at(i); }

    double total_intensity() const noexcept { return total_intensity_; }

    /// Σ w_i·min(1, λ_i²); always finite for a validated set.
    double small_jump_moment() const noexcept;

    bool operator==(const MarkSet&) const = default;

private:
    friend MarkSet validate_mark_set(std::span<const double>, std::span<const double>);

    std::vector<double> marks_;
    std::vector<double> weights_;
    double total_intensity_ = 0.0;
};

MarkSet validate_mark_set(std::span<const double> marks, std::span<const double> weights);

}  // namespace riskflow
