#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace riskflow {

/// Polynomial basis in (x, ξ) of total degree ≤ degree (at most 6).
struct RegressionBasis {
    int degree = 2;
    bool use_xi = true;
    double max_condition = 1e12;

    /// Number of monomials with both variables active.
    std::size_t dimension() const noexcept;
};

/**
 * @brief Least-squares fit of several targets on one node's basis.
 *
 * Variables are standardized; a variable with (near) zero spread is dropped, so
 * a node where every path sits at the same state degenerates to the sample mean.
 */
class NodeFit {
public:
    NodeFit() = default;

    /// Fit shared by all targets; throws SolverError when the design condition number exceeds the limit.
    static NodeFit fit(std::span<const double> x, std::span<const double> xi,
                       const std::vector<std::span<const double>>& targets, const RegressionBasis& basis,
                       const char* module);

    /// Constant fit (used for terminal nodes).
    static NodeFit constant(std::vector<double> values);

    double predict(std::size_t target, double x, double xi) const;
    std::size_t targets() const noexcept { return static_cast<std::size_t>(coef_.cols()); }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(coef_.rows()); }
    double condition() const noexcept { return condition_; }

    /// Fitted values of one target at the training points.
    const std::vector<double>& fitted(std::size_t target) const { return fitted_.at(target); }
    void clear_fitted() noexcept { fitted_.clear(); fitted_.shrink_to_fit(); }

private:
    void features(double x, double xi, double* out) const;

    double mean_[2] = {0.0, 0.0};
    double scale_[2] = {1.0, 1.0};
    bool active_[2] = {false, false};
    std::vector<std::pair<int, int>> powers_;
    Eigen::MatrixXd coef_;
    double condition_ = 1.0;
    std::vector<std::vector<double>> fitted_;
};

}  // namespace riskflow
