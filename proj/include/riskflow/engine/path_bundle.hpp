#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "riskflow/core/mark_set.hpp"
#include "riskflow/core/time_grid.hpp"
#include "riskflow/engine/jumps.hpp"
#include "riskflow/engine/rng.hpp"

namespace riskflow {

/**
 * @brief Discretized trajectories, stored path-major.
 *
 * Node arrays (x, y, z, ξ, u) have N+1 entries per path; r has M entries per node.
 * Step arrays hold the Brownian increment ΔW_k and jump counts ΔN_k(i) of step k.
 */
class PathBundle {
public:
    PathBundle(std::size_t n_paths, TimeGrid grid, MarkSet marks, RngSpec rng);

    std::size_t n_paths() const noexcept { return n_paths_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    const MarkSet& marks() const noexcept { return marks_; }
    const RngSpec& rng() const noexcept { return rng_; }
    std::size_t nodes() const noexcept { return grid_.nodes(); }
    std::size_t steps() const noexcept { return grid_.steps(); }
    std::size_t n_marks() const noexcept { return marks_.size(); }

    double& x(std::size_t p, std::size_t k) { return x_[p * nodes() + k]; }
    double& y(std::size_t p, std::size_t k) { return y_[p * nodes() + k]; }
    double& z(std::size_t p, std::size_t k) { return z_[p * nodes() + k]; }
    double& xi(std::size_t p, std::size_t k) { return xi_[p * nodes() + k]; }
    double& u(std::size_t p, std::size_t k) { return u_[p * nodes() + k]; }
    double& dW(std::size_t p, std::size_t k) { return dw_[p * steps() + k]; }
    std::uint32_t& dN(std::size_t p, std::size_t k, std::size_t i) { return dn_[(p * steps() + k) * n_marks() + i]; }
    std::span<double> r(std::size_t p, std::size_t k) { return {r_.data() + (p * nodes() + k) * n_marks(), n_marks()}; }

    double x(std::size_t p, std::size_t k) const { return x_[p * nodes() + k]; }
    double y(std::size_t p, std::size_t k) const { return y_[p * nodes() + k]; }
    double z(std::size_t p, std::size_t k) const { return z_[p * nodes() + k]; }
    double xi(std::size_t p, std::size_t k) const { return xi_[p * nodes() + k]; }
    double u(std::size_t p, std::size_t k) const { return u_[p * nodes() + k]; }
    double dW(std::size_t p, std::size_t k) const { return dw_[p * steps() + k]; }
    std::uint32_t dN(std::size_t p, std::size_t k, std::size_t i) const { return dn_[(p * steps() + k) * n_marks() + i]; }
    std::span<const double> r(std::size_t p, std::size_t k) const {
        return {r_.data() + (p * nodes() + k) * n_marks(), n_marks()};
    }

    /// Compensated increment ΔÑ_k(i) = ΔN_k(i) − w_i·dt.
    double dN_tilde(std::size_t p, std::size_t k, std::size_t i) const {
        return static_cast<double>(dN(p, k, i)) - marks_.weight(i) * grid_.dt();
    }

    std::vector<JumpLedger>& ledgers() noexcept { return ledgers_; }
    const std::vector<JumpLedger>& ledgers() const noexcept { return ledgers_; }

    /// Seed of the Brownian substream of path p.
    std::uint64_t path_seed(std::size_t p) const noexcept;

    bool has_xi() const noexcept { return has_xi_; }
    bool has_backward() const noexcept { return has_backward_; }
    void set_has_xi(bool v) noexcept { has_xi_ = v; }
    void set_has_backward(bool v) noexcept { has_backward_ = v; }

    std::size_t clamp_count() const noexcept { return clamp_count_; }
    void set_clamp_count(std::size_t n) noexcept { clamp_count_ = n; }

    /// Column of one node across paths.
    std::vector<double> x_at(std::size_t k) const;
    std::vector<double> y_at(std::size_t k) const;
    std::vector<double> xi_at(std::size_t k) const;

private:
    std::size_t n_paths_;
    TimeGrid grid_;
    MarkSet marks_;
    RngSpec rng_;
    std::vector<double> x_, y_, z_, xi_, u_, r_, dw_;
    std::vector<std::uint32_t> dn_;
    std::vector<JumpLedger> ledgers_;
    bool has_xi_ = false;
    bool has_backward_ = false;
    std::size_t clamp_count_ = 0;
};

/// CSV with columns path,k,t,x,y,z,r_0..r_{M-1},xi,u; at most `max_paths` paths (0 = all).
void write_paths_csv(const PathBundle& paths, std::ostream& out, std::size_t max_paths = 0);

}  // namespace riskflow
