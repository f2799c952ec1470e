#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace riskflow {

/// Admissible control set U as a closed interval.
struct ControlRange {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

struct ControlValue {
    double value = 0.0;
    bool clamped = false;
};

/**
 * @brief Feedback map u(t, x, y, r) or an open-loop table u_k, clamped to U.
 */
class ControlPolicy {
public:
    using Feedback = std::function<double(double t, double x, double y, std::span<const double> r)>;

    static ControlPolicy feedback(Feedback map, ControlRange range = {});
    static ControlPolicy open_loop(std::vector<double> table, ControlRange range = {});
    static ControlPolicy constant(double value, ControlRange range = {});

    ControlValue evaluate(std::size_t k, double t, double x, double y, std::span<const double> r) const;
    /// Value before projection onto U.
    double raw_value(std::size_t k, double t, double x, double y, std::span<const double> r) const;

    const ControlRange& range() const noexcept { return range_; }
    bool is_open_loop() const noexcept { return open_loop_; }

private:
    using Indexed = std::function<double(std::size_t k, double t, double x, double y, std::span<const double> r)>;

    ControlPolicy() = default;
    friend ControlPolicy perturbed(const ControlPolicy&, double, std::function<double(double, double)>);

    Indexed map_;
    bool open_loop_ = false;
    ControlRange range_;
};

/// Policy u(t, x, y, r) + ε·direction(t, x), clamped to the base policy's range.
ControlPolicy perturbed(const ControlPolicy& base, double epsilon,
                        std::function<double(double t, double x)> direction = {});

}  // namespace riskflow
