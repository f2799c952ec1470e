#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>

namespace riskflow {

/**
 * @brief Source of (y, z, r) along forward paths, as a function of (k, x, ξ).
 *
 * Implementations must be safe to call concurrently.
 */
class BackwardField {
public:
    virtual ~BackwardField() = default;
    virtual void evaluate(std::size_t k, double x, double xi, double& y, double& z, std::span<double> r) const = 0;
};

/// y = z = r = 0; the source for decoupled models.
class ZeroField final : public BackwardField {
public:
    void evaluate(std::size_t, double, double, double& y, double& z, std::span<double> r) const override;
};

/// Wraps a closed-form decoupling field.
class FunctionField final : public BackwardField {
public:
    using Fn = std::function<void(std::size_t k, double x, double xi, double& y, double& z, std::span<double> r)>;
    explicit FunctionField(Fn fn) : fn_(std::move(fn)) {}
    void evaluate(std::size_t k, double x, double xi, double& y, double& z, std::span<double> r) const override {
        fn_(k, x, xi, y, z, r);
    }

private:
    Fn fn_;
};

}  // namespace riskflow
