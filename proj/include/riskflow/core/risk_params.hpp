#pragma once

namespace riskflow {

/// Risk-sensitivity parameter θ > 0. Values above 10 are accepted but flagged.
class RiskParams {
public:
    explicit RiskParams(double theta);

    double theta() const noexcept { return theta_; }
    bool large() const noexcept { return theta_ > kSoftUpperBound; }

    static constexpr double kSoftUpperBound = 10.0;

private:
    double theta_;
};

/// Throws ConfigurationError unless θ is finite and positive.
void validate_theta(double theta, const char* module);

}  // namespace riskflow
