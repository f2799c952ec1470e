#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace riskflow {

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
};

/// Pairwise (cascade) summation in index order.
double pairwise_sum(std::span<const double> values) noexcept;

/// Mean, SE = s/√n with the n−1 sample deviation, and the normal 95% interval.
Estimate mc_estimate(std::span<const double> samples);

/// Population variance (divisor n) with pairwise sums.
double population_variance(std::span<const double> samples);

}  // namespace riskflow
