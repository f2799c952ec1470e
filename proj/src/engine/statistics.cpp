#include "riskflow/engine/statistics.hpp"

#include <cmath>
#include <string>

#include "riskflow/core/errors.hpp"

namespace riskflow {

double pairwise_sum(std::span<const double> values) noexcept {
    constexpr std::size_t kBlock = 64;
    if (values.size() <= kBlock) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

void require_finite(std::span<const double> samples, std::size_t min_count) {
    if (samples.size() < min_count) {
        throw StatisticsError("jump_sde_engine", "need at least " + std::to_string(min_count) + " samples, got " +
                                                     std::to_string(samples.size()));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) {
            throw StatisticsError("jump_sde_engine", "sample " + std::to_string(i) + " is not finite");
        }
    }
}

double centered_square_sum(std::span<const double> samples, double mean) {
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double d = samples[i] - mean;
        sq[i] = d * d;
    }
    return pairwise_sum(sq);
}

}  // namespace

Estimate mc_estimate(std::span<const double> samples) {
    require_finite(samples, 2);
    const double n = static_cast<double>(samples.size());
    const double mean = pairwise_sum(samples) / n;
    const double var = centered_square_sum(samples, mean) / (n - 1.0);
    const double se = std::sqrt(var / n);
    return Estimate{mean, se, mean - 1.96 * se, mean + 1.96 * se, samples.size()};
}

double population_variance(std::span<const double> samples) {
    require_finite(samples, 1);
    const double n = static_cast<double>(samples.size());
    const double mean = pairwise_sum(samples) / n;
    return centered_square_sum(samples, mean) / n;
}

}  // namespace riskflow
