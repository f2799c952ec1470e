#include "riskflow/core/mark_set.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskflow/core/errors.hpp"

namespace riskflow {

double MarkSet::small_jump_moment() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < marks_.size(); ++i) s += weights_[i] * std::min(1.0, marks_[i] * marks_[i]);
    return s;
}

MarkSet validate_mark_set(std::span<const double> marks, std::span<const double> weights) {
    if (marks.size() != weights.size()) {
        throw ConfigurationError("core_model", "mark set has " + std::to_string(marks.size()) + " marks but " +
                                                   std::to_string(weights.size()) + " weights");
    }
    MarkSet out;
    out.marks_.assign(marks.begin(), marks.end());
    out.weights_.assign(weights.begin(), weights.end());
    for (std::size_t i = 0; i < marks.size(); ++i) {
        if (std::isnan(marks[i]) || !std::isfinite(marks[i])) {
            throw ConfigurationError("core_model", "mark " + std::to_string(i) + " is not a finite number");
        }
        if (!(std::isfinite(weights[i]) && weights[i] > 0.0)) {
            throw ConfigurationError("core_model", "weight " + std::to_string(i) + " must be positive, got " +
                                                       std::to_string(weights[i]));
        }
        out.total_intensity_ += weights[i];
    }
    if (!std::isfinite(out.small_jump_moment())) {
        throw ConfigurationError("core_model", "Levy measure integrability condition fails");
    }
    return out;
}

}  // namespace riskflow
