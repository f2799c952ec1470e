#include "riskflow/core/control_policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "riskflow/core/errors.hpp"

namespace riskflow {

namespace {

void check_range(const ControlRange& range) {
    if (std::isnan(range.lo) || std::isnan(range.hi) || range.lo > range.hi) {
        throw ConfigurationError("core_model", "control range must satisfy lo <= hi");
    }
}

}  // namespace

ControlPolicy ControlPolicy::feedback(Feedback map, ControlRange range) {
    check_range(range);
    if (!map) throw ConfigurationError("core_model", "feedback policy needs a callable map");
    ControlPolicy p;
    p.map_ = [map = std::move(map)](std::size_t, double t, double x, double y, std::span<const double> r) {
        return map(t, x, y, r);
    };
    p.range_ = range;
    return p;
}

ControlPolicy ControlPolicy::open_loop(std::vector<double> table, ControlRange range) {
    check_range(range);
    if (table.empty()) throw ConfigurationError("core_model", "open-loop control table is empty");
    ControlPolicy p;
    p.map_ = [table = std::move(table)](std::size_t k, double, double, double, std::span<const double>) {
        if (k >= table.size()) {
            throw UsageError("core_model", "open-loop table has no entry for node " + std::to_string(k));
        }
        return table[k];
    };
    p.open_loop_ = true;
    p.range_ = range;
    return p;
}

ControlPolicy ControlPolicy::constant(double value, ControlRange range) {
    return feedback([value](double, double, double, std::span<const double>) { return value; }, range);
}

double ControlPolicy::raw_value(std::size_t k, double t, double x, double y, std::span<const double> r) const {
    const double v = map_(k, t, x, y, r);
    if (std::isnan(v)) throw EvaluationError("core_model", "control policy returned NaN");
    return v;
}

ControlValue ControlPolicy::evaluate(std::size_t k, double t, double x, double y, std::span<const double> r) const {
    const double v = raw_value(k, t, x, y, r);
    if (v < range_.lo) return {range_.lo, true};
    if (v > range_.hi) return {range_.hi, true};
    return {v, false};
}

ControlPolicy perturbed(const ControlPolicy& base, double epsilon, std::function<double(double, double)> direction) {
    ControlPolicy p;
    p.map_ = [base, epsilon, direction = std::move(direction)](std::size_t k, double t, double x, double y,
                                                                 std::span<const double> r) {
        return base.raw_value(k, t, x, y, r) + epsilon * (direction ? direction(t, x) : 1.0);
    };
    p.open_loop_ = base.open_loop_;
    p.range_ = base.range_;
    return p;
}

}  // namespace riskflow
