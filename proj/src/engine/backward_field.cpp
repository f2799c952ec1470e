#include "riskflow/engine/backward_field.hpp"

#include <algorithm>

namespace riskflow {

void ZeroField::evaluate(std::size_t, double, double, double& y, double& z, std::span<double> r) const {
    y = 0.0;
    z = 0.0;
    std::fill(r.begin(), r.end(), 0.0);
}

}  // namespace riskflow
