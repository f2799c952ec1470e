#include "riskflow/core/coefficient_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "riskflow/core/errors.hpp"

namespace riskflow {

CoefficientArgs args_at(const StatePoint& state, double v) {
    return CoefficientArgs{state.t, state.x, state.y, state.z, state.r, v};
}

const char* to_string(Coefficient c) noexcept {
    switch (c) {
        case Coefficient::b: return "b";
        case Coefficient::sigma: return "sigma";
        case Coefficient::gamma: return "gamma";
        case Coefficient::g: return "g";
        case Coefficient::f: return "f";
        case Coefficient::terminal_x: return "Phi";
        case Coefficient::terminal_y: return "Psi";
    }
    return "?";
}

const char* to_string(Variable v) noexcept {
    switch (v) {
        case Variable::x: return "x";
        case Variable::y: return "y";
        case Variable::z: return "z";
        case Variable::r: return "r";
        case Variable::v: return "v";
    }
    return "?";
}

namespace {

double raw(const CoefficientModel& m, Coefficient which, const CoefficientArgs& at, std::size_t mark, double lambda) {
    switch (which) {
        case Coefficient::b: return m.drift ? m.drift(at) : 0.0;
        case Coefficient::sigma: return m.diffusion ? m.diffusion(at) : 0.0;
        case Coefficient::gamma: return m.jump ? m.jump(at, mark, lambda) : 0.0;
        case Coefficient::g: return m.driver ? m.driver(at) : 0.0;
        case Coefficient::f: return m.running ? m.running(at) : 0.0;
        case Coefficient::terminal_x: return m.terminal_x ? m.terminal_x(at.x) : 0.0;
        case Coefficient::terminal_y: return m.terminal_y ? m.terminal_y(at.y) : 0.0;
    }
    return 0.0;
}

double& slot(CoefficientArgs& a, std::vector<double>& r, Wrt wrt) {
    switch (wrt.var) {
        case Variable::x: return a.x;
        case Variable::y: return a.y;
        case Variable::z: return a.z;
        case Variable::v: return a.v;
        case Variable::r: break;
    }
    if (wrt.index >= r.size()) {
        throw UsageError("core_model", "partial with respect to r_" + std::to_string(wrt.index) + " but only " +
                                           std::to_string(r.size()) + " marks");
    }
    return r[wrt.index];
}

}  // namespace

double evaluate(const CoefficientModel& model, Coefficient which, const CoefficientArgs& at, std::size_t mark,
                double lambda) {
    const double value = raw(model, which, at, mark, lambda);
    if (std::isnan(value)) {
        throw EvaluationError("core_model", std::string("coefficient ") + to_string(which) + " of model '" +
                                                model.name + "' returned NaN");
    }
    return value;
}

PartialResult partial(const CoefficientModel& model, Coefficient which, Wrt wrt, const CoefficientArgs& at,
                      std::size_t mark, double lambda) {
    if (!std::isfinite(at.t) || !std::isfinite(at.x) || !std::isfinite(at.y) || !std::isfinite(at.z) ||
        !std::isfinite(at.v) || std::any_of(at.r.begin(), at.r.end(), [](double q) { return !std::isfinite(q); })) {
        throw UsageError("core_model", std::string("partial of ") + to_string(which) + " at a non-finite point");
    }
    if (model.analytic) {
        if (auto d = model.analytic(which, wrt, at, mark, lambda)) {
            if (std::isnan(*d)) {
                throw EvaluationError("core_model", std::string("analytic partial of ") + to_string(which) +
                                                        " returned NaN");
            }
            return {*d, true};
        }
    }
    std::vector<double> r(at.r.begin(), at.r.end());
    CoefficientArgs work = at;
    work.r = r;
    double& var = slot(work, r, wrt);
    const double base = var;
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(base));
    var = base + h;
    const double up = evaluate(model, which, work, mark, lambda);
    var = base - h;
    const double down = evaluate(model, which, work, mark, lambda);
    return {(up - down) / (2.0 * h), false};
}

}  // namespace riskflow
