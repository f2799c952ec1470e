#include "riskflow/adjoint/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskflow/core/errors.hpp"

namespace riskflow {

namespace {

constexpr const char* kModule = "adjoint_smp";

void check_input(const HamiltonianInput& in) {
    const std::size_t m = in.weights.size();
    if (in.marks.size() != m || in.state.r.size() != m || in.adjoint.pi2.size() != m || in.adjoint.L.size() != m) {
        throw UsageError(kModule, "Hamiltonian input has inconsistent mark dimensions");
    }
    auto finite = [](double v) { return std::isfinite(v); };
    const auto& a = in.adjoint;
    const bool ok = finite(in.state.t) && finite(in.state.x) && finite(in.state.y) && finite(in.state.z) &&
                    finite(in.v) && finite(a.p2) && finite(a.q2) && finite(a.p3) && finite(a.l) &&
                    finite(in.theta) && std::all_of(a.pi2.begin(), a.pi2.end(), finite) &&
                    std::all_of(a.L.begin(), a.L.end(), finite) &&
                    std::all_of(in.state.r.begin(), in.state.r.end(), finite);
    if (!ok) throw UsageError(kModule, "Hamiltonian input is not finite");
}

}  // namespace

double hamiltonian(const HamiltonianInput& in, const CoefficientModel& model, ZlSign zl) {
    check_input(in);
    const auto at = args_at(in.state, in.v);
    const auto& a = in.adjoint;
    const double g = evaluate(model, Coefficient::g, at);
    double h = evaluate(model, Coefficient::f, at) + evaluate(model, Coefficient::b, at) * a.p2 +
               evaluate(model, Coefficient::sigma, at) * a.q2 +
               (g + static_cast<int>(zl) * in.theta * a.l * in.state.z) * a.p3;
    for (std::size_t i = 0; i < in.weights.size(); ++i) {
        const double gamma = evaluate(model, Coefficient::gamma, at, i, in.marks[i]);
        h += in.weights[i] * (gamma * a.pi2[i] - (g - in.theta * a.L[i] * in.state.r[i]) * a.p3);
    }
    return h;
}

double hamiltonian_v(const HamiltonianInput& in, const CoefficientModel& model) {
    check_input(in);
    const auto at = args_at(in.state, in.v);
    const auto& a = in.adjoint;
    const Wrt dv{Variable::v};
    const double g_v = partial(model, Coefficient::g, dv, at).value;
    double d = partial(model, Coefficient::f, dv, at).value + partial(model, Coefficient::b, dv, at).value * a.p2 +
               partial(model, Coefficient::sigma, dv, at).value * a.q2 + g_v * a.p3;
    for (std::size_t i = 0; i < in.weights.size(); ++i) {
        const double gamma_v = partial(model, Coefficient::gamma, dv, at, i, in.marks[i]).value;
        d += in.weights[i] * (gamma_v * a.pi2[i] - g_v * a.p3);
    }
    return d;
}

double hamiltonian_control_gap(const HamiltonianInput& in, const CoefficientModel& model, double v_alt,
                               const ControlRange& range, ZlSign zl) {
    if (!range.contains(v_alt)) {
        throw UsageError(kModule, "alternative control " + std::to_string(v_alt) + " lies outside U");
    }
    HamiltonianInput alt = in;
    alt.v = v_alt;
    return hamiltonian(alt, model, zl) - hamiltonian(in, model, zl);
}

GapScan scan_control_gap(const HamiltonianInput& in, const CoefficientModel& model, double lo, double hi,
                         std::size_t points, ZlSign zl) {
    if (points < 3 || !(hi > lo)) throw UsageError(kModule, "gap scan needs at least 3 points on a proper interval");
    GapScan out;
    out.max_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < points; ++j) {
        const double v = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1);
        out.v_alt.push_back(v);
        out.gaps.push_back(hamiltonian_control_gap(in, model, v, {}, zl));
        out.max_gap = std::max(out.max_gap, out.gaps.back());
    }
    out.min_second_difference = std::numeric_limits<double>::infinity();
    out.max_second_difference = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j + 1 < points; ++j) {
        const double d2 = out.gaps[j + 1] - 2.0 * out.gaps[j] + out.gaps[j - 1];
        out.min_second_difference = std::min(out.min_second_difference, d2);
        out.max_second_difference = std::max(out.max_second_difference, d2);
    }
    return out;
}

}  // namespace riskflow
