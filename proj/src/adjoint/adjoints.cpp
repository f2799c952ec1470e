#include "riskflow/adjoint/adjoints.hpp"

#include <algorithm>
#include <cmath>

#include "riskflow/core/errors.hpp"
#include "riskflow/core/risk_params.hpp"

namespace riskflow {

namespace {
constexpr const char* kModule = "adjoint_smp";
}

AdjointSlice AdjointBundle::slice(std::size_t p, std::size_t k) const {
    AdjointSlice s;
    const std::size_t i = at(p, k);
    s.p2 = p2[i];
    s.q2 = q2[i];
    s.p3 = p3[i];
    s.l = l.empty() ? 0.0 : l[k];
    s.pi2.assign(pi2.begin() + static_cast<std::ptrdiff_t>(i * n_marks),
                 pi2.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_marks));
    s.L.assign(n_marks, 0.0);
    if (!L.empty()) {
        for (std::size_t j = 0; j < n_marks; ++j) s.L[j] = L[k * n_marks + j];
    }
    return s;
}

void AdjointBundle::reconstruct_raw(std::vector<double> v) {
    if (v.size() != n_paths * nodes) throw UsageError(kModule, "V^theta must hold n_paths x nodes values");
    v_theta = std::move(v);
    raw_p2.resize(v_theta.size());
    raw_p3.resize(v_theta.size());
    for (std::size_t i = 0; i < v_theta.size(); ++i) {
        raw_p2[i] = theta * v_theta[i] * p2[i];
        raw_p3[i] = theta * v_theta[i] * p3[i];
    }
}

double AdjointBundle::transform_identity_error() const {
    if (raw_p2.empty()) throw UsageError(kModule, "raw adjoints have not been reconstructed");
    double worst = 0.0;
    for (std::size_t i = 0; i < v_theta.size(); ++i) {
        const double s = theta * v_theta[i];
        worst = std::max({worst, std::abs(p2[i] - raw_p2[i] / s), std::abs(p3[i] - raw_p3[i] / s)});
    }
    return worst;
}

AdjointBundle linear_transformed_adjoints(const PathBundle& paths, const LinearAdjointCoefficients& c, double sigma,
                                          double theta, std::size_t n_paths) {
    validate_theta(theta, kModule);
    const std::size_t nodes = paths.nodes(), m = paths.n_marks();
    const std::size_t n = n_paths == 0 ? paths.n_paths() : std::min(n_paths, paths.n_paths());
    if (c.A.size() != nodes || c.B.size() != nodes || c.psi.size() != nodes || c.phi.size() != nodes) {
        throw UsageError(kModule, "Riccati trajectories missing or not on the path grid");
    }
    if (std::any_of(c.A.begin(), c.A.end(), [](double a) { return a == 0.0; })) {
        throw ConfigurationError(kModule, "A vanishes on the grid; the linear conjecture cannot define the feedback");
    }
    AdjointBundle out;
    out.n_paths = n;
    out.nodes = nodes;
    out.n_marks = m;
    out.theta = theta;
    out.l = c.l.empty() ? std::vector<double>(nodes, 0.0) : c.l;
    out.L = c.L.empty() ? std::vector<double>(nodes * m, 0.0) : c.L;
    const std::vector<double> r = c.r.empty() ? std::vector<double>(nodes * m, 0.0) : c.r;
    out.p2.resize(n * nodes);
    out.q2.resize(n * nodes);
    out.p3.resize(n * nodes);
    out.pi2.resize(n * nodes * m);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t k = 0; k < nodes; ++k) {
            const std::size_t i = out.at(p, k);
            const double u = paths.u(p, k);
            out.p2[i] = c.A[k] * paths.x(p, k) + c.B[k];
            out.p3[i] = c.psi[k] * paths.y(p, k) + c.phi[k];
            out.q2[i] = theta * out.l[k] * out.p2[i] + sigma * u * c.A[k];
            for (std::size_t j = 0; j < m; ++j) {
                out.pi2[i * m + j] = theta * out.L[k * m + j] * out.p2[i] + c.A[k] * (1.0 + r[k * m + j]) * u;
            }
        }
    }
    return out;
}

}  // namespace riskflow
