#include "riskflow/fbsde/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "riskflow/core/errors.hpp"
#include "riskflow/engine/statistics.hpp"

namespace riskflow {

std::size_t RegressionBasis::dimension() const noexcept {
    const std::size_t d = static_cast<std::size_t>(degree < 0 ? 0 : degree);
    return use_xi ? (d + 1) * (d + 2) / 2 : d + 1;
}

namespace {

void standardize(std::span<const double> v, double& mean, double& scale, bool& active) {
    const double n = static_cast<double>(v.size());
    mean = pairwise_sum(v) / n;
    double ss = 0.0;
    for (double q : v) ss += (q - mean) * (q - mean);
    const double sd = std::sqrt(ss / n);
    active = sd > 1e-12 * std::max(1.0, std::abs(mean));
    scale = active ? sd : 1.0;
}

double ipow(double v, int e) {
    double out = 1.0;
    for (int i = 0; i < e; ++i) out *= v;
    return out;
}

}  // namespace

void NodeFit::features(double x, double xi, double* out) const {
    const double sx = active_[0] ? (x - mean_[0]) / scale_[0] : 0.0;
    const double sxi = active_[1] ? (xi - mean_[1]) / scale_[1] : 0.0;
    for (std::size_t j = 0; j < powers_.size(); ++j) out[j] = ipow(sx, powers_[j].first) * ipow(sxi, powers_[j].second);
}

NodeFit NodeFit::fit(std::span<const double> x, std::span<const double> xi,
                     const std::vector<std::span<const double>>& targets, const RegressionBasis& basis,
                     const char* module) {
    const std::size_t n = x.size();
    if (n == 0 || targets.empty()) throw UsageError(module, "regression needs samples and at least one target");
    if (basis.degree < 0 || basis.degree > 6) throw UsageError(module, "regression degree must be in [0, 6]");
    NodeFit out;
    standardize(x, out.mean_[0], out.scale_[0], out.active_[0]);
    if (basis.use_xi && !xi.empty()) {
        standardize(xi, out.mean_[1], out.scale_[1], out.active_[1]);
    }
    for (int total = 0; total <= basis.degree; ++total) {
        for (int ex = total; ex >= 0; --ex) {
            const int exi = total - ex;
            if (ex > 0 && !out.active_[0]) continue;
            if (exi > 0 && !out.active_[1]) continue;
            out.powers_.emplace_back(ex, exi);
        }
    }
    const auto dim = static_cast<Eigen::Index>(out.powers_.size());
    if (n < 10 * static_cast<std::size_t>(dim)) {
        throw SolverError(module, "regression has " + std::to_string(n) + " samples for " + std::to_string(dim) +
                                      " basis functions; need at least 10 per function");
    }
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), dim);
    std::vector<double> row(static_cast<std::size_t>(dim));
    for (std::size_t p = 0; p < n; ++p) {
        out.features(x[p], xi.empty() ? 0.0 : xi[p], row.data());
        for (Eigen::Index j = 0; j < dim; ++j) design(static_cast<Eigen::Index>(p), j) = row[static_cast<std::size_t>(j)];
    }
    Eigen::MatrixXd rhs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(targets.size()));
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (targets[t].size() != n) throw UsageError(module, "regression target length mismatch");
        for (std::size_t p = 0; p < n; ++p) rhs(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(t)) = targets[t][p];
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(dim).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    out.condition_ = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(out.condition_ <= basis.max_condition)) {
        std::ostringstream msg;
        msg << "regression design is singular (condition number " << out.condition_ << " > " << basis.max_condition
            << "); use more paths or a lower basis degree";
        throw SolverError(module, msg.str());
    }
    out.coef_ = qr.solve(rhs);
    const Eigen::MatrixXd fit = design * out.coef_;
    out.fitted_.resize(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        out.fitted_[t].resize(n);
        for (std::size_t p = 0; p < n; ++p) out.fitted_[t][p] = fit(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(t));
    }
    return out;
}

NodeFit NodeFit::constant(std::vector<double> values) {
    NodeFit out;
    out.powers_.emplace_back(0, 0);
    out.coef_.resize(1, static_cast<Eigen::Index>(values.size()));
    for (std::size_t t = 0; t < values.size(); ++t) out.coef_(0, static_cast<Eigen::Index>(t)) = values[t];
    return out;
}

double NodeFit::predict(std::size_t target, double x, double xi) const {
    double row[32];
    features(x, xi, row);
    double s = 0.0;
    const auto col = static_cast<Eigen::Index>(target);
    for (std::size_t j = 0; j < powers_.size(); ++j) s += row[j] * coef_(static_cast<Eigen::Index>(j), col);
    return s;
}

}  // namespace riskflow
