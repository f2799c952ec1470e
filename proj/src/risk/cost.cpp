#include "riskflow/risk/cost.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskflow/core/errors.hpp"
#include "riskflow/core/risk_params.hpp"

namespace riskflow {

namespace {

constexpr const char* kModule = "risk_sensitive";

void check_thetas(std::span<const double> thetas) {
    if (thetas.empty()) throw UsageError(kModule, "theta list is empty");
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        validate_theta(thetas[i], kModule);
        if (i > 0 && thetas[i] <= thetas[i - 1]) throw UsageError(kModule, "theta list must be strictly increasing");
    }
}

double fit_slope(const std::vector<double>& thetas, const std::vector<double>& residuals) {
    const std::size_t n = thetas.size();
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += std::log(thetas[i]);
        sy += std::log(std::abs(residuals[i]));
    }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(thetas[i]) - mx;
        sxy += dx * (std::log(std::abs(residuals[i])) - my);
        sxx += dx * dx;
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

void finish(ExpansionResult& out) {
    out.degenerate = out.thetas.size() < 2 ||
                     std::any_of(out.residuals.begin(), out.residuals.end(), [](double r) { return r == 0.0; });
    out.slope = out.degenerate ? 0.0 : fit_slope(out.thetas, out.residuals);
}

}  // namespace

std::vector<double> theta_T(const PathBundle& paths, const CoefficientModel& model) {
    if (!paths.has_xi()) throw UsageError(kModule, "Theta_T needs the auxiliary running-cost process");
    const std::size_t n_steps = paths.steps();
    std::vector<double> out(paths.n_paths());
    for (std::size_t p = 0; p < out.size(); ++p) {
        const double phi = model.terminal_x ? model.terminal_x(paths.x(p, n_steps)) : 0.0;
        const double psi = model.terminal_y ? model.terminal_y(paths.y(p, 0)) : 0.0;
        out[p] = phi + psi + paths.xi(p, n_steps);
    }
    return out;
}

std::vector<double> theta_T(std::span<const double> x_terminal, std::span<const double> xi_terminal,
                            std::span<const double> y0, const CoefficientModel& model) {
    if (xi_terminal.size() != x_terminal.size()) throw UsageError(kModule, "Theta_T needs xi for every path");
    if (y0.size() != 1 && y0.size() != x_terminal.size()) throw UsageError(kModule, "y0 must be shared or per path");
    std::vector<double> out(x_terminal.size());
    for (std::size_t p = 0; p < out.size(); ++p) {
        const double y = y0.size() == 1 ? y0[0] : y0[p];
        out[p] = (model.terminal_x ? model.terminal_x(x_terminal[p]) : 0.0) +
                 (model.terminal_y ? model.terminal_y(y) : 0.0) + xi_terminal[p];
    }
    return out;
}

double CostEstimate::J() const { return linear_finite ? linear.mean : std::exp(log_J); }

CostEstimate cost_J_theta(std::span<const double> samples, double theta) {
    validate_theta(theta, kModule);
    if (samples.size() < 2) throw StatisticsError(kModule, "need at least 2 samples of Theta_T");
    CostEstimate out;
    out.theta = theta;
    out.max_theta_T = *std::max_element(samples.begin(), samples.end());
    if (!std::isfinite(out.max_theta_T) ||
        std::any_of(samples.begin(), samples.end(), [](double v) { return std::isnan(v); })) {
        std::ostringstream msg;
        msg << "risk-sensitive cost overflows even in the log domain (max Theta_T = " << out.max_theta_T << ")";
        throw NumericError(kModule, msg.str());
    }
    const double shift = theta * out.max_theta_T;
    std::vector<double> scaled(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) scaled[i] = std::exp(theta * samples[i] - shift);
    const Estimate rel = mc_estimate(scaled);
    out.log_J = shift + std::log(rel.mean);
    out.log_se = rel.se / rel.mean;
    if (!std::isfinite(out.log_J)) {
        std::ostringstream msg;
        msg << "risk-sensitive cost overflows even in the log domain (max Theta_T = " << out.max_theta_T << ")";
        throw NumericError(kModule, msg.str());
    }
    std::vector<double> direct(samples.size());
    bool finite = true;
    for (std::size_t i = 0; i < samples.size() && finite; ++i) {
        direct[i] = std::exp(theta * samples[i]);
        finite = std::isfinite(direct[i]);
    }
    if (finite) {
        out.linear = mc_estimate(direct);
        out.linear_finite = std::isfinite(out.linear.mean) && std::isfinite(out.linear.se);
    }
    return out;
}

RiskLoss risk_loss(std::span<const double> samples, double theta) {
    validate_theta(theta, kModule);
    if (samples.size() < 2) throw StatisticsError(kModule, "need at least 2 samples of Theta_T");
    const double top = *std::max_element(samples.begin(), samples.end());
    if (!std::isfinite(top)) throw NumericError(kModule, "non-finite Theta_T sample");
    std::vector<double> scaled(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) scaled[i] = std::exp(theta * (samples[i] - top));
    const Estimate rel = mc_estimate(scaled);
    return {top + std::log(rel.mean) / theta, rel.se / (rel.mean * theta)};
}

ExpansionResult expansion_residual(std::span<const double> samples, std::span<const double> thetas) {
    check_thetas(thetas);
    ExpansionResult out;
    out.thetas.assign(thetas.begin(), thetas.end());
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (samples.size() < 2 || *lo == *hi) {
        out.residuals.assign(thetas.size(), 0.0);
        out.degenerate = true;
        return out;
    }
    const double mean = pairwise_sum(samples) / static_cast<double>(samples.size());
    const double var = population_variance(samples);
    for (double th : thetas) out.residuals.push_back(risk_loss(samples, th).value - (mean + 0.5 * th * var));
    finish(out);
    return out;
}

ExpansionResult expansion_residual(std::span<const double> losses, std::span<const double> thetas, double mean,
                                   double variance) {
    check_thetas(thetas);
    if (losses.size() != thetas.size()) throw UsageError(kModule, "one loss per theta is required");
    ExpansionResult out;
    out.thetas.assign(thetas.begin(), thetas.end());
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        out.residuals.push_back(variance == 0.0 ? 0.0 : losses[i] - (mean + 0.5 * thetas[i] * variance));
    }
    finish(out);
    return out;
}

}  // namespace riskflow
