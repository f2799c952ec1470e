#include "riskflow/adjoint/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "riskflow/core/errors.hpp"

namespace riskflow {

namespace {
constexpr const char* kModule = "adjoint_smp";
}

ConvexityReport midpoint_convexity(const std::string& name, const VectorFn& fn, std::span<const double> lo,
                                   std::span<const double> hi, std::size_t probes, std::uint64_t seed,
                                   double tolerance) {
    if (lo.size() != hi.size() || lo.empty()) throw UsageError(kModule, "convexity box has inconsistent bounds");
    std::mt19937_64 gen(seed);
    const std::size_t d = lo.size();
    std::vector<std::uniform_real_distribution<double>> axes;
    for (std::size_t i = 0; i < d; ++i) axes.emplace_back(lo[i], hi[i]);
    std::vector<double> a(d), b(d), mid(d);
    ConvexityReport out;
    out.name = name;
    out.probes = probes;
    for (std::size_t n = 0; n < probes; ++n) {
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = axes[i](gen);
            b[i] = axes[i](gen);
            mid[i] = 0.5 * (a[i] + b[i]);
        }
        const double avg = 0.5 * (fn(a) + fn(b));
        const double excess = (fn(mid) - avg) / (1.0 + std::abs(avg));
        out.worst_excess = std::max(out.worst_excess, excess);
        if (excess > tolerance) ++out.violations;
    }
    out.convex = out.violations == 0;
    return out;
}

SufficientProbe sufficient_condition_probe(const ControlPolicy& policy,
                                           const std::vector<PerturbationDirection>& directions,
                                           const std::vector<double>& epsilons, double theta,
                                           const CostSampler& sampler,
                                           const std::vector<ConvexityReport>& hypotheses) {
    if (!sampler) throw UsageError(kModule, "sufficient-condition probe needs a cost sampler");
    SufficientProbe out;
    const auto base = sampler(policy);
    out.baseline = cost_J_theta(base, theta);
    out.verdict.condition = "sufficient";
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& dir : directions) {
        for (double eps : epsilons) {
            const auto samples = sampler(perturbed(policy, eps, dir.fn));
            if (samples.size() != base.size()) throw UsageError(kModule, "cost sampler changed the path count");
            ProbeCell cell;
            cell.direction = dir.name;
            cell.epsilon = eps;
            cell.cost = cost_J_theta(samples, theta);
            // Common shift keeps the paired differences finite; the ratio to J(u) is shift-free.
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < base.size(); ++p) top = std::max({top, theta * base[p], theta * samples[p]});
            std::vector<double> diff(base.size()), ref(base.size());
            for (std::size_t p = 0; p < base.size(); ++p) {
                ref[p] = std::exp(theta * base[p] - top);
                diff[p] = std::exp(theta * samples[p] - top) - ref[p];
            }
            const double scale = pairwise_sum(ref) / static_cast<double>(ref.size());
            for (double& d : diff) d /= scale;
            cell.relative_margin = mc_estimate(diff);
            cell.consistent = cell.relative_margin.mean >= -3.0 * cell.relative_margin.se;
            cell.improving = !cell.consistent;
            out.consistent = out.consistent && cell.consistent;
            out.improving_found = out.improving_found || cell.improving;
            const double z = cell.relative_margin.mean + 3.0 * cell.relative_margin.se;
            if (z < worst) {
                worst = z;
                std::ostringstream loc;
                loc << dir.name << " eps=" << eps;
                out.verdict.worst_location = loc.str();
            }
            out.cells.push_back(std::move(cell));
        }
    }
    out.verdict.worst_gap = out.cells.empty() ? 0.0 : worst;
    out.verdict.verdict = out.consistent ? "consistent with optimality" : "improving perturbation found";
    for (const auto& h : hypotheses) {
        if (!h.convex) {
            std::ostringstream msg;
            msg << "convexity of " << h.name << " failed in " << h.violations << " of " << h.probes
                << " midpoint probes; the sufficient condition's hypotheses are unmet";
            out.verdict.warnings.push_back(msg.str());
        }
    }
    return out;
}

}  // namespace riskflow
