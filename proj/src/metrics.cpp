#include "riskshift/metrics.hpp"

#include <array>
#include <cmath>

#include "riskshift/errors.hpp"

namespace riskshift {

ReplicationSummary summarize(std::span<const double> values) {
    if (values.size() < 2)
        throw InsufficientReplications("summarize needs at least 2 replications");
    const double n = static_cast<double>(values.size());
    double mean = 0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    return {mean, sd / std::sqrt(n), values.size()};
}

namespace {

double true_tau(const DgpConfig& dgp, const EffectKind& kind, std::span<const double> x,
                int k) {
    switch (kind.type) {
        case EffectKind::Type::TotalRiskDiff:
            return exact_risk(dgp, InterventionSpec::total(1), x, k) -
                   exact_risk(dgp, InterventionSpec::total(0), x, k);
        case EffectKind::Type::DirectRiskDiff:
            return exact_risk(dgp, InterventionSpec::direct(1), x, k) -
                   exact_risk(dgp, InterventionSpec::direct(0), x, k);
        case EffectKind::Type::SeparableDirectRiskDiff:
            return exact_risk(dgp, InterventionSpec::separable(1, kind.fixed_arm), x, k) -
                   exact_risk(dgp, InterventionSpec::separable(0, kind.fixed_arm), x, k);
        case EffectKind::Type::SeparableIndirectRiskDiff:
            return exact_risk(dgp, InterventionSpec::separable(kind.fixed_arm, 1), x, k) -
                   exact_risk(dgp, InterventionSpec::separable(kind.fixed_arm, 0), x, k);
    }
    return 0;
}

}  // namespace

double rmse_tau(const HazardSource& model, const DgpConfig& dgp, const EffectKind& kind,
                const Matrix& test_x, int k) {
    if (test_x.rows == 0) throw ShapeError("rmse_tau: empty test matrix");
    // The synthetic covariate space has 4 cells; evaluate each once and
    // weight by the empirical cell counts of the test draw.
    std::array<double, 4> sq_err{};
    std::array<bool, 4> done{};
    std::array<std::size_t, 4> count{};
    for (std::size_t r = 0; r < test_x.rows; ++r) count[cell_of(test_x.row(r))]++;
    double mse = 0;
    for (int c = 0; c < 4; ++c) {
        if (count[c] == 0) continue;
        if (!done[c]) {
            const auto xc = cell_covariates(c);
            const double err =
                hte(model, {xc.data(), 2}, kind, k) - true_tau(dgp, kind, {xc.data(), 2}, k);
            sq_err[c] = err * err;
            done[c] = true;
        }
        mse += sq_err[c] * static_cast<double>(count[c]);
    }
    return std::sqrt(mse / static_cast<double>(test_x.rows));
}

double rmse_haz(const HazardSource& model, const DgpConfig& dgp,
                const InterventionSpec& spec, int a, int k) {
    const auto p_int = exact_at_risk_distribution(dgp, spec.for_arm(a), k);
    double mse = 0;
    for (int c = 0; c < 4; ++c) {
        const auto xc = cell_covariates(c);
        std::span<const double> x{xc.data(), 2};
        const double err = true_hazard(dgp, EventType::MainEvent, k, x, a) -
                           model.hazard(EventType::MainEvent, k, x, a);
        mse += p_int[c] * err * err;
    }
    return std::sqrt(mse);
}

}  // namespace riskshift
