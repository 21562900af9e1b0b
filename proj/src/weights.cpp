#include "riskshift/weights.hpp"

#include <cmath>

#include "riskshift/errors.hpp"

namespace riskshift {

namespace {

// Shared skeleton: pi(x) and cumulative competing survival come either from
// the true DGP or from fitted models.
template <typename PropensityFn, typename CompSurvFn>
WeightTable compute_weights(PropensityFn&& pi_of, CompSurvFn&& comp_surv,
                            const InterventionSpec& spec, const Dataset& ds, int k,
                            int a) {
    if (a != spec.arm())
        throw ConfigError("weights: at-risk arm does not match the intervention arm");
    const AtRiskSample s = main_at_risk(ds, k, a);

    WeightTable w;
    w.k = k;
    w.a = a;
    w.intervention = spec;
    w.values.reserve(s.indices.size());

    for (std::uint32_t i : s.indices) {
        const auto x = ds.x(i);
        const double pi = pi_of(x);
        const double pi_a = a == 1 ? pi : 1.0 - pi;
        double numer = 1.0;
        double denom = pi_a;
        switch (spec.kind) {
            case InterventionSpec::Kind::Total:
                break;
            case InterventionSpec::Kind::Direct:
                denom *= comp_surv(x, spec.a_main);
                break;
            case InterventionSpec::Kind::Separable:
                numer = comp_surv(x, spec.a_comp);
                denom *= comp_surv(x, spec.a_main);
                break;
        }
        if (denom < kWeightFloor) {
            denom = kWeightFloor;
            ++w.n_truncated;
        }
        w.values.push_back(numer / denom);
    }
    return w;
}

}  // namespace

WeightTable true_weights(const TrueDgp& dgp, const InterventionSpec& spec,
                         const Dataset& ds, int k, int a) {
    auto pi_of = [&](std::span<const double> x) { return dgp.propensity(x); };
    auto comp_surv = [&](std::span<const double> x, int arm) {
        double s = 1.0;
        for (int l = 1; l <= k; ++l)
            s *= 1.0 - dgp.hazard(EventType::CompetingEvent, l, x, arm);
        return s;
    };
    return compute_weights(pi_of, comp_surv, spec, ds, k, a);
}

WeightTable estimated_weights(const FittedClassifier& pi_hat, const HazardGrid& hd_grid,
                              const InterventionSpec& spec, const Dataset& ds, int k,
                              int a) {
    auto pi_of = [&](std::span<const double> x) { return pi_hat.predict_proba(x); };
    auto comp_surv = [&](std::span<const double> x, int arm) {
        double s = 1.0;
        for (int l = 1; l <= k; ++l)
            s *= 1.0 - predict_hazard(hd_grid, EventType::CompetingEvent, l, x, arm);
        return s;
    };
    return compute_weights(pi_of, comp_surv, spec, ds, k, a);
}

WeightTable self_normalize(const WeightTable& w, Normalization mode) {
    double total = 0;
    for (double v : w.values) total += v;
    if (total <= 0) throw DegenerateWeights("self_normalize: weights sum to zero");

    WeightTable out = w;
    out.norm = mode;
    const double scale =
        mode == Normalization::SumOne ? total : total / static_cast<double>(w.values.size());
    if (mode == Normalization::Raw) return out;
    for (double& v : out.values) v /= scale;
    return out;
}

EssReport effective_sample_size(const WeightTable& w) {
    if (w.norm != Normalization::SumOne)
        throw ConfigError("effective_sample_size requires SumOne weights");
    double sum_sq = 0;
    for (double v : w.values) sum_sq += v * v;
    if (sum_sq <= 0) throw DegenerateWeights("effective_sample_size: zero weights");
    EssReport r;
    r.n = w.values.size();
    r.absolute_ess = 1.0 / sum_sq;
    r.relative_ess = r.absolute_ess / static_cast<double>(r.n);
    return r;
}

WeightProvider true_weight_provider(const TrueDgp& dgp, InterventionSpec intervention) {
    return [&dgp, intervention](const Dataset& ds, int k, int a) {
        return true_weights(dgp, intervention.for_arm(a), ds, k, a);
    };
}

WeightProvider estimated_weight_provider(FittedClassifier pi_hat,
                                         std::shared_ptr<const HazardGrid> hd_grid,
                                         InterventionSpec intervention) {
    return [pi_hat = std::move(pi_hat), hd_grid = std::move(hd_grid),
            intervention](const Dataset& ds, int k, int a) {
        return estimated_weights(pi_hat, *hd_grid, intervention.for_arm(a), ds, k, a);
    };
}

double renyi2_relative_ess(std::span<const double> p_int, std::span<const double> p_obs) {
    if (p_int.size() != p_obs.size())
        throw ShapeError("renyi2_relative_ess: support size mismatch");
    double sum = 0;
    for (std::size_t i = 0; i < p_int.size(); ++i) {
        if (p_int[i] == 0) continue;
        if (p_obs[i] <= 0)
            throw PositivityError("renyi2_relative_ess: p_int outside support of p_obs");
        sum += p_int[i] * p_int[i] / p_obs[i];
    }
    return 1.0 / sum;
}

}  // namespace riskshift
