#include "riskshift/effects.hpp"

#include <ostream>

#include "riskshift/errors.hpp"

namespace riskshift {

std::string EffectKind::name() const {
    switch (type) {
        case Type::TotalRiskDiff: return "total";
        case Type::DirectRiskDiff: return "direct";
        case Type::SeparableDirectRiskDiff:
            return "separable_direct(a_d=" + std::to_string(fixed_arm) + ")";
        case Type::SeparableIndirectRiskDiff:
            return "separable_indirect(a_y=" + std::to_string(fixed_arm) + ")";
    }
    return {};
}

InterventionSpec EffectKind::fit_intervention() const {
    switch (type) {
        case Type::TotalRiskDiff: return InterventionSpec::total(0);
        case Type::DirectRiskDiff: return InterventionSpec::direct(0);
        case Type::SeparableDirectRiskDiff:
            return InterventionSpec::separable(0, fixed_arm);
        case Type::SeparableIndirectRiskDiff:
            // The contrast varies a_D; weight toward the a_D = 1 target.
            return InterventionSpec::separable(fixed_arm, 1);
    }
    return InterventionSpec::total(0);
}

EffectKind effect_from_json(const nlohmann::json& j) {
    try {
        if (j.is_string()) {
            const std::string name = j.get<std::string>();
            if (name == "total") return EffectKind::total();
            if (name == "direct") return EffectKind::direct();
            if (name == "separable_direct") return EffectKind::separable_direct(0);
            if (name == "separable_indirect") return EffectKind::separable_indirect(0);
            throw ConfigError("unknown effect '" + name + "'");
        }
        const std::string name = j.at("kind").get<std::string>();
        if (name == "total") return EffectKind::total();
        if (name == "direct") return EffectKind::direct();
        if (name == "separable_direct")
            return EffectKind::separable_direct(j.value("a_d", 0));
        if (name == "separable_indirect")
            return EffectKind::separable_indirect(j.value("a_y", 0));
        throw ConfigError("unknown effect '" + name + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad effect: ") + e.what());
    }
}

namespace {

// Shared accumulation: risk_k = sum_l hY(l) * prod_{q<l} (1-hY(q))(1-hD(q)),
// with hD supplied per intervention.
template <typename MainFn, typename CompFn>
double accumulate_risk(MainFn&& h_y, CompFn&& h_d, int k) {
    double out = 0.0, surv = 1.0;
    for (int l = 1; l <= k; ++l) {
        out += h_y(l) * surv;
        surv *= (1.0 - h_y(l)) * (1.0 - h_d(l));
    }
    return out;
}

}  // namespace

double total_risk(const HazardSource& h, std::span<const double> x, int a, int k) {
    return accumulate_risk(
        [&](int l) { return h.hazard(EventType::MainEvent, l, x, a); },
        [&](int l) { return h.hazard(EventType::CompetingEvent, l, x, a); }, k);
}

double direct_risk(const HazardSource& h, std::span<const double> x, int a, int k) {
    return accumulate_risk(
        [&](int l) { return h.hazard(EventType::MainEvent, l, x, a); },
        [](int) { return 0.0; }, k);
}

double separable_risk(const HazardSource& h, std::span<const double> x, int a_y,
                      int a_d, int k) {
    return accumulate_risk(
        [&](int l) { return h.hazard(EventType::MainEvent, l, x, a_y); },
        [&](int l) { return h.hazard(EventType::CompetingEvent, l, x, a_d); }, k);
}

double competing_total_risk(const HazardSource& h, std::span<const double> x, int a,
                            int k) {
    double out = 0.0, surv = 1.0;
    for (int l = 1; l <= k; ++l) {
        const double hy = h.hazard(EventType::MainEvent, l, x, a);
        const double hd = h.hazard(EventType::CompetingEvent, l, x, a);
        out += (1.0 - hy) * hd * surv;
        surv *= (1.0 - hy) * (1.0 - hd);
    }
    return out;
}

double risk(const HazardSource& h, const InterventionSpec& spec,
            std::span<const double> x, int k) {
    switch (spec.kind) {
        case InterventionSpec::Kind::Total: return total_risk(h, x, spec.a_main, k);
        case InterventionSpec::Kind::Direct: return direct_risk(h, x, spec.a_main, k);
        case InterventionSpec::Kind::Separable:
            return separable_risk(h, x, spec.a_main, spec.a_comp, k);
    }
    return 0;
}

double hte(const HazardSource& h, std::span<const double> x, const EffectKind& kind,
           int k) {
    switch (kind.type) {
        case EffectKind::Type::TotalRiskDiff:
            return total_risk(h, x, 1, k) - total_risk(h, x, 0, k);
        case EffectKind::Type::DirectRiskDiff:
            return direct_risk(h, x, 1, k) - direct_risk(h, x, 0, k);
        case EffectKind::Type::SeparableDirectRiskDiff:
            return separable_risk(h, x, 1, kind.fixed_arm, k) -
                   separable_risk(h, x, 0, kind.fixed_arm, k);
        case EffectKind::Type::SeparableIndirectRiskDiff:
            return separable_risk(h, x, kind.fixed_arm, 1, k) -
                   separable_risk(h, x, kind.fixed_arm, 0, k);
    }
    return 0;
}

double rmst(const HazardSource& h, std::span<const double> x,
            const InterventionSpec& spec, int K) {
    const bool direct = spec.kind == InterventionSpec::Kind::Direct;
    double out = 1.0, surv = 1.0;
    for (int l = 1; l <= K - 1; ++l) {
        const double hy = h.hazard(EventType::MainEvent, l, x, spec.a_main);
        const double hd =
            direct ? 0.0 : h.hazard(EventType::CompetingEvent, l, x, spec.a_comp);
        surv *= (1.0 - hy) * (1.0 - hd);
        out += surv;
    }
    return out;
}

void write_hte_batch_csv(const HazardSource& h, const Matrix& x,
                         const EffectKind& kind, int k, std::ostream& out) {
    for (std::size_t j = 0; j < x.cols; ++j) out << "x" << j << ",";
    out << "kind,k,tau_hat\n";
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (double v : x.row(r)) out << v << ",";
        out << kind.name() << "," << k << "," << hte(h, x.row(r), kind, k) << "\n";
    }
}

}  // namespace riskshift
