#pragma once

// Counterfactual risks, heterogeneous treatment effects, and restricted mean
// survival times computed from any hazard source (fitted grid or exact DGP).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "riskshift/dgp.hpp"
#include "riskshift/hazard.hpp"
#include "riskshift/matrix.hpp"

namespace riskshift {

struct EffectKind {
    enum class Type : std::uint8_t {
        TotalRiskDiff,
        DirectRiskDiff,
        SeparableDirectRiskDiff,    // fixed_arm = a_D
        SeparableIndirectRiskDiff,  // fixed_arm = a_Y
    };
    Type type = Type::TotalRiskDiff;
    int fixed_arm = 0;

    static EffectKind total() { return {Type::TotalRiskDiff, 0}; }
    static EffectKind direct() { return {Type::DirectRiskDiff, 0}; }
    static EffectKind separable_direct(int a_d) {
        return {Type::SeparableDirectRiskDiff, a_d};
    }
    static EffectKind separable_indirect(int a_y) {
        return {Type::SeparableIndirectRiskDiff, a_y};
    }

    std::string name() const;

    // Intervention family targeted when fitting a grid for this effect; the
    // per-arm main target is resolved with InterventionSpec::for_arm.
    InterventionSpec fit_intervention() const;
};

EffectKind effect_from_json(const nlohmann::json& j);

// Cumulative incidence of the main event by step k under treatment a,
// accounting for competing-event attrition.
double total_risk(const HazardSource& h, std::span<const double> x, int a, int k);

// Same with every competing-hazard factor removed (competing events treated
// as eliminated).
double direct_risk(const HazardSource& h, std::span<const double> x, int a, int k);

// Main-event hazards at arm a_y, competing-event hazards at arm a_d.
double separable_risk(const HazardSource& h, std::span<const double> x, int a_y,
                      int a_d, int k);

// Competing-event analogue of total_risk with the within-step ordering
// preserved, so 1 - total - competing equals the all-cause survival product.
double competing_total_risk(const HazardSource& h, std::span<const double> x, int a,
                            int k);

// Risk under an arbitrary intervention spec.
double risk(const HazardSource& h, const InterventionSpec& spec,
            std::span<const double> x, int k);

double hte(const HazardSource& h, std::span<const double> x, const EffectKind& kind,
           int k);

// Expected event-free time truncated at K (area under the event-free
// survival curve): 1 + sum_{l=1}^{K-1} prod_{q<=l} S_q, with the competing
// factor dropped for Direct interventions.
double rmst(const HazardSource& h, std::span<const double> x,
            const InterventionSpec& spec, int K);

// CSV rows `x...,kind,k,tau_hat` for a batch of covariate rows.
void write_hte_batch_csv(const HazardSource& h, const Matrix& x,
                         const EffectKind& kind, int k, std::ostream& out);

}  // namespace riskshift
