#pragma once

// Evaluation metrics: RMSE of effect estimates against the exact oracle,
// RMSE of hazards under the interventional at-risk distribution, and
// replication summaries.

#include <span>

#include "riskshift/dgp.hpp"
#include "riskshift/effects.hpp"
#include "riskshift/hazard.hpp"
#include "riskshift/matrix.hpp"

namespace riskshift {

struct ReplicationSummary {
    double mean = 0;
    double std_error = 0;
    std::size_t n_reps = 0;
};

// Mean and standard error (sample std with n-1 divisor over sqrt(n)).
// Throws InsufficientReplications for fewer than two values.
ReplicationSummary summarize(std::span<const double> values);

// Root mean squared error of the estimated effect over test covariate rows,
// against the exact-risk contrast.
double rmse_tau(const HazardSource& model, const DgpConfig& dgp, const EffectKind& kind,
                const Matrix& test_x, int k);

// Root mean squared error of the step-k main-event hazard under the exact
// interventional at-risk distribution for arm a.
double rmse_haz(const HazardSource& model, const DgpConfig& dgp,
                const InterventionSpec& spec, int a, int k);

}  // namespace riskshift
