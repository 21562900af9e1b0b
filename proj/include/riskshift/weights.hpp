#pragma once

// Importance weights correcting the covariate shift between the
// observational at-risk distribution and the interventional one targeted by
// an estimand, plus self-normalization and effective-sample-size
// diagnostics.
//
// Per unit i in the main at-risk set at (k, a):
//   Total(a):            w_i = 1 / pi_a(x_i)
//   Direct(a):           w_i = 1 / (pi_a(x_i) * prod_{l<=k} (1 - h_D(l, x_i, a)))
//   Separable(a_Y, a_D): w_i = prod_{l<=k} (1 - h_D(l, x_i, a_D))
//                              / (pi_aY(x_i) * prod_{l<=k} (1 - h_D(l, x_i, a_Y)))
// with pi_a(x) = P(A = a | X = x). Denominators are floored at 1e-6 and the
// truncation count is reported rather than raised.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "riskshift/classifier.hpp"
#include "riskshift/data.hpp"
#include "riskshift/dgp.hpp"
#include "riskshift/grid.hpp"
#include "riskshift/hazard.hpp"

namespace riskshift {

inline constexpr double kWeightFloor = 1e-6;

enum class Normalization : std::uint8_t { Raw, MeanOne, SumOne };

struct WeightTable {
    std::vector<double> values;  // aligned with main_at_risk(ds, k, a).indices
    Normalization norm = Normalization::Raw;
    int k = 1;
    int a = 0;
    InterventionSpec intervention;
    std::size_t n_truncated = 0;
};

// Oracle weights from the true propensity and competing hazard. The at-risk
// arm must match the intervention's main arm.
WeightTable true_weights(const TrueDgp& dgp, const InterventionSpec& spec,
                         const Dataset& ds, int k, int a);

// Plug-in weights from a fitted propensity model and a competing-hazard
// grid, both trained on the same data.
WeightTable estimated_weights(const FittedClassifier& pi_hat, const HazardGrid& hd_grid,
                              const InterventionSpec& spec, const Dataset& ds, int k,
                              int a);

// MeanOne preserves the loss scale for weighted ERM; SumOne is the ESS
// convention. Raw tables renormalize losslessly.
WeightTable self_normalize(const WeightTable& w, Normalization mode);

struct EssReport {
    double absolute_ess = 0;
    double relative_ess = 0;
    std::size_t n = 0;
};

// Requires SumOne normalization: absolute ESS = 1 / sum w_i^2.
EssReport effective_sample_size(const WeightTable& w);

// Population counterpart of the relative ESS under exact importance
// weighting: (sum_x p_int(x)^2 / p_obs(x))^{-1}, in (0, 1]. Throws
// PositivityError where p_int puts mass outside the support of p_obs.
double renyi2_relative_ess(std::span<const double> p_int, std::span<const double> p_obs);

// Weight source for grid fitting: raw main-event weights for the at-risk set
// at (k, a), with the intervention retargeted at the cell's arm. Keeps the
// grid code agnostic of where weights come from (oracle vs plug-in).
using WeightProvider = std::function<WeightTable(const Dataset& ds, int k, int a)>;

WeightProvider true_weight_provider(const TrueDgp& dgp, InterventionSpec intervention);
WeightProvider estimated_weight_provider(FittedClassifier pi_hat,
                                         std::shared_ptr<const HazardGrid> hd_grid,
                                         InterventionSpec intervention);

// Grid fit with an explicit weight source for the main-event cells; an empty
// provider means unit weights. The strategy-driven overload in grid.hpp
// routes through this.
HazardGrid fit_hazard_grid(const Dataset& ds, const GridFitConfig& cfg,
                           const WeightProvider& weights_source);

}  // namespace riskshift
