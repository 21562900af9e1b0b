#pragma once

// Semi-synthetic pipeline on paired-outcome data: both potential main-event
// times are real, while treatment assignment and a competing event are
// simulated, so interventional ground truth stays available. Evaluation is
// RMSE of restricted mean survival time on a held-out split.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskshift/classifier.hpp"
#include "riskshift/data.hpp"
#include "riskshift/dgp.hpp"
#include "riskshift/grid.hpp"
#include "riskshift/hazard.hpp"
#include "riskshift/rng.hpp"

namespace riskshift {

// One pair: covariates and true main-event time per arm variant
// (t = K+1 when event-free within the horizon).
struct PairedRecord {
    std::int64_t pair_id = 0;
    std::array<std::vector<double>, 2> x;
    std::array<int, 2> t_main = {0, 0};
};

struct SemiSynthConfig {
    double xi_a = 0.0;              // treatment-selection strength
    double xi_d = 0.0;              // competing-event heterogeneity strength
    std::vector<int> feature_subset;  // 0-based column indices
    int horizon = 11;
};

// Training-set standardization transform, reusable on test rows.
struct Standardizer {
    double mean = 0.0;
    double std = 1.0;
    double operator()(double v) const { return (v - mean) / std; }
};

// Mean/std (n divisor) over the training values. Throws ConstantFeatureError
// when the standard deviation is zero.
Standardizer standardize_train(std::span<const double> values);

double subset_mean(std::span<const double> x, std::span<const int> subset);

// Propensity and simulated competing hazard of the semi-synthetic design:
//   pi(x)        = expit(xi_a * z(x))
//   h_D(1, x, a) = expit(log(0.1) + xi_d * (1 - a) * z(x))
//   h_D(k, x, a) = 0.1 / (k - 1)        for k > 1
// where z(x) is the train-standardized subset mean. The main-event hazard is
// real data and not available here.
class SemiSynthDgp final : public TrueDgp {
public:
    SemiSynthDgp(SemiSynthConfig cfg, Standardizer z);

    double propensity(std::span<const double> x) const override;
    double hazard(EventType event, int k, std::span<const double> x,
                  int a) const override;

    const SemiSynthConfig& config() const { return cfg_; }

private:
    SemiSynthConfig cfg_;
    Standardizer z_;
};

// CSV columns `pair_id,arm,x0,...,t,e` with e in {Y, none}; two rows per
// pair. Day-indexed times (zero_based_days) are shifted by +1; events past
// the horizon become (K+1, none).
std::vector<PairedRecord> read_pairs_csv(std::istream& in, int horizon,
                                         bool zero_based_days);
std::vector<PairedRecord> read_pairs_csv(const std::string& path, int horizon,
                                         bool zero_based_days);

// A ~ Bernoulli(pi(x_pair)) per pair; x_pair is the arm-0 covariate vector.
std::vector<std::int8_t> assign_arms(const std::vector<PairedRecord>& pairs,
                                     const SemiSynthDgp& dgp, std::uint64_t seed);

// One observed unit per pair, main-event data only (competing events are
// layered on by simulate_competing).
Dataset assign_observed(const std::vector<PairedRecord>& pairs,
                        const SemiSynthDgp& dgp, std::uint64_t seed);

// Latent competing-event time in 1..K (K+1 = never) for covariates x in arm
// a; one uniform per step, first success wins.
int simulate_competing_time(std::span<const double> x, int a, const SemiSynthDgp& dgp,
                            Rng& rng);

// Latent times for both arms of every pair, substreamed per (pair, arm).
std::vector<std::array<int, 2>> simulate_competing_times(
    const std::vector<PairedRecord>& pairs, const SemiSynthDgp& dgp,
    std::uint64_t seed);

// Layers simulated competing events over a main-only Dataset: a competing
// event at or before the main time truncates the record (ties resolve to
// the competing event).
Dataset simulate_competing(const Dataset& ds, const SemiSynthDgp& dgp,
                           std::uint64_t seed);

// Training records from latent times: t = min of the observed arm's main
// and competing times, tie resolved to the competing event.
Dataset combine_observed(const std::vector<PairedRecord>& pairs,
                         std::span<const std::int8_t> arms,
                         const std::vector<std::array<int, 2>>& competing_times,
                         int horizon);

// Ground-truth restricted mean survival time for one pair under the
// intervention: min over the applicable event times and K.
int ground_truth_rmst(const PairedRecord& pair, const std::array<int, 2>& t_competing,
                      const InterventionSpec& spec, int K);

// RMSE of model RMST against ground truth over test pairs; predictions use
// the main-arm twin's covariates.
double rmse_rmst(const HazardSource& model, const std::vector<PairedRecord>& test,
                 const std::vector<std::array<int, 2>>& t_competing,
                 const InterventionSpec& spec, int K);

// ---- experiment runner ---------------------------------------------------

struct SemiSynthRunConfig {
    std::vector<double> xi_a_values{0.0};
    std::vector<double> xi_d_values{0.0};
    std::vector<int> feature_subset;
    int horizon = 11;
    int n_reps = 5;
    std::uint64_t base_seed = 42;
    bool zero_based_days = true;
    std::vector<TrainingStrategy> strategies{
        TrainingStrategy::Observational, TrainingStrategy::WeightedTrue,
        TrainingStrategy::WeightedEstimated, TrainingStrategy::Counterfactual};
    ClassifierSpec main_spec = ClassifierSpec::constant();
    ClassifierSpec competing_spec = ClassifierSpec::logistic_l2(100.0);
    ClassifierSpec propensity_spec = ClassifierSpec::logistic_l2(100.0);
};

SemiSynthRunConfig semi_synth_config_from_json(const nlohmann::json& j);

struct SemiSynthRow {
    double xi_a = 0;
    double xi_d = 0;
    std::string strategy;
    std::string spec;   // total / direct / separable
    int arm = 0;
    double rmse_rmst_mean = 0;
    double rmse_rmst_se = 0;
    std::string status = "ok";
};

// Full sweep: per (xi_a, xi_d) cross product, n_reps replications of
// split / assign / simulate / fit / evaluate, summarized per strategy,
// intervention family and arm.
std::vector<SemiSynthRow> run_semi_synth(const SemiSynthRunConfig& cfg,
                                         const std::vector<PairedRecord>& pairs,
                                         int workers);

// CSV rows `xi_a,xi_d,strategy,spec,arm,rmse_rmst_mean,rmse_rmst_se`.
void write_semi_synth_csv(const std::vector<SemiSynthRow>& rows, std::ostream& out);

}  // namespace riskshift
