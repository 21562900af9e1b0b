#pragma once

// Experiment driver: sweeps a setting's varying parameter across seeded
// replications, fits grids under the requested training strategies, and
// aggregates figure-ready metric rows.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskshift/classifier.hpp"
#include "riskshift/dgp.hpp"
#include "riskshift/effects.hpp"
#include "riskshift/grid.hpp"

namespace riskshift {

enum class SeedRole : std::uint64_t {
    Covariates = 1,
    Treatment = 2,
    Events = 3,
    TrainData = 4,
    TestData = 5,
    CounterfactualArm0 = 6,
    CounterfactualArm1 = 7,
    Split = 8,
    Assign = 9,
    CompetingSim = 10,
};

// Collision-free seed derivation; covariate, treatment and event draws all
// run on independent substreams.
std::uint64_t seed_for(std::uint64_t base_seed, std::uint64_t rep, SeedRole role);

struct ExperimentConfig {
    int setting = 1;  // 1..4
    std::vector<double> sweep_values;
    std::vector<TrainingStrategy> strategies{
        TrainingStrategy::Observational, TrainingStrategy::WeightedTrue,
        TrainingStrategy::WeightedEstimated, TrainingStrategy::Counterfactual};
    std::vector<EffectKind> effects{EffectKind::total(), EffectKind::direct(),
                                    EffectKind::separable_direct(0)};
    ClassifierSpec main_spec = ClassifierSpec::constant();
    ClassifierSpec competing_spec = ClassifierSpec::logistic_l2(100.0);
    ClassifierSpec propensity_spec = ClassifierSpec::logistic_l2(100.0);
    int n_train = 5000;
    int n_test = 10000;
    int n_reps = 10;
    std::uint64_t base_seed = 42;
    int horizon = 30;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

// One aggregated metric across replications.
struct MetricRow {
    std::string setting;
    double param = 0;
    std::string strategy;
    std::string effect;
    std::string metric;  // rmse_tau, rmse_haz_a0, rmse_haz_a1
    int k = 0;
    double mean = 0;
    double se = 0;
    std::size_t n_reps = 0;
    std::uint64_t base_seed = 0;
    std::string status = "ok";
};

// ESS diagnostics from self-normalized true weights on the first
// replication's training data.
struct EssRow {
    std::string intervention;
    int k = 0;
    int a = 0;
    std::size_t n = 0;
    double abs_ess = 0;
    double rel_ess = 0;
    std::size_t n_truncated = 0;
    double param = 0;
};

struct RunResult {
    std::vector<MetricRow> metrics;
    std::vector<EssRow> ess;
};

// Per sweep value and replication: draw training data, fit a grid per
// (strategy, effect), evaluate rmse_tau at the horizon and rmse_haz at every
// step, then summarize. Module errors degrade to the row status; the sweep
// never aborts.
RunResult run_experiment(const ExperimentConfig& cfg, int workers);

// CSV rows `setting,param,strategy,effect,metric,k,mean,se` plus replication
// metadata, so results are reproducible from the file alone.
void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& out);

// CSV rows `intervention,k,a,n,abs_ess,rel_ess,n_truncated`.
void write_ess_csv(const std::vector<EssRow>& rows, std::ostream& out);

}  // namespace riskshift
