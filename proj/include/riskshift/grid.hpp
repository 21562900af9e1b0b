#pragma once

// Fits the K x 2 grids of main-event and competing-event hazard classifiers
// under a training strategy, plus the propensity model. Competing models are
// always fit with unit weights; the strategy decides the main-event weights.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "riskshift/classifier.hpp"
#include "riskshift/data.hpp"
#include "riskshift/dgp.hpp"
#include "riskshift/hazard.hpp"

namespace riskshift {

enum class TrainingStrategy : std::uint8_t {
    Observational,
    WeightedTrue,
    WeightedEstimated,
    Counterfactual,
};

std::string strategy_name(TrainingStrategy s);
TrainingStrategy strategy_from_name(const std::string& name);

struct CellDiagnostics {
    EventType event;
    int k;
    int a;
    std::size_t n_at_risk;
    double ess;        // effective sample count of the fitting weights
    bool converged;
    bool degenerate;
    std::size_t n_truncated;  // weight denominators hit by the floor
};

class HazardGrid final : public HazardSource {
public:
    HazardGrid(int horizon, std::vector<FittedClassifier> main,
               std::vector<FittedClassifier> competing,
               std::vector<CellDiagnostics> diagnostics);

    // Test/oracle helper: a grid of constant cells.
    static HazardGrid from_constants(int horizon,
                                     const std::vector<double>& main_p,
                                     const std::vector<double>& competing_p);

    double hazard(EventType event, int k, std::span<const double> x,
                  int a) const override;

    const FittedClassifier& cell(EventType event, int k, int a) const;
    int horizon() const { return horizon_; }
    const std::vector<CellDiagnostics>& diagnostics() const { return diagnostics_; }

private:
    static std::size_t idx(int k, int a) {
        return static_cast<std::size_t>(k - 1) * 2 + static_cast<std::size_t>(a);
    }
    int horizon_;
    std::vector<FittedClassifier> main_;
    std::vector<FittedClassifier> competing_;
    std::vector<CellDiagnostics> diagnostics_;
};

// Delegates to the cell's classifier; predictions are clamped.
double predict_hazard(const HazardGrid& grid, EventType event, int k,
                      std::span<const double> x, int a);

// P(A=1 | X=x) fitted on all units with unit weights. Throws SingleArmError
// when only one arm is present.
FittedClassifier fit_propensity(const Dataset& ds, const ClassifierSpec& spec);

struct GridFitConfig {
    ClassifierSpec main_spec = ClassifierSpec::constant();
    ClassifierSpec competing_spec = ClassifierSpec::logistic_l2(100.0);
    ClassifierSpec propensity_spec = ClassifierSpec::logistic_l2(100.0);
    TrainingStrategy strategy = TrainingStrategy::Observational;
    InterventionSpec intervention = InterventionSpec::total(0);
};

// Fits all 2K main and 2K competing cells. `dgp` is required for
// WeightedTrue. For Counterfactual, `ds` must itself be an interventional
// sample (typically the two arm-forced samples appended). Empty cells fall
// back to a zero-hazard constant fit flagged degenerate; the grid never
// aborts.
HazardGrid fit_hazard_grid(const Dataset& ds, const GridFitConfig& cfg,
                           const TrueDgp* dgp = nullptr);

// CSV rows `event,k,a,n_at_risk,ess,converged`.
void write_grid_diagnostics_csv(const HazardGrid& grid, std::ostream& out);

}  // namespace riskshift
