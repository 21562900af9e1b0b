#pragma once

// Synthetic data generating process: two correlated binary risk factors,
// logistic treatment assignment, and piecewise-constant hazards shifted by
// treatment. Provides observational and interventional samplers plus exact
// closed-form oracles (risks and at-risk covariate distributions) computed
// over the four covariate cells.

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include <json.hpp>

#include "riskshift/data.hpp"
#include "riskshift/hazard.hpp"
#include "riskshift/matrix.hpp"

namespace riskshift {

// h_E(k, x, a) = p_low + a*p_low_tau   if x[support] = 0
//              = p_high + a*p_high_tau if x[support] = 1
// support_index is 1-based (1 selects x1).
struct HazardSpec {
    double p_low = 0.01;
    double p_low_tau = 0.0;
    double p_high = 0.01;
    double p_high_tau = 0.0;
    int support_index = 1;
};

struct DgpConfig {
    double rho = 0.35;
    HazardSpec hazard_main;
    HazardSpec hazard_competing;
    double xi = 0.0;
    int propensity_index = 1;  // 1-based
    int horizon = 30;
    int n_train = 5000;
    int n_test = 10000;
};

// Throws ConfigError when hazards leave (0, 1] under either arm, when the
// covariate correlation is infeasible, or when indices are out of range.
void validate_config(const DgpConfig& cfg);

// Built-in benchmark settings; `varying` is xi for settings 1 and 4, the
// high-group competing treatment shift for setting 2, and the high-group
// competing baseline for setting 3.
DgpConfig preset(int setting, double varying);

DgpConfig dgp_config_from_json(const nlohmann::json& j);
nlohmann::json dgp_config_to_json(const DgpConfig& cfg);

struct InterventionSpec {
    enum class Kind : std::uint8_t { Total, Direct, Separable };
    Kind kind = Kind::Total;
    int a_main = 0;  // arm of the main-event hazard (a, or a_Y)
    int a_comp = 0;  // arm of the competing-event hazard (a_D; unused for Direct)

    static InterventionSpec total(int a) { return {Kind::Total, a, a}; }
    static InterventionSpec direct(int a) { return {Kind::Direct, a, a}; }
    static InterventionSpec separable(int a_y, int a_d) {
        return {Kind::Separable, a_y, a_d};
    }

    // Observational arm whose main-event hazards this intervention targets.
    int arm() const { return a_main; }

    // Same intervention retargeted at another main arm; used when fitting a
    // full grid (each arm's cells are weighted toward their own target).
    InterventionSpec for_arm(int a) const {
        InterventionSpec s = *this;
        s.a_main = a;
        if (kind != Kind::Separable) s.a_comp = a;
        return s;
    }

    std::string name() const;
};

InterventionSpec intervention_from_json(const nlohmann::json& j);
nlohmann::json intervention_to_json(const InterventionSpec& s);

class SynthDgp final : public TrueDgp {
public:
    explicit SynthDgp(DgpConfig cfg);

    double hazard(EventType event, int k, std::span<const double> x,
                  int a) const override;
    double propensity(std::span<const double> x) const override;

    const DgpConfig& config() const { return cfg_; }

private:
    DgpConfig cfg_;
};

double true_hazard(const DgpConfig& cfg, EventType event, int k,
                   std::span<const double> x, int a);
double propensity(const DgpConfig& cfg, std::span<const double> x);

// ---- sampling ----------------------------------------------------------

// n rows of (x1, x2); deterministic given seed.
Matrix sample_covariates(std::size_t n, double rho, std::uint64_t seed);

Dataset sample_observational(const DgpConfig& cfg, std::size_t n, std::uint64_t seed);
inline Dataset sample_observational(const DgpConfig& cfg, std::uint64_t seed) {
    return sample_observational(cfg, static_cast<std::size_t>(cfg.n_train), seed);
}

// Counterfactual sample. Total(a): treatment forced to a. Direct(a):
// treatment forced, competing hazard forced to 0. Separable(aY, aD): main
// events drawn at arm aY, competing events at arm aD; records carry a = aY.
// Couplable with sample_observational under the same seed.
Dataset sample_interventional(const DgpConfig& cfg, const InterventionSpec& spec,
                              std::size_t n, std::uint64_t seed);
inline Dataset sample_interventional(const DgpConfig& cfg, const InterventionSpec& spec,
                                     std::uint64_t seed) {
    return sample_interventional(cfg, spec, static_cast<std::size_t>(cfg.n_train), seed);
}

// ---- exact oracles over the 4 covariate cells ---------------------------

// Cell c encodes (x1, x2) = (c >> 1, c & 1).
std::array<double, 2> cell_covariates(int cell);
int cell_of(std::span<const double> x);

// Marginal covariate law P(X = cell).
std::array<double, 4> covariate_cell_probs(const DgpConfig& cfg);

// Interventional main-event at-risk distribution at step k, normalized over
// the 4 cells. Throws DegenerateDistribution on zero total mass.
std::array<double, 4> exact_at_risk_distribution(const DgpConfig& cfg,
                                                 const InterventionSpec& spec, int k);

// Observational main-event at-risk distribution at (k, a); the denominator
// law for the importance-weight diagnostics.
std::array<double, 4> exact_observational_at_risk(const DgpConfig& cfg, int k, int a);

// Closed-form counterfactual risk of the main event by step k under the
// intervention, for one covariate vector.
double exact_risk(const DgpConfig& cfg, const InterventionSpec& spec,
                  std::span<const double> x, int k);

}  // namespace riskshift
