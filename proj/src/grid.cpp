#include "riskshift/grid.hpp"

#include <cmath>
#include <ostream>

#include "riskshift/errors.hpp"
#include "riskshift/weights.hpp"

namespace riskshift {

std::string strategy_name(TrainingStrategy s) {
    switch (s) {
        case TrainingStrategy::Observational: return "observational";
        case TrainingStrategy::WeightedTrue: return "weighted_true";
        case TrainingStrategy::WeightedEstimated: return "weighted_estimated";
        case TrainingStrategy::Counterfactual: return "counterfactual";
    }
    return {};
}

TrainingStrategy strategy_from_name(const std::string& name) {
    if (name == "observational") return TrainingStrategy::Observational;
    if (name == "weighted_true") return TrainingStrategy::WeightedTrue;
    if (name == "weighted_estimated") return TrainingStrategy::WeightedEstimated;
    if (name == "counterfactual") return TrainingStrategy::Counterfactual;
    throw ConfigError("unknown strategy '" + name + "'");
}

HazardGrid::HazardGrid(int horizon, std::vector<FittedClassifier> main,
                       std::vector<FittedClassifier> competing,
                       std::vector<CellDiagnostics> diagnostics)
    : horizon_(horizon),
      main_(std::move(main)),
      competing_(std::move(competing)),
      diagnostics_(std::move(diagnostics)) {
    const std::size_t cells = static_cast<std::size_t>(horizon_) * 2;
    if (main_.size() != cells || competing_.size() != cells)
        throw ShapeError("HazardGrid: expected 2K cells per event");
}

HazardGrid HazardGrid::from_constants(int horizon, const std::vector<double>& main_p,
                                      const std::vector<double>& competing_p) {
    const std::size_t cells = static_cast<std::size_t>(horizon) * 2;
    if (main_p.size() != cells || competing_p.size() != cells)
        throw ShapeError("from_constants: expected 2K probabilities per event");
    std::vector<FittedClassifier> main, competing;
    main.reserve(cells);
    competing.reserve(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        main.push_back(FittedClassifier::constant(main_p[i]));
        competing.push_back(FittedClassifier::constant(competing_p[i]));
    }
    return HazardGrid(horizon, std::move(main), std::move(competing), {});
}

const FittedClassifier& HazardGrid::cell(EventType event, int k, int a) const {
    if (k < 1 || k > horizon_ || (a != 0 && a != 1))
        throw ShapeError("HazardGrid::cell: index out of range");
    return event == EventType::MainEvent ? main_[idx(k, a)] : competing_[idx(k, a)];
}

double HazardGrid::hazard(EventType event, int k, std::span<const double> x,
                          int a) const {
    return cell(event, k, a).predict_proba(x);
}

double predict_hazard(const HazardGrid& grid, EventType event, int k,
                      std::span<const double> x, int a) {
    return grid.hazard(event, k, x, a);
}

FittedClassifier fit_propensity(const Dataset& ds, const ClassifierSpec& spec) {
    if (ds.size() == 0) throw EmptyAtRiskSet("fit_propensity: empty dataset");
    bool seen[2] = {false, false};
    Matrix features(ds.size(), static_cast<std::size_t>(ds.dim()));
    std::vector<std::uint8_t> labels(ds.size());
    std::vector<double> weights(ds.size(), 1.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto xi = ds.x(i);
        std::copy(xi.begin(), xi.end(), features.row(i).begin());
        labels[i] = static_cast<std::uint8_t>(ds.a(i));
        seen[ds.a(i) == 1] = true;
    }
    if (!seen[0] || !seen[1])
        throw SingleArmError("fit_propensity: dataset contains a single arm");
    return fit(spec, features, labels, weights);
}

namespace {

struct CellFit {
    FittedClassifier model;
    CellDiagnostics diag;
};

CellFit fit_cell(const Dataset& ds, const AtRiskSample& s, const ClassifierSpec& spec,
                 const std::vector<double>* weights, std::size_t n_truncated) {
    CellDiagnostics diag{s.event, s.k,    s.a,   s.indices.size(),
                         0.0,     true,  false, n_truncated};
    if (s.indices.empty()) {
        diag.degenerate = true;
        return {FittedClassifier::constant(0.0), diag};
    }
    Matrix features = at_risk_features(ds, s);
    std::vector<double> unit;
    const std::vector<double>* w = weights;
    if (w == nullptr) {
        unit.assign(s.indices.size(), 1.0);
        w = &unit;
    }
    FittedClassifier model = fit(spec, features, s.labels, *w);
    diag.ess = model.diagnostics().effective_n;
    diag.converged = model.diagnostics().converged;
    diag.degenerate = model.diagnostics().degenerate;
    return {std::move(model), diag};
}

}  // namespace

HazardGrid fit_hazard_grid(const Dataset& ds, const GridFitConfig& cfg,
                           const WeightProvider& weights_source) {
    const int K = ds.horizon();
    const std::size_t cells = static_cast<std::size_t>(K) * 2;

    std::vector<FittedClassifier> main, competing;
    main.reserve(cells);
    competing.reserve(cells);
    std::vector<CellDiagnostics> diag;
    diag.reserve(cells * 2);

    // Pass 1: competing cells, unit weights.
    for (int k = 1; k <= K; ++k) {
        for (int a = 0; a <= 1; ++a) {
            auto cell = fit_cell(ds, competing_at_risk(ds, k, a), cfg.competing_spec,
                                 nullptr, 0);
            competing.push_back(std::move(cell.model));
            diag.push_back(cell.diag);
        }
    }

    // Pass 2: main cells with provider weights.
    for (int k = 1; k <= K; ++k) {
        for (int a = 0; a <= 1; ++a) {
            const AtRiskSample s = main_at_risk(ds, k, a);
            std::vector<double> w;
            std::size_t n_truncated = 0;
            const std::vector<double>* w_ptr = nullptr;
            if (weights_source && !s.indices.empty()) {
                WeightTable raw = weights_source(ds, k, a);
                n_truncated = raw.n_truncated;
                w = self_normalize(raw, Normalization::MeanOne).values;
                w_ptr = &w;
            }
            auto cell = fit_cell(ds, s, cfg.main_spec, w_ptr, n_truncated);
            main.push_back(std::move(cell.model));
            diag.push_back(cell.diag);
        }
    }

    return HazardGrid(K, std::move(main), std::move(competing), std::move(diag));
}

HazardGrid fit_hazard_grid(const Dataset& ds, const GridFitConfig& cfg,
                           const TrueDgp* dgp) {
    switch (cfg.strategy) {
        case TrainingStrategy::Observational:
        case TrainingStrategy::Counterfactual:
            return fit_hazard_grid(ds, cfg, WeightProvider{});
        case TrainingStrategy::WeightedTrue:
            if (dgp == nullptr)
                throw ConfigError("WeightedTrue requires a true DGP handle");
            return fit_hazard_grid(ds, cfg, true_weight_provider(*dgp, cfg.intervention));
        case TrainingStrategy::WeightedEstimated: {
            // Plug-in weights come from models fitted on the same training
            // data: a propensity fit plus a unit-weight competing grid.
            FittedClassifier pi_hat = fit_propensity(ds, cfg.propensity_spec);
            GridFitConfig hd_cfg = cfg;
            hd_cfg.strategy = TrainingStrategy::Observational;
            auto hd_grid = std::make_shared<const HazardGrid>(
                fit_hazard_grid(ds, hd_cfg, WeightProvider{}));
            return fit_hazard_grid(
                ds, cfg,
                estimated_weight_provider(std::move(pi_hat), std::move(hd_grid),
                                          cfg.intervention));
        }
    }
    throw ConfigError("unknown training strategy");
}

void write_grid_diagnostics_csv(const HazardGrid& grid, std::ostream& out) {
    out << "event,k,a,n_at_risk,ess,converged\n";
    for (const auto& d : grid.diagnostics()) {
        out << (d.event == EventType::MainEvent ? "Y" : "D") << "," << d.k << ","
            << d.a << "," << d.n_at_risk << "," << d.ess << ","
            << (d.converged ? 1 : 0) << "\n";
    }
}

}  // namespace riskshift
