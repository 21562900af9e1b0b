#include "riskshift/experiment.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

#include "riskshift/errors.hpp"
#include "riskshift/metrics.hpp"
#include "riskshift/rng.hpp"
#include "riskshift/weights.hpp"

namespace riskshift {

std::uint64_t seed_for(std::uint64_t base_seed, std::uint64_t rep, SeedRole role) {
    return mix_seed(mix_seed(base_seed, rep), 0xABCD0000 + static_cast<std::uint64_t>(role));
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    try {
        ExperimentConfig cfg;
        cfg.setting = j.at("setting").get<int>();
        if (cfg.setting < 1 || cfg.setting > 4)
            throw ConfigError("setting must be 1..4 (use the semi-synth runner otherwise)");
        cfg.sweep_values = j.at("sweep_values").get<std::vector<double>>();
        if (cfg.sweep_values.empty()) throw ConfigError("sweep_values must be nonempty");
        if (j.contains("strategies")) {
            cfg.strategies.clear();
            for (const auto& s : j.at("strategies"))
                cfg.strategies.push_back(strategy_from_name(s.get<std::string>()));
        }
        if (j.contains("effects")) {
            cfg.effects.clear();
            for (const auto& e : j.at("effects"))
                cfg.effects.push_back(effect_from_json(e));
        }
        if (j.contains("main_spec"))
            cfg.main_spec = classifier_spec_from_json(j.at("main_spec"));
        if (j.contains("competing_spec"))
            cfg.competing_spec = classifier_spec_from_json(j.at("competing_spec"));
        if (j.contains("propensity_spec"))
            cfg.propensity_spec = classifier_spec_from_json(j.at("propensity_spec"));
        cfg.n_train = j.value("n_train", 5000);
        cfg.n_test = j.value("n_test", 10000);
        cfg.n_reps = j.value("n_reps", 10);
        cfg.base_seed = j.value("base_seed", std::uint64_t{42});
        cfg.horizon = j.value("horizon", 30);
        if (cfg.n_reps < 2) throw ConfigError("n_reps must be >= 2");
        if (cfg.strategies.empty() || cfg.effects.empty())
            throw ConfigError("strategies and effects must be nonempty");
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad experiment config: ") + e.what());
    }
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json strategies = nlohmann::json::array();
    for (auto s : cfg.strategies) strategies.push_back(strategy_name(s));
    nlohmann::json effects = nlohmann::json::array();
    for (const auto& e : cfg.effects) {
        switch (e.type) {
            case EffectKind::Type::TotalRiskDiff: effects.push_back("total"); break;
            case EffectKind::Type::DirectRiskDiff: effects.push_back("direct"); break;
            case EffectKind::Type::SeparableDirectRiskDiff:
                effects.push_back({{"kind", "separable_direct"}, {"a_d", e.fixed_arm}});
                break;
            case EffectKind::Type::SeparableIndirectRiskDiff:
                effects.push_back({{"kind", "separable_indirect"}, {"a_y", e.fixed_arm}});
                break;
        }
    }
    return {{"setting", cfg.setting},
            {"sweep_values", cfg.sweep_values},
            {"strategies", strategies},
            {"effects", effects},
            {"main_spec", classifier_spec_to_json(cfg.main_spec)},
            {"competing_spec", classifier_spec_to_json(cfg.competing_spec)},
            {"propensity_spec", classifier_spec_to_json(cfg.propensity_spec)},
            {"n_train", cfg.n_train},
            {"n_test", cfg.n_test},
            {"n_reps", cfg.n_reps},
            {"base_seed", cfg.base_seed},
            {"horizon", cfg.horizon}};
}

namespace {

struct RepMetrics {
    // [strategy][effect] -> rmse_tau; [strategy][effect][arm][k-1] -> rmse_haz
    std::vector<double> tau;
    std::vector<double> haz;
    std::vector<std::string> status;  // per (strategy, effect)
};

DgpConfig config_for(const ExperimentConfig& cfg, double value) {
    DgpConfig dgp = preset(cfg.setting, value);
    dgp.n_train = cfg.n_train;
    dgp.n_test = cfg.n_test;
    dgp.horizon = cfg.horizon;
    validate_config(dgp);
    return dgp;
}

// Fits the grid a strategy uses for one effect. Observational grids ignore
// the intervention, so one fit is shared across effects by the caller.
HazardGrid fit_strategy_grid(const ExperimentConfig& cfg, const DgpConfig& dgp_cfg,
                             const SynthDgp& dgp, const Dataset& ds,
                             TrainingStrategy strategy, const EffectKind& effect,
                             std::uint64_t base_seed, int rep) {
    GridFitConfig gc;
    gc.main_spec = cfg.main_spec;
    gc.competing_spec = cfg.competing_spec;
    gc.propensity_spec = cfg.propensity_spec;
    gc.strategy = strategy;
    gc.intervention = effect.fit_intervention();

    if (strategy != TrainingStrategy::Counterfactual)
        return fit_hazard_grid(ds, gc, &dgp);

    // One interventional sample of size n per forced arm.
    Dataset cf = sample_interventional(
        dgp_cfg, gc.intervention.for_arm(0), static_cast<std::size_t>(cfg.n_train),
        seed_for(base_seed, static_cast<std::uint64_t>(rep), SeedRole::CounterfactualArm0));
    cf.append(sample_interventional(
        dgp_cfg, gc.intervention.for_arm(1), static_cast<std::size_t>(cfg.n_train),
        seed_for(base_seed, static_cast<std::uint64_t>(rep), SeedRole::CounterfactualArm1)));
    return fit_hazard_grid(cf, gc, nullptr);
}

RepMetrics run_rep(const ExperimentConfig& cfg, const DgpConfig& dgp_cfg, int rep) {
    const int K = dgp_cfg.horizon;
    const std::size_t n_cells = cfg.strategies.size() * cfg.effects.size();
    RepMetrics out;
    out.tau.assign(n_cells, std::numeric_limits<double>::quiet_NaN());
    out.haz.assign(n_cells * 2 * static_cast<std::size_t>(K),
                   std::numeric_limits<double>::quiet_NaN());
    out.status.assign(n_cells, "ok");

    const SynthDgp dgp(dgp_cfg);
    const Dataset ds = sample_observational(
        dgp_cfg, static_cast<std::size_t>(cfg.n_train),
        seed_for(cfg.base_seed, static_cast<std::uint64_t>(rep), SeedRole::TrainData));
    const Matrix test_x = sample_covariates(
        static_cast<std::size_t>(cfg.n_test), dgp_cfg.rho,
        seed_for(cfg.base_seed, static_cast<std::uint64_t>(rep), SeedRole::TestData));

    for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
        const TrainingStrategy strategy = cfg.strategies[si];
        // The observational grid does not depend on the effect; fit it once.
        std::unique_ptr<HazardGrid> shared;
        if (strategy == TrainingStrategy::Observational) {
            try {
                GridFitConfig gc;
                gc.main_spec = cfg.main_spec;
                gc.competing_spec = cfg.competing_spec;
                gc.propensity_spec = cfg.propensity_spec;
                gc.strategy = strategy;
                shared = std::make_unique<HazardGrid>(fit_hazard_grid(ds, gc, nullptr));
            } catch (const std::exception& e) {
                for (std::size_t ei = 0; ei < cfg.effects.size(); ++ei)
                    out.status[si * cfg.effects.size() + ei] = e.what();
                continue;
            }
        }
        for (std::size_t ei = 0; ei < cfg.effects.size(); ++ei) {
            const std::size_t cell = si * cfg.effects.size() + ei;
            try {
                const EffectKind& effect = cfg.effects[ei];
                const HazardGrid grid =
                    shared ? *shared
                           : fit_strategy_grid(cfg, dgp_cfg, dgp, ds, strategy, effect,
                                               cfg.base_seed, rep);
                out.tau[cell] = rmse_tau(grid, dgp_cfg, effect, test_x, K);
                const InterventionSpec family = effect.fit_intervention();
                for (int a = 0; a <= 1; ++a) {
                    for (int k = 1; k <= K; ++k) {
                        out.haz[(cell * 2 + static_cast<std::size_t>(a)) *
                                    static_cast<std::size_t>(K) +
                                static_cast<std::size_t>(k - 1)] =
                            rmse_haz(grid, dgp_cfg, family, a, k);
                    }
                }
            } catch (const std::exception& e) {
                out.status[cell] = e.what();
            }
        }
    }
    return out;
}

std::vector<EssRow> ess_diagnostics(const ExperimentConfig& cfg, const DgpConfig& dgp_cfg,
                                    double value) {
    std::vector<EssRow> rows;
    const SynthDgp dgp(dgp_cfg);
    const Dataset ds = sample_observational(
        dgp_cfg, static_cast<std::size_t>(cfg.n_train),
        seed_for(cfg.base_seed, 0, SeedRole::TrainData));
    for (const auto& effect : cfg.effects) {
        const InterventionSpec family = effect.fit_intervention();
        for (int a = 0; a <= 1; ++a) {
            const InterventionSpec spec = family.for_arm(a);
            for (int k = 1; k <= dgp_cfg.horizon; ++k) {
                EssRow row;
                row.intervention = spec.name();
                row.k = k;
                row.a = a;
                row.param = value;
                try {
                    const WeightTable raw = true_weights(dgp, spec, ds, k, a);
                    row.n = raw.values.size();
                    row.n_truncated = raw.n_truncated;
                    if (!raw.values.empty()) {
                        const auto ess = effective_sample_size(
                            self_normalize(raw, Normalization::SumOne));
                        row.abs_ess = ess.absolute_ess;
                        row.rel_ess = ess.relative_ess;
                    }
                } catch (const std::exception&) {
                    row.abs_ess = row.rel_ess = std::numeric_limits<double>::quiet_NaN();
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, int workers) {
    RunResult result;
    for (const double value : cfg.sweep_values) {
        const DgpConfig dgp_cfg = config_for(cfg, value);
        std::vector<RepMetrics> reps(cfg.n_reps);

        const int n_workers = std::max(1, std::min(workers, cfg.n_reps));
        std::atomic<int> next{0};
        auto work = [&]() {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= cfg.n_reps) break;
                reps[r] = run_rep(cfg, dgp_cfg, r);
            }
        };
        std::vector<std::thread> threads;
        for (int w = 0; w < n_workers - 1; ++w) threads.emplace_back(work);
        work();
        for (auto& th : threads) th.join();

        const int K = dgp_cfg.horizon;
        for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
            for (std::size_t ei = 0; ei < cfg.effects.size(); ++ei) {
                const std::size_t cell = si * cfg.effects.size() + ei;
                MetricRow base;
                base.setting = "setting" + std::to_string(cfg.setting);
                base.param = value;
                base.strategy = strategy_name(cfg.strategies[si]);
                base.effect = cfg.effects[ei].name();
                base.n_reps = static_cast<std::size_t>(cfg.n_reps);
                base.base_seed = cfg.base_seed;
                for (int r = 0; r < cfg.n_reps; ++r)
                    if (reps[r].status[cell] != "ok") base.status = reps[r].status[cell];

                auto summarize_ok = [&](auto getter) {
                    std::vector<double> vals;
                    for (int r = 0; r < cfg.n_reps; ++r) {
                        if (reps[r].status[cell] != "ok") continue;
                        const double v = getter(reps[r]);
                        if (!std::isnan(v)) vals.push_back(v);
                    }
                    return vals;
                };

                MetricRow tau_row = base;
                tau_row.metric = "rmse_tau";
                tau_row.k = K;
                auto tau_vals = summarize_ok([&](const RepMetrics& m) { return m.tau[cell]; });
                if (tau_vals.size() >= 2) {
                    const auto s = summarize(tau_vals);
                    tau_row.mean = s.mean;
                    tau_row.se = s.std_error;
                } else {
                    tau_row.mean = tau_row.se = std::numeric_limits<double>::quiet_NaN();
                    if (tau_row.status == "ok") tau_row.status = "insufficient replications";
                }
                result.metrics.push_back(std::move(tau_row));

                for (int a = 0; a <= 1; ++a) {
                    for (int k = 1; k <= K; ++k) {
                        MetricRow haz_row = base;
                        haz_row.metric = "rmse_haz_a" + std::to_string(a);
                        haz_row.k = k;
                        auto vals = summarize_ok([&](const RepMetrics& m) {
                            return m.haz[(cell * 2 + static_cast<std::size_t>(a)) *
                                             static_cast<std::size_t>(K) +
                                         static_cast<std::size_t>(k - 1)];
                        });
                        if (vals.size() >= 2) {
                            const auto s = summarize(vals);
                            haz_row.mean = s.mean;
                            haz_row.se = s.std_error;
                        } else {
                            haz_row.mean = haz_row.se =
                                std::numeric_limits<double>::quiet_NaN();
                            if (haz_row.status == "ok")
                                haz_row.status = "insufficient replications";
                        }
                        result.metrics.push_back(std::move(haz_row));
                    }
                }
            }
        }

        auto ess = ess_diagnostics(cfg, dgp_cfg, value);
        result.ess.insert(result.ess.end(), ess.begin(), ess.end());
    }
    return result;
}

void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& out) {
    out << "setting,param,strategy,effect,metric,k,mean,se,n_reps,base_seed,status\n";
    std::ostringstream line;
    line.precision(12);
    for (const auto& r : rows) {
        line.str("");
        line << r.setting << "," << r.param << "," << r.strategy << "," << r.effect
             << "," << r.metric << "," << r.k << "," << r.mean << "," << r.se << ","
             << r.n_reps << "," << r.base_seed << "," << r.status;
        out << line.str() << "\n";
    }
}

void write_ess_csv(const std::vector<EssRow>& rows, std::ostream& out) {
    out << "intervention,k,a,n,abs_ess,rel_ess,n_truncated\n";
    std::ostringstream line;
    line.precision(12);
    for (const auto& r : rows) {
        line.str("");
        line << r.intervention << "," << r.k << "," << r.a << "," << r.n << ","
             << r.abs_ess << "," << r.rel_ess << "," << r.n_truncated;
        out << line.str() << "\n";
    }
}

}  // namespace riskshift
