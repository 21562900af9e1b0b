#include "riskshift/semi_synth.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "riskshift/effects.hpp"
#include "riskshift/errors.hpp"
#include "riskshift/metrics.hpp"

namespace riskshift {

namespace {

constexpr std::uint64_t kSplitStream = 0x51;
constexpr std::uint64_t kAssignStream = 0x52;
constexpr std::uint64_t kCompetingStream = 0x53;

double expit(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

Standardizer standardize_train(std::span<const double> values) {
    if (values.empty()) throw ShapeError("standardize_train: empty input");
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    if (var <= 0) throw ConstantFeatureError("standardize_train: zero variance");
    return {mean, std::sqrt(var)};
}

double subset_mean(std::span<const double> x, std::span<const int> subset) {
    if (subset.empty()) throw ConfigError("feature subset must be nonempty");
    double s = 0;
    for (int j : subset) {
        if (j < 0 || static_cast<std::size_t>(j) >= x.size())
            throw ConfigError("feature subset index out of range");
        s += x[j];
    }
    return s / static_cast<double>(subset.size());
}

SemiSynthDgp::SemiSynthDgp(SemiSynthConfig cfg, Standardizer z)
    : cfg_(std::move(cfg)), z_(z) {
    if (cfg_.feature_subset.empty())
        throw ConfigError("feature subset must be nonempty");
    if (cfg_.horizon < 2) throw ConfigError("semi-synthetic horizon must be >= 2");
}

double SemiSynthDgp::propensity(std::span<const double> x) const {
    return expit(cfg_.xi_a * z_(subset_mean(x, cfg_.feature_subset)));
}

double SemiSynthDgp::hazard(EventType event, int k, std::span<const double> x,
                            int a) const {
    if (event != EventType::CompetingEvent)
        throw ShapeError("SemiSynthDgp: only the competing hazard is known");
    if (k == 1)
        return expit(std::log(0.1) +
                     cfg_.xi_d * (1 - a) * z_(subset_mean(x, cfg_.feature_subset)));
    return 0.1 / static_cast<double>(k - 1);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double to_double(const std::string& s, std::size_t line_no) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError("bad numeric field '" + s + "' at line " + std::to_string(line_no));
    return v;
}

}  // namespace

std::vector<PairedRecord> read_pairs_csv(std::istream& in, int horizon,
                                         bool zero_based_days) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty pairs CSV");
    auto header = split_line(line);
    if (header.size() < 5 || header[0] != "pair_id" || header[1] != "arm" ||
        header[header.size() - 2] != "t" || header.back() != "e")
        throw DataError("pairs CSV header must be pair_id,arm,x...,t,e");
    const std::size_t dim = header.size() - 4;

    std::map<std::int64_t, PairedRecord> by_id;
    std::map<std::int64_t, std::array<bool, 2>> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_line(line);
        if (f.size() != header.size())
            throw DataError("wrong field count at line " + std::to_string(line_no));
        const auto pair_id = static_cast<std::int64_t>(to_double(f[0], line_no));
        const int arm = static_cast<int>(to_double(f[1], line_no));
        if (arm != 0 && arm != 1)
            throw DataError("arm must be 0/1 at line " + std::to_string(line_no));
        std::vector<double> x(dim);
        for (std::size_t j = 0; j < dim; ++j) x[j] = to_double(f[2 + j], line_no);
        int t = static_cast<int>(to_double(f[2 + dim], line_no));
        const std::string& ev = f.back();
        if (zero_based_days) t += 1;
        if (ev == "none" || t > horizon) {
            t = horizon + 1;
        } else if (ev != "Y") {
            throw DataError("pairs CSV event must be Y or none, got '" + ev + "'");
        }
        if (t < 1) throw DataError("event time below range at line " + std::to_string(line_no));

        auto& rec = by_id[pair_id];
        rec.pair_id = pair_id;
        auto& got = seen[pair_id];
        if (got[arm]) throw DataError("duplicate arm for pair " + std::to_string(pair_id));
        got[arm] = true;
        rec.x[arm] = std::move(x);
        rec.t_main[arm] = t;
    }

    std::vector<PairedRecord> pairs;
    pairs.reserve(by_id.size());
    for (auto& [id, rec] : by_id) {
        if (!seen[id][0] || !seen[id][1])
            throw DataError("pair " + std::to_string(id) + " is missing an arm");
        pairs.push_back(std::move(rec));
    }
    return pairs;
}

std::vector<PairedRecord> read_pairs_csv(const std::string& path, int horizon,
                                         bool zero_based_days) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_pairs_csv(in, horizon, zero_based_days);
}

std::vector<std::int8_t> assign_arms(const std::vector<PairedRecord>& pairs,
                                     const SemiSynthDgp& dgp, std::uint64_t seed) {
    std::vector<std::int8_t> arms(pairs.size());
    const std::uint64_t s = mix_seed(seed, kAssignStream);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        Rng rng = substream(s, i);
        arms[i] = rng.bernoulli(dgp.propensity(pairs[i].x[0])) ? 1 : 0;
    }
    return arms;
}

Dataset assign_observed(const std::vector<PairedRecord>& pairs,
                        const SemiSynthDgp& dgp, std::uint64_t seed) {
    if (pairs.empty()) throw DataError("assign_observed: no pairs");
    const int K = dgp.config().horizon;
    const auto arms = assign_arms(pairs, dgp, seed);
    Dataset ds(K, static_cast<int>(pairs.front().x[0].size()));
    ds.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const int a = arms[i];
        const int t = pairs[i].t_main[a];
        ds.add(pairs[i].x[a], a, t,
               t <= K ? EventType::MainEvent : EventType::None);
    }
    return ds;
}

int simulate_competing_time(std::span<const double> x, int a, const SemiSynthDgp& dgp,
                            Rng& rng) {
    const int K = dgp.config().horizon;
    for (int k = 1; k <= K; ++k) {
        if (rng.bernoulli(dgp.hazard(EventType::CompetingEvent, k, x, a))) return k;
    }
    return K + 1;
}

std::vector<std::array<int, 2>> simulate_competing_times(
    const std::vector<PairedRecord>& pairs, const SemiSynthDgp& dgp,
    std::uint64_t seed) {
    std::vector<std::array<int, 2>> times(pairs.size());
    const std::uint64_t s = mix_seed(seed, kCompetingStream);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (int a = 0; a <= 1; ++a) {
            Rng rng = substream(s, i * 2 + static_cast<std::size_t>(a));
            times[i][a] = simulate_competing_time(pairs[i].x[a], a, dgp, rng);
        }
    }
    return times;
}

Dataset simulate_competing(const Dataset& ds, const SemiSynthDgp& dgp,
                           std::uint64_t seed) {
    const int K = ds.horizon();
    Dataset out(K, ds.dim());
    out.reserve(ds.size());
    const std::uint64_t s = mix_seed(seed, kCompetingStream);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        Rng rng = substream(s, i);
        const int t_d = simulate_competing_time(ds.x(i), ds.a(i), dgp, rng);
        int t = ds.t(i);
        EventType e = ds.e(i);
        // The competing event precedes the main event within a step.
        if (t_d <= std::min(t, K)) {
            t = t_d;
            e = EventType::CompetingEvent;
        }
        out.add(ds.x(i), ds.a(i), t, e);
    }
    return out;
}

Dataset combine_observed(const std::vector<PairedRecord>& pairs,
                         std::span<const std::int8_t> arms,
                         const std::vector<std::array<int, 2>>& competing_times,
                         int horizon) {
    if (pairs.empty()) throw DataError("combine_observed: no pairs");
    Dataset ds(horizon, static_cast<int>(pairs.front().x[0].size()));
    ds.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const int a = arms[i];
        const int t_y = pairs[i].t_main[a];
        const int t_d = competing_times[i][a];
        int t;
        EventType e;
        if (t_d <= t_y && t_d <= horizon) {
            t = t_d;
            e = EventType::CompetingEvent;
        } else if (t_y <= horizon) {
            t = t_y;
            e = EventType::MainEvent;
        } else {
            t = horizon + 1;
            e = EventType::None;
        }
        ds.add(pairs[i].x[a], a, t, e);
    }
    return ds;
}

int ground_truth_rmst(const PairedRecord& pair, const std::array<int, 2>& t_competing,
                      const InterventionSpec& spec, int K) {
    switch (spec.kind) {
        case InterventionSpec::Kind::Total:
            return std::min({pair.t_main[spec.a_main], t_competing[spec.a_main], K});
        case InterventionSpec::Kind::Direct:
            return std::min(pair.t_main[spec.a_main], K);
        case InterventionSpec::Kind::Separable:
            return std::min({pair.t_main[spec.a_main], t_competing[spec.a_comp], K});
    }
    return K;
}

double rmse_rmst(const HazardSource& model, const std::vector<PairedRecord>& test,
                 const std::vector<std::array<int, 2>>& t_competing,
                 const InterventionSpec& spec, int K) {
    if (test.empty()) throw ShapeError("rmse_rmst: empty test set");
    double mse = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const double truth = ground_truth_rmst(test[i], t_competing[i], spec, K);
        const double pred = rmst(model, test[i].x[spec.a_main], spec, K);
        mse += (truth - pred) * (truth - pred);
    }
    return std::sqrt(mse / static_cast<double>(test.size()));
}

SemiSynthRunConfig semi_synth_config_from_json(const nlohmann::json& j) {
    try {
        SemiSynthRunConfig cfg;
        cfg.xi_a_values = j.at("xi_a_values").get<std::vector<double>>();
        cfg.xi_d_values = j.at("xi_d_values").get<std::vector<double>>();
        cfg.feature_subset = j.at("feature_subset").get<std::vector<int>>();
        cfg.horizon = j.value("horizon", 11);
        cfg.n_reps = j.value("n_reps", 5);
        cfg.base_seed = j.value("base_seed", std::uint64_t{42});
        cfg.zero_based_days = j.value("zero_based_days", true);
        if (j.contains("strategies")) {
            cfg.strategies.clear();
            for (const auto& s : j.at("strategies"))
                cfg.strategies.push_back(strategy_from_name(s.get<std::string>()));
        }
        if (j.contains("main_spec"))
            cfg.main_spec = classifier_spec_from_json(j.at("main_spec"));
        if (j.contains("competing_spec"))
            cfg.competing_spec = classifier_spec_from_json(j.at("competing_spec"));
        if (j.contains("propensity_spec"))
            cfg.propensity_spec = classifier_spec_from_json(j.at("propensity_spec"));
        if (cfg.xi_a_values.empty() || cfg.xi_d_values.empty())
            throw ConfigError("xi sweeps must be nonempty");
        if (cfg.n_reps < 2) throw ConfigError("n_reps must be >= 2");
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad semi-synth config: ") + e.what());
    }
}

namespace {

struct FamilyEval {
    std::string name;
    InterventionSpec spec_for_arm[2];
};

// One replication at (xi_a, xi_d): split, assign, simulate, fit all
// strategies, and score RMSE of RMST per intervention family and arm.
// Returns values indexed [strategy][family][arm].
std::vector<double> run_one_rep(const SemiSynthRunConfig& cfg,
                                const std::vector<PairedRecord>& pairs, double xi_a,
                                double xi_d, int rep,
                                const std::vector<FamilyEval>& families) {
    const int K = cfg.horizon;
    const std::uint64_t rep_seed = mix_seed(cfg.base_seed, static_cast<std::uint64_t>(rep));

    // 50/50 split by pair, never separating twins.
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(mix_seed(rep_seed, kSplitStream));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[split_rng.below(i)]);
    const std::size_t n_train = pairs.size() / 2;
    std::vector<PairedRecord> train, test;
    train.reserve(n_train);
    test.reserve(pairs.size() - n_train);
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_train ? train : test).push_back(pairs[order[i]]);

    // Standardization is fit on the training split only.
    std::vector<double> raw(train.size());
    for (std::size_t i = 0; i < train.size(); ++i)
        raw[i] = subset_mean(train[i].x[0], cfg.feature_subset);
    const Standardizer z = standardize_train(raw);
    const SemiSynthDgp dgp({xi_a, xi_d, cfg.feature_subset, K}, z);

    const auto arms = assign_arms(train, dgp, rep_seed);
    const auto t_d_train = simulate_competing_times(train, dgp, rep_seed);
    const auto t_d_test = simulate_competing_times(test, dgp, mix_seed(rep_seed, 0x7e57));
    const Dataset ds_train = combine_observed(train, arms, t_d_train, K);

    std::vector<double> values(cfg.strategies.size() * families.size() * 2,
                               std::numeric_limits<double>::quiet_NaN());

    for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
        const TrainingStrategy strategy = cfg.strategies[si];
        for (std::size_t fi = 0; fi < families.size(); ++fi) {
            const auto& family = families[fi];
            GridFitConfig gc;
            gc.main_spec = cfg.main_spec;
            gc.competing_spec = cfg.competing_spec;
            gc.propensity_spec = cfg.propensity_spec;
            gc.strategy = strategy;
            gc.intervention = family.spec_for_arm[0];

            HazardGrid grid = [&]() {
                if (strategy != TrainingStrategy::Counterfactual)
                    return fit_hazard_grid(ds_train, gc, &dgp);
                // Counterfactual sample: every training pair observed under
                // both forced arms of the family's intervention.
                Dataset cf(K, ds_train.dim());
                cf.reserve(train.size() * 2);
                for (int a = 0; a <= 1; ++a) {
                    const InterventionSpec spec = family.spec_for_arm[a];
                    for (std::size_t i = 0; i < train.size(); ++i) {
                        const int t_y = train[i].t_main[spec.a_main];
                        const int t_dc = spec.kind == InterventionSpec::Kind::Direct
                                             ? K + 1
                                             : t_d_train[i][spec.a_comp];
                        int t;
                        EventType e;
                        if (t_dc <= t_y && t_dc <= K) {
                            t = t_dc;
                            e = EventType::CompetingEvent;
                        } else if (t_y <= K) {
                            t = t_y;
                            e = EventType::MainEvent;
                        } else {
                            t = K + 1;
                            e = EventType::None;
                        }
                        cf.add(train[i].x[spec.a_main], a, t, e);
                    }
                }
                return fit_hazard_grid(cf, gc, nullptr);
            }();

            for (int a = 0; a <= 1; ++a) {
                values[(si * families.size() + fi) * 2 + static_cast<std::size_t>(a)] =
                    rmse_rmst(grid, test, t_d_test, family.spec_for_arm[a], K);
            }
        }
    }
    return values;
}

}  // namespace

std::vector<SemiSynthRow> run_semi_synth(const SemiSynthRunConfig& cfg,
                                         const std::vector<PairedRecord>& pairs,
                                         int workers) {
    if (pairs.size() < 4) throw DataError("run_semi_synth: too few pairs");
    const std::vector<FamilyEval> families = {
        {"total", {InterventionSpec::total(0), InterventionSpec::total(1)}},
        {"direct", {InterventionSpec::direct(0), InterventionSpec::direct(1)}},
        {"separable",
         {InterventionSpec::separable(0, 0), InterventionSpec::separable(1, 0)}},
    };

    std::vector<SemiSynthRow> rows;
    for (double xi_a : cfg.xi_a_values) {
        for (double xi_d : cfg.xi_d_values) {
            std::vector<std::vector<double>> per_rep(cfg.n_reps);
            std::vector<std::string> rep_status(cfg.n_reps, "ok");

            const int n_workers = std::max(1, std::min(workers, cfg.n_reps));
            std::atomic<int> next{0};
            auto work = [&]() {
                for (;;) {
                    const int r = next.fetch_add(1);
                    if (r >= cfg.n_reps) break;
                    try {
                        per_rep[r] = run_one_rep(cfg, pairs, xi_a, xi_d, r, families);
                    } catch (const std::exception& e) {
                        rep_status[r] = e.what();
                    }
                }
            };
            std::vector<std::thread> threads;
            for (int w = 0; w < n_workers - 1; ++w) threads.emplace_back(work);
            work();
            for (auto& th : threads) th.join();

            for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
                for (std::size_t fi = 0; fi < families.size(); ++fi) {
                    for (int a = 0; a <= 1; ++a) {
                        SemiSynthRow row;
                        row.xi_a = xi_a;
                        row.xi_d = xi_d;
                        row.strategy = strategy_name(cfg.strategies[si]);
                        row.spec = families[fi].name;
                        row.arm = a;
                        std::vector<double> vals;
                        for (int r = 0; r < cfg.n_reps; ++r) {
                            if (rep_status[r] != "ok") {
                                row.status = rep_status[r];
                                continue;
                            }
                            vals.push_back(
                                per_rep[r][(si * families.size() + fi) * 2 +
                                           static_cast<std::size_t>(a)]);
                        }
                        if (vals.size() >= 2) {
                            const auto s = summarize(vals);
                            row.rmse_rmst_mean = s.mean;
                            row.rmse_rmst_se = s.std_error;
                        } else {
                            row.rmse_rmst_mean = std::numeric_limits<double>::quiet_NaN();
                            row.rmse_rmst_se = std::numeric_limits<double>::quiet_NaN();
                            if (row.status == "ok") row.status = "insufficient replications";
                        }
                        rows.push_back(std::move(row));
                    }
                }
            }
        }
    }
    return rows;
}

void write_semi_synth_csv(const std::vector<SemiSynthRow>& rows, std::ostream& out) {
    out << "xi_a,xi_d,strategy,spec,arm,rmse_rmst_mean,rmse_rmst_se\n";
    std::ostringstream line;
    line.precision(12);
    for (const auto& r : rows) {
        line.str("");
        line << r.xi_a << "," << r.xi_d << "," << r.strategy << "," << r.spec << ","
             << r.arm << "," << r.rmse_rmst_mean << "," << r.rmse_rmst_se;
        out << line.str() << "\n";
    }
}

}  // namespace riskshift
