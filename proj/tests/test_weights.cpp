#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "riskshift/dgp.hpp"
#include "riskshift/errors.hpp"
#include "riskshift/rng.hpp"
#include "riskshift/weights.hpp"

using namespace riskshift;

namespace {

WeightTable table_of(std::vector<double> values) {
    WeightTable w;
    w.values = std::move(values);
    return w;
}

// One long-lived record per arm so the main at-risk set is nonempty.
Dataset survivors(int K, double x1) {
    Dataset ds(K, 2);
    const double x[2] = {x1, 0.0};
    ds.add({x, 2}, 0, K + 1, EventType::None);
    ds.add({x, 2}, 1, K + 1, EventType::None);
    return ds;
}

}  // namespace

TEST_CASE("self normalization modes") {
    auto mean_one = self_normalize(table_of({2, 2, 2}), Normalization::MeanOne);
    for (double v : mean_one.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));

    auto sum_one = self_normalize(table_of({1, 3}), Normalization::SumOne);
    CHECK(sum_one.values[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sum_one.values[1] == doctest::Approx(0.75).epsilon(1e-15));

    CHECK_THROWS_AS(self_normalize(table_of({0, 0}), Normalization::MeanOne),
                    DegenerateWeights);
}

TEST_CASE("effective sample size") {
    auto equal = self_normalize(table_of({1, 1}), Normalization::SumOne);
    auto r = effective_sample_size(equal);
    CHECK(r.absolute_ess == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.relative_ess == doctest::Approx(1.0).epsilon(1e-12));

    auto skew = self_normalize(table_of({9, 1}), Normalization::SumOne);
    CHECK(effective_sample_size(skew).absolute_ess ==
          doctest::Approx(1.0 / 0.82).epsilon(1e-12));

    auto many = self_normalize(table_of(std::vector<double>(64, 1.0)),
                               Normalization::SumOne);
    CHECK(effective_sample_size(many).absolute_ess == doctest::Approx(64.0).epsilon(1e-9));

    CHECK_THROWS_AS(effective_sample_size(table_of({1, 1})), ConfigError);
}

TEST_CASE("renyi-2 relative ess") {
    const double p_same[] = {0.3, 0.7};
    CHECK(renyi2_relative_ess({p_same, 2}, {p_same, 2}) ==
          doctest::Approx(1.0).epsilon(1e-12));

    const double p_int[] = {1.0, 0.0};
    const double p_obs[] = {0.5, 0.5};
    CHECK(renyi2_relative_ess({p_int, 2}, {p_obs, 2}) ==
          doctest::Approx(0.5).epsilon(1e-12));

    const double p_int2[] = {0.5, 0.5};
    const double p_obs2[] = {0.9, 0.1};
    CHECK(renyi2_relative_ess({p_int2, 2}, {p_obs2, 2}) ==
          doctest::Approx(0.36).epsilon(1e-12));

    const double bad_obs[] = {0.0, 1.0};
    CHECK_THROWS_AS(renyi2_relative_ess({p_int, 2}, {bad_obs, 2}), PositivityError);
}

TEST_CASE("true weights: homogeneous propensity gives constant weights") {
    DgpConfig cfg = preset(2, 0.1);  // xi = 0, pi = 1/2
    SynthDgp dgp(cfg);
    Dataset ds = survivors(cfg.horizon, 1.0);
    auto w = true_weights(dgp, InterventionSpec::total(1), ds, 3, 1);
    REQUIRE(w.values.size() == 1);
    CHECK(w.values[0] == doctest::Approx(2.0).epsilon(1e-12));
    auto normalized = self_normalize(w, Normalization::MeanOne);
    CHECK(normalized.values[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("true weights: direct-intervention hand value") {
    // pi = 1/2, h_D = 0.01, k = 2: w = 1 / (0.5 * 0.99^2)
    DgpConfig cfg = preset(1, 0.0);
    SynthDgp dgp(cfg);
    Dataset ds = survivors(cfg.horizon, 0.0);
    auto w = true_weights(dgp, InterventionSpec::direct(1), ds, 2, 1);
    REQUIRE(w.values.size() == 1);
    CHECK(w.values[0] == doctest::Approx(2.04061).epsilon(1e-5));
    CHECK(w.values[0] == doctest::Approx(1.0 / (0.5 * 0.99 * 0.99)).epsilon(1e-12));
    CHECK(w.n_truncated == 0);
}

TEST_CASE("separable weights with equal components reduce to total weights") {
    DgpConfig cfg = preset(4, 2.0);  // arm-dependent competing hazard
    SynthDgp dgp(cfg);
    Dataset ds = survivors(cfg.horizon, 1.0);
    for (int k : {1, 5, 20}) {
        auto sep = true_weights(dgp, InterventionSpec::separable(1, 1), ds, k, 1);
        auto tot = true_weights(dgp, InterventionSpec::total(1), ds, k, 1);
        CHECK(sep.values[0] == doctest::Approx(tot.values[0]).epsilon(1e-14));
    }
}

TEST_CASE("arm mismatch is rejected") {
    DgpConfig cfg = preset(1, 0.0);
    SynthDgp dgp(cfg);
    Dataset ds = survivors(cfg.horizon, 1.0);
    CHECK_THROWS_AS(true_weights(dgp, InterventionSpec::total(1), ds, 1, 0), ConfigError);
}

TEST_CASE("estimated weights equal true weights under exact plug-ins") {
    DgpConfig cfg = preset(1, 6.0);  // h_D covariate-independent 0.01
    SynthDgp dgp(cfg);
    Dataset ds = sample_observational(cfg, 500, 11);

    // the true propensity expit(6(x1 - 0.5)) is exactly a logistic model
    auto pi_exact = FittedClassifier::logistic(-3.0, {6.0, 0.0});
    auto hd_exact = HazardGrid::from_constants(
        cfg.horizon, std::vector<double>(cfg.horizon * 2, 0.0),
        std::vector<double>(cfg.horizon * 2, 0.01));

    for (int k : {1, 4, 9}) {
        for (int a = 0; a <= 1; ++a) {
            auto wt = true_weights(dgp, InterventionSpec::direct(a), ds, k, a);
            auto we = estimated_weights(pi_exact, hd_exact, InterventionSpec::direct(a),
                                        ds, k, a);
            REQUIRE(wt.values.size() == we.values.size());
            for (std::size_t i = 0; i < wt.values.size(); ++i)
                CHECK(we.values[i] == doctest::Approx(wt.values[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("estimated weights from fitted models approach the true weights") {
    DgpConfig cfg = preset(1, 6.0);
    SynthDgp dgp(cfg);
    const std::size_t n = 100000;
    Dataset ds = sample_observational(cfg, n, 19);

    auto pi_hat = fit_propensity(ds, ClassifierSpec::logistic_l2(100.0));
    GridFitConfig gc;
    gc.strategy = TrainingStrategy::Observational;
    HazardGrid grid = fit_hazard_grid(ds, gc, nullptr);

    const int k = 5, a = 1;
    auto wt = true_weights(dgp, InterventionSpec::total(a), ds, k, a);
    auto we = estimated_weights(pi_hat, grid, InterventionSpec::total(a), ds, k, a);
    REQUIRE(wt.values.size() == we.values.size());
    double mad = 0;
    for (std::size_t i = 0; i < wt.values.size(); ++i)
        mad += std::abs(wt.values[i] - we.values[i]);
    mad /= static_cast<double>(wt.values.size());
    CHECK(mad < 0.05);
}

TEST_CASE("propensity floor sets the truncation flag") {
    DgpConfig cfg = preset(1, 0.0);
    Dataset ds = survivors(cfg.horizon, 1.0);
    auto pi_zero = FittedClassifier::constant(0.0);  // clamps to ~1e-12 < floor
    auto hd = HazardGrid::from_constants(cfg.horizon,
                                         std::vector<double>(cfg.horizon * 2, 0.0),
                                         std::vector<double>(cfg.horizon * 2, 0.01));
    auto w = estimated_weights(pi_zero, hd, InterventionSpec::total(1), ds, 1, 1);
    CHECK(w.n_truncated == 1);
    CHECK(w.values[0] == doctest::Approx(1.0 / kWeightFloor).epsilon(1e-9));
}

TEST_CASE("argmin invariance: constant fit identical under raw and mean-one weights") {
    DgpConfig cfg = preset(1, 4.0);
    SynthDgp dgp(cfg);
    Dataset ds = sample_observational(cfg, 4000, 23);
    const int k = 3, a = 1;
    auto s = main_at_risk(ds, k, a);
    auto raw = true_weights(dgp, InterventionSpec::total(a), ds, k, a);
    auto mean_one = self_normalize(raw, Normalization::MeanOne);
    Matrix features = at_risk_features(ds, s);
    auto fit_raw = fit(ClassifierSpec::constant(), features, s.labels, raw.values);
    auto fit_norm = fit(ClassifierSpec::constant(), features, s.labels, mean_one.values);
    CHECK(fit_raw.p_hat() == doctest::Approx(fit_norm.p_hat()).epsilon(1e-14));
}

TEST_CASE("sample relative ess converges to the renyi-2 oracle") {
    DgpConfig cfg = preset(1, 6.0);
    SynthDgp dgp(cfg);
    const std::size_t n = 100000;
    Dataset ds = sample_observational(cfg, n, 29);
    const int k = 5;
    for (int a = 0; a <= 1; ++a) {
        for (const auto& spec :
             {InterventionSpec::total(a), InterventionSpec::direct(a)}) {
            auto w = self_normalize(true_weights(dgp, spec, ds, k, a),
                                    Normalization::SumOne);
            auto ess = effective_sample_size(w);
            auto p_int = exact_at_risk_distribution(cfg, spec, k);
            auto p_obs = exact_observational_at_risk(cfg, k, a);
            const double oracle = renyi2_relative_ess(p_int, p_obs);
            CHECK(std::abs(ess.relative_ess - oracle) < 0.05);
        }
    }
}

TEST_CASE("weighted averages transport to the interventional distribution") {
    DgpConfig cfg = preset(2, 0.2);
    SynthDgp dgp(cfg);
    const std::size_t n = 100000;
    Dataset ds = sample_observational(cfg, n, 37);
    const int k = 8, a = 1;
    const InterventionSpec spec = InterventionSpec::direct(a);

    auto s = main_at_risk(ds, k, a);
    auto w = self_normalize(true_weights(dgp, spec, ds, k, a), Normalization::SumOne);
    REQUIRE(w.values.size() == s.indices.size());

    auto g = [](std::span<const double> x) { return x[0] + 0.5 * x[1]; };
    double weighted_mean = 0;
    for (std::size_t i = 0; i < s.indices.size(); ++i)
        weighted_mean += w.values[i] * g(ds.x(s.indices[i]));

    auto p_int = exact_at_risk_distribution(cfg, spec, k);
    double target = 0, target_sq = 0;
    for (int c = 0; c < 4; ++c) {
        const auto xc = cell_covariates(c);
        target += p_int[c] * g({xc.data(), 2});
        target_sq += p_int[c] * g({xc.data(), 2}) * g({xc.data(), 2});
    }
    // weighted-mean standard error via the self-normalized weights
    double var_est = 0;
    for (std::size_t i = 0; i < s.indices.size(); ++i) {
        const double d = g(ds.x(s.indices[i])) - weighted_mean;
        var_est += w.values[i] * w.values[i] * d * d;
    }
    const double se = std::sqrt(var_est);
    CHECK(std::abs(weighted_mean - target) < std::max(3 * se, 1e-3));
    CHECK(target_sq >= target * target);  // sanity on the oracle moments
}

TEST_CASE("shift over time: oracle decays initially, sample recovers late") {
    DgpConfig cfg = preset(2, 0.2);
    SynthDgp dgp(cfg);
    const int a = 1;

    // oracle relative ess for the direct intervention decays over the
    // initial horizon in this preset
    std::vector<double> oracle(static_cast<std::size_t>(cfg.horizon) + 1, 0.0);
    for (int k = 1; k <= cfg.horizon; ++k) {
        auto p_int = exact_at_risk_distribution(cfg, InterventionSpec::direct(a), k);
        auto p_obs = exact_observational_at_risk(cfg, k, a);
        oracle[static_cast<std::size_t>(k)] = renyi2_relative_ess(p_int, p_obs);
    }
    for (int k = 1; k < 15; ++k)
        CHECK(oracle[static_cast<std::size_t>(k + 1)] <=
              oracle[static_cast<std::size_t>(k)] + 1e-12);
    CHECK(oracle[15] < 0.5 * oracle[1]);

    // the finite-sample curve tracks the decay while the shifted cell is
    // populated and snaps back once it empties out
    Dataset ds = sample_observational(cfg, 5000, 43);
    std::vector<double> sample_rel(static_cast<std::size_t>(cfg.horizon) + 1, 1.0);
    for (int k = 1; k <= cfg.horizon; ++k) {
        auto raw = true_weights(dgp, InterventionSpec::direct(a), ds, k, a);
        if (raw.values.empty()) break;
        sample_rel[static_cast<std::size_t>(k)] =
            effective_sample_size(self_normalize(raw, Normalization::SumOne))
                .relative_ess;
    }
    double min_rel = 2.0;
    int argmin = 0;
    for (int k = 1; k <= 25; ++k) {
        if (sample_rel[static_cast<std::size_t>(k)] < min_rel) {
            min_rel = sample_rel[static_cast<std::size_t>(k)];
            argmin = k;
        }
    }
    CHECK(argmin > 2);
    CHECK(min_rel < 0.6 * sample_rel[1]);
    CHECK(sample_rel[30] > 2.0 * min_rel);
}
