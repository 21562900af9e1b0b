#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "riskshift/effects.hpp"
#include "riskshift/errors.hpp"
#include "riskshift/rng.hpp"
#include "riskshift/semi_synth.hpp"

using namespace riskshift;

namespace {

SemiSynthDgp make_dgp(double xi_a, double xi_d, int K = 11) {
    return SemiSynthDgp({xi_a, xi_d, {0, 1}, K}, Standardizer{0.0, 1.0});
}

// Pairs with covariates drawn around zero and optional fixed main times.
std::vector<PairedRecord> synth_pairs(std::size_t n, int K, std::uint64_t seed,
                                      bool with_events = true) {
    Rng rng(seed);
    std::vector<PairedRecord> pairs(n);
    for (std::size_t i = 0; i < n; ++i) {
        pairs[i].pair_id = static_cast<std::int64_t>(i);
        std::vector<double> x = {rng.uniform() * 2 - 1, rng.uniform() * 2 - 1};
        pairs[i].x[0] = x;
        pairs[i].x[1] = x;
        for (int a = 0; a <= 1; ++a) {
            if (with_events && rng.bernoulli(0.4)) {
                pairs[i].t_main[a] = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
            } else {
                pairs[i].t_main[a] = K + 1;
            }
        }
    }
    return pairs;
}

}  // namespace

TEST_CASE("standardization over the training set") {
    const double v[] = {0.0, 2.0};
    auto z = standardize_train({v, 2});
    CHECK(z.mean == doctest::Approx(1.0));
    CHECK(z.std == doctest::Approx(1.0));
    CHECK(z(0.0) == doctest::Approx(-1.0));
    CHECK(z(2.0) == doctest::Approx(1.0));
    // the stored transform reproduces itself on the training data
    CHECK(z(v[0]) == doctest::Approx(-1.0));

    const double flat[] = {3.0, 3.0, 3.0};
    CHECK_THROWS_AS(standardize_train({flat, 3}), ConstantFeatureError);
}

TEST_CASE("propensity of the selection process") {
    auto dgp0 = make_dgp(0.0, 0.0);
    const double x[] = {0.7, -0.3};
    CHECK(dgp0.propensity({x, 2}) == doctest::Approx(0.5));

    // z = 0 gives 1/2 for any selection strength
    auto dgp = make_dgp(5.0, 0.0);
    const double zero[] = {0.0, 0.0};
    CHECK(dgp.propensity({zero, 2}) == doctest::Approx(0.5));

    // xi_a = 2, z = 1
    auto dgp2 = make_dgp(2.0, 0.0);
    const double one[] = {1.0, 1.0};
    CHECK(dgp2.propensity({one, 2}) == doctest::Approx(0.8807970779778823).epsilon(1e-12));
}

TEST_CASE("simulated competing hazard formula") {
    auto dgp = make_dgp(0.0, 0.0);
    const double x[] = {0.4, -0.2};
    CHECK(dgp.hazard(EventType::CompetingEvent, 1, {x, 2}, 1) ==
          doctest::Approx(1.0 / 11.0).epsilon(1e-12));
    CHECK(dgp.hazard(EventType::CompetingEvent, 2, {x, 2}, 0) == doctest::Approx(0.1));
    CHECK(dgp.hazard(EventType::CompetingEvent, 11, {x, 2}, 0) == doctest::Approx(0.01));
    CHECK_THROWS_AS(dgp.hazard(EventType::MainEvent, 1, {x, 2}, 0), ShapeError);

    // treatment equalizes the odds: a = 1 always gets the baseline
    auto strong = make_dgp(0.0, 8.0);
    const double hi[] = {3.0, 3.0};
    CHECK(strong.hazard(EventType::CompetingEvent, 1, {hi, 2}, 1) ==
          doctest::Approx(1.0 / 11.0).epsilon(1e-12));
    CHECK(strong.hazard(EventType::CompetingEvent, 1, {hi, 2}, 0) > 0.99);
    // and h_D(1) stays inside (0, 1) for finite inputs
    CHECK(strong.hazard(EventType::CompetingEvent, 1, {hi, 2}, 0) < 1.0);
}

TEST_CASE("empirical first-step competing frequency matches expit(log 0.1)") {
    auto dgp = make_dgp(0.0, 0.0);
    const std::size_t n = 100000;
    auto pairs = synth_pairs(n, 11, 5, false);  // event-free mains
    auto times = simulate_competing_times(pairs, dgp, 17);
    std::size_t at_one = 0;
    for (const auto& t : times) at_one += t[0] == 1;
    const double p = 1.0 / 11.0;
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(at_one) / n - p) < 3 * se);
}

TEST_CASE("cumulative competing mass stays below one at xi_d = 0") {
    // survival through all 11 steps under the baseline hazard path
    double surv = 1.0 - 1.0 / 11.0;
    for (int k = 2; k <= 11; ++k) surv *= 1.0 - 0.1 / (k - 1);
    CHECK(surv > 0.0);
    const double total_mass = 1.0 - surv;
    CHECK(total_mass < 1.0);

    auto dgp = make_dgp(0.0, 0.0);
    const std::size_t n = 100000;
    auto pairs = synth_pairs(n, 11, 7, false);
    auto times = simulate_competing_times(pairs, dgp, 23);
    std::size_t events = 0;
    for (const auto& t : times) events += t[1] <= 11;
    const double se = std::sqrt(total_mass * (1 - total_mass) / n);
    CHECK(std::abs(static_cast<double>(events) / n - total_mass) < 3 * se);
}

TEST_CASE("assignment frequency follows the propensity") {
    auto dgp = make_dgp(0.0, 0.0);
    auto pairs = synth_pairs(20000, 11, 9);
    auto arms = assign_arms(pairs, dgp, 31);
    double treated = 0;
    for (auto a : arms) treated += a;
    CHECK(std::abs(treated / static_cast<double>(arms.size()) - 0.5) <
          3 * std::sqrt(0.25 / static_cast<double>(arms.size())));
}

TEST_CASE("assign_observed picks the chosen arm's trajectory") {
    auto dgp = make_dgp(1.5, 0.0);
    auto pairs = synth_pairs(500, 11, 13);
    auto arms = assign_arms(pairs, dgp, 99);
    Dataset ds = assign_observed(pairs, dgp, 99);
    REQUIRE(ds.size() == pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK(ds.a(i) == arms[i]);
        const int t = pairs[i].t_main[arms[i]];
        CHECK(ds.t(i) == t);
        CHECK(ds.e(i) == (t <= 11 ? EventType::MainEvent : EventType::None));
    }
}

TEST_CASE("simulate_competing truncates records, ties go to the competing event") {
    // force h_D(1) ~ 1 for a = 0 via a huge z and strong xi_d
    SemiSynthConfig cfg{0.0, 50.0, {0}, 11};
    SemiSynthDgp dgp(cfg, Standardizer{0.0, 1.0});
    Dataset ds(11, 1);
    const double hi[] = {10.0};
    ds.add({hi, 1}, 0, 1, EventType::MainEvent);  // main at 1, D fires at 1 too
    Dataset out = simulate_competing(ds, dgp, 3);
    CHECK(out.t(0) == 1);
    CHECK(out.e(0) == EventType::CompetingEvent);
}

TEST_CASE("ground-truth rmst cases") {
    PairedRecord pair;
    pair.t_main = {12, 12};  // event-free at K = 11
    std::array<int, 2> none = {12, 12};
    for (const auto& spec : {InterventionSpec::total(0), InterventionSpec::direct(1),
                             InterventionSpec::separable(1, 0)})
        CHECK(ground_truth_rmst(pair, none, spec, 11) == 11);

    PairedRecord p2;
    p2.t_main = {3, 8};
    std::array<int, 2> td = {2, 12};
    CHECK(ground_truth_rmst(p2, td, InterventionSpec::total(0), 10) == 2);
    // the direct intervention ignores competing times entirely
    CHECK(ground_truth_rmst(p2, td, InterventionSpec::direct(0), 10) == 3);
    // separable mixes arms: main from a_Y, competing from a_D
    CHECK(ground_truth_rmst(p2, td, InterventionSpec::separable(1, 0), 10) == 2);
    CHECK(ground_truth_rmst(p2, td, InterventionSpec::separable(0, 1), 10) == 3);
}

TEST_CASE("rmse_rmst: zero for a perfect constant predictor and |b| under bias") {
    const int K = 5;
    auto pairs = synth_pairs(50, K, 21, false);  // all event-free
    std::vector<std::array<int, 2>> td(pairs.size(), {K + 1, K + 1});

    HazardGrid zero = HazardGrid::from_constants(
        K, std::vector<double>(K * 2, 0.0), std::vector<double>(K * 2, 0.0));
    CHECK(rmse_rmst(zero, pairs, td, InterventionSpec::direct(0), K) < 1e-8);

    // a grid whose rmst prediction is K - b for every unit
    const double h = 0.1;
    HazardGrid biased = HazardGrid::from_constants(
        K, std::vector<double>(K * 2, h), std::vector<double>(K * 2, 0.0));
    double pred = 1;
    double surv = 1;
    for (int l = 1; l <= K - 1; ++l) {
        surv *= 1 - h;
        pred += surv;
    }
    const double b = K - pred;
    CHECK(rmse_rmst(biased, pairs, td, InterventionSpec::direct(0), K) ==
          doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("toy enumeration: fitted grid attains the irreducible rmse") {
    // eight units realize the exact outcome distribution of a 0.5-per-step
    // hazard over K = 3: t = 1 (x4), 2 (x2), 3 (x1), none (x1)
    const int K = 3;
    Dataset train(K, 1);
    const double x0[] = {0.0};
    for (int i = 0; i < 4; ++i) train.add({x0, 1}, 0, 1, EventType::MainEvent);
    for (int i = 0; i < 2; ++i) train.add({x0, 1}, 0, 2, EventType::MainEvent);
    train.add({x0, 1}, 0, 3, EventType::MainEvent);
    train.add({x0, 1}, 0, 4, EventType::None);

    GridFitConfig gc;
    gc.strategy = TrainingStrategy::Observational;
    HazardGrid grid = fit_hazard_grid(train, gc, nullptr);
    CHECK(grid.cell(EventType::MainEvent, 1, 0).p_hat() == doctest::Approx(0.5));
    CHECK(grid.cell(EventType::MainEvent, 2, 0).p_hat() == doctest::Approx(0.5));
    CHECK(grid.cell(EventType::MainEvent, 3, 0).p_hat() == doctest::Approx(0.5));

    // matching test set; brute-force mean and irreducible spread by
    // enumeration of min(T, K) over the eight paths
    std::vector<PairedRecord> test(8);
    std::vector<std::array<int, 2>> td(8, {K + 1, K + 1});
    const int t_values[8] = {1, 1, 1, 1, 2, 2, 3, 4};
    for (int i = 0; i < 8; ++i) {
        test[i].x[0] = {0.0};
        test[i].x[1] = {0.0};
        test[i].t_main = {t_values[i], t_values[i]};
    }
    double mean = 0;
    for (int t : t_values) mean += std::min(t, K);
    mean /= 8.0;
    double var = 0;
    for (int t : t_values) var += (std::min(t, K) - mean) * (std::min(t, K) - mean);
    var /= 8.0;
    const double irreducible = std::sqrt(var);

    const double got = rmse_rmst(grid, test, td, InterventionSpec::direct(0), K);
    CHECK(got == doctest::Approx(irreducible).epsilon(0.01));
}

TEST_CASE("pairs csv parsing, day shift and errors") {
    std::istringstream in(
        "pair_id,arm,x0,x1,t,e\n"
        "7,0,0.5,1.0,0,Y\n"
        "7,1,0.5,1.0,10,Y\n"
        "8,0,-1.0,0.25,300,Y\n"
        "8,1,-1.0,0.25,4,none\n");
    auto pairs = read_pairs_csv(in, 11, true);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].pair_id == 7);
    CHECK(pairs[0].t_main[0] == 1);    // day 0 -> step 1
    CHECK(pairs[0].t_main[1] == 11);   // day 10 -> step 11
    CHECK(pairs[1].t_main[0] == 12);   // beyond the horizon -> event-free
    CHECK(pairs[1].t_main[1] == 12);   // explicit none

    std::istringstream missing_arm(
        "pair_id,arm,x0,x1,t,e\n"
        "1,0,0.5,1.0,3,Y\n");
    CHECK_THROWS_AS(read_pairs_csv(missing_arm, 11, true), DataError);

    std::istringstream bad_event(
        "pair_id,arm,x0,x1,t,e\n"
        "1,0,0.5,1.0,3,D\n"
        "1,1,0.5,1.0,3,Y\n");
    CHECK_THROWS_AS(read_pairs_csv(bad_event, 11, true), DataError);

    std::istringstream bad_header("id,arm,x0,t,e\n");
    CHECK_THROWS_AS(read_pairs_csv(bad_header, 11, true), DataError);
}

TEST_CASE("semi-synth runner produces a full, finite grid of rows") {
    auto pairs = synth_pairs(400, 11, 33);
    SemiSynthRunConfig cfg;
    cfg.xi_a_values = {0.0, 1.0};
    cfg.xi_d_values = {0.0};
    cfg.feature_subset = {0, 1};
    cfg.n_reps = 2;
    cfg.base_seed = 7;
    auto rows = run_semi_synth(cfg, pairs, 2);
    // 2 sweep points x 4 strategies x 3 families x 2 arms
    CHECK(rows.size() == 2u * 4u * 3u * 2u);
    for (const auto& r : rows) {
        INFO(r.strategy, " ", r.spec, " arm=", r.arm, " status=", r.status);
        CHECK(r.status == "ok");
        CHECK(std::isfinite(r.rmse_rmst_mean));
        CHECK(r.rmse_rmst_mean >= 0);
        CHECK(r.rmse_rmst_mean < 11);
    }
    std::ostringstream out;
    write_semi_synth_csv(rows, out);
    std::istringstream check(out.str());
    std::string line;
    std::getline(check, line);
    CHECK(line == "xi_a,xi_d,strategy,spec,arm,rmse_rmst_mean,rmse_rmst_se");

    // deterministic rerun
    auto rows2 = run_semi_synth(cfg, pairs, 1);
    REQUIRE(rows2.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        CHECK(rows[i].rmse_rmst_mean == doctest::Approx(rows2[i].rmse_rmst_mean).epsilon(1e-15));
}

TEST_CASE("semi-synth config json") {
    nlohmann::json j{{"xi_a_values", {0.0, 2.0}},
                     {"xi_d_values", {0.0}},
                     {"feature_subset", {0, 2}},
                     {"n_reps", 5},
                     {"main_spec", {{"kind", "constant"}}}};
    auto cfg = semi_synth_config_from_json(j);
    CHECK(cfg.xi_a_values.size() == 2);
    CHECK(cfg.feature_subset[1] == 2);
    CHECK(cfg.horizon == 11);

    nlohmann::json bad{{"xi_a_values", nlohmann::json::array()},
                       {"xi_d_values", {0.0}},
                       {"feature_subset", {0}}};
    CHECK_THROWS_AS(semi_synth_config_from_json(bad), ConfigError);
}
