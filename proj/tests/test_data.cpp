#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "riskshift/data.hpp"
#include "riskshift/errors.hpp"
#include "riskshift/rng.hpp"

using namespace riskshift;

namespace {

LongTrajectory traj(std::vector<std::uint8_t> y, std::vector<std::uint8_t> d, int a = 1) {
    LongTrajectory t;
    t.x = {1.0, 0.0};
    t.a = a;
    t.y = std::move(y);
    t.d = std::move(d);
    return t;
}

Dataset make_dataset(std::initializer_list<EventRecord> records, int K) {
    Dataset ds(K, 2);
    for (const auto& r : records) ds.add(r.x, r.a, r.t, r.e);
    return ds;
}

// Random valid datasets for the property checks.
Dataset random_dataset(Rng& rng, int K, std::size_t n) {
    Dataset ds(K, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double x[2] = {rng.bernoulli(0.5) ? 1.0 : 0.0,
                             rng.bernoulli(0.5) ? 1.0 : 0.0};
        const int a = rng.bernoulli(0.5) ? 1 : 0;
        const int roll = static_cast<int>(rng.below(3));
        if (roll == 2) {
            ds.add({x, 2}, a, K + 1, EventType::None);
        } else {
            const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
            ds.add({x, 2}, a, t,
                   roll == 0 ? EventType::MainEvent : EventType::CompetingEvent);
        }
    }
    return ds;
}

}  // namespace

TEST_CASE("from_long reads off the first event") {
    // D=(0,0,0), Y=(0,1,1) -> t=2 main
    auto ds = from_long({traj({0, 1, 1}, {0, 0, 0})}, 3);
    CHECK(ds.t(0) == 2);
    CHECK(ds.e(0) == EventType::MainEvent);

    // event-free -> (K+1, None)
    ds = from_long({traj({0, 0, 0}, {0, 0, 0})}, 3);
    CHECK(ds.t(0) == 4);
    CHECK(ds.e(0) == EventType::None);

    // D=(0,1,1), Y=(0,0,0) -> t=2 competing
    ds = from_long({traj({0, 0, 0}, {0, 1, 1})}, 3);
    CHECK(ds.t(0) == 2);
    CHECK(ds.e(0) == EventType::CompetingEvent);
}

TEST_CASE("from_long resolves a simultaneous pair to the competing event") {
    auto ds = from_long({traj({0, 1, 1}, {0, 1, 1})}, 3);
    CHECK(ds.t(0) == 2);
    CHECK(ds.e(0) == EventType::CompetingEvent);
}

TEST_CASE("from_long rejects malformed trajectories") {
    CHECK_THROWS_AS(from_long({traj({0, 1, 0}, {0, 0, 0})}, 3), DataError);
    CHECK_THROWS_AS(from_long({traj({0, 1, 1}, {0, 0, 1})}, 3), DataError);
    CHECK_THROWS_AS(from_long({traj({0, 1}, {0, 0})}, 3), DataError);
}

TEST_CASE("round trip from_long(to_long(ds)) == ds") {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const int K = 2 + static_cast<int>(rng.below(6));
        Dataset ds = random_dataset(rng, K, 50);
        Dataset back = from_long(to_long(ds), K);
        REQUIRE(back.size() == ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            CHECK(back.t(i) == ds.t(i));
            CHECK(back.e(i) == ds.e(i));
            CHECK(back.a(i) == ds.a(i));
            CHECK(back.x(i)[0] == ds.x(i)[0]);
        }
    }
}

TEST_CASE("competing at-risk membership and labels") {
    // main event at k keeps the unit in the competing at-risk set, label 0
    auto ds = make_dataset({{{1, 0}, 1, 2, EventType::MainEvent},
                            {{0, 0}, 1, 3, EventType::None}},
                           2);
    auto s = competing_at_risk(ds, 2, 1);
    REQUIRE(s.indices.size() == 2);
    CHECK(s.labels[0] == 0);

    // competing event at its own time has label 1
    auto ds2 = make_dataset({{{1, 0}, 0, 1, EventType::CompetingEvent}}, 2);
    auto s2 = competing_at_risk(ds2, 1, 0);
    REQUIRE(s2.indices.size() == 1);
    CHECK(s2.labels[0] == 1);

    // a prior event removes the unit
    auto s3 = competing_at_risk(ds2, 2, 0);
    CHECK(s3.indices.empty());
}

TEST_CASE("main at-risk excludes competing events at the same step") {
    auto ds = make_dataset({{{1, 0}, 1, 2, EventType::CompetingEvent},
                            {{1, 1}, 1, 2, EventType::MainEvent},
                            {{0, 0}, 0, 3, EventType::None}},
                           2);
    auto s = main_at_risk(ds, 2, 1);
    REQUIRE(s.indices.size() == 1);
    CHECK(s.indices[0] == 1);
    CHECK(s.labels[0] == 1);

    auto s0 = main_at_risk(ds, 1, 0);
    REQUIRE(s0.indices.size() == 1);
    CHECK(s0.labels[0] == 0);
}

TEST_CASE("at-risk set properties over random datasets") {
    Rng rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        const int K = 3 + static_cast<int>(rng.below(5));
        Dataset ds = random_dataset(rng, K, 200);
        for (int a = 0; a <= 1; ++a) {
            std::vector<std::set<std::uint32_t>> competing_sets;
            for (int k = 1; k <= K; ++k) {
                auto main = main_at_risk(ds, k, a);
                auto comp = competing_at_risk(ds, k, a);
                std::set<std::uint32_t> comp_set(comp.indices.begin(), comp.indices.end());
                // nesting: the main set is a subset of the competing set
                for (auto i : main.indices) CHECK(comp_set.count(i) == 1);
                competing_sets.push_back(std::move(comp_set));
            }
            // monotone shrinkage of the competing at-risk set
            for (int k = 1; k < K; ++k)
                for (auto i : competing_sets[k])
                    CHECK(competing_sets[k - 1].count(i) == 1);
        }
        // partition: every unit with an event is labeled 1 exactly once
        // across (k, event type) within its arm
        std::vector<int> label_count(ds.size(), 0);
        for (int a = 0; a <= 1; ++a) {
            for (int k = 1; k <= K; ++k) {
                auto main = main_at_risk(ds, k, a);
                auto comp = competing_at_risk(ds, k, a);
                for (std::size_t j = 0; j < main.indices.size(); ++j)
                    label_count[main.indices[j]] += main.labels[j];
                for (std::size_t j = 0; j < comp.indices.size(); ++j)
                    label_count[comp.indices[j]] += comp.labels[j];
            }
        }
        for (std::size_t i = 0; i < ds.size(); ++i)
            CHECK(label_count[i] == (ds.e(i) != EventType::None ? 1 : 0));
    }
}

TEST_CASE("validate flags bad records") {
    Dataset ok = make_dataset({{{1, 0}, 1, 2, EventType::MainEvent}}, 3);
    CHECK(validate(ok).empty());

    Dataset bad_t(3, 2);
    bad_t.add(std::vector<double>{1, 0}, 1, 5, EventType::MainEvent);  // t = K+2
    auto v1 = validate(bad_t);
    REQUIRE(v1.size() == 1);
    CHECK(v1[0].kind == Violation::OutOfRangeTime);

    Dataset bad_e(3, 2);
    bad_e.add(std::vector<double>{1, 0}, 1, 4, EventType::MainEvent);  // K+1 with event
    auto v2 = validate(bad_e);
    REQUIRE(v2.size() == 1);
    CHECK(v2[0].kind == Violation::InconsistentEventFlag);
}

TEST_CASE("CSV round trip and strict parsing") {
    Dataset ds = make_dataset({{{1, 0}, 1, 2, EventType::MainEvent},
                               {{0, 1}, 0, 4, EventType::None},
                               {{1, 1}, 0, 1, EventType::CompetingEvent}},
                              3);
    std::ostringstream out;
    write_dataset_csv(ds, out);
    std::istringstream in(out.str());
    Dataset back = read_dataset_csv(in, 3);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.t(i) == ds.t(i));
        CHECK(back.e(i) == ds.e(i));
        CHECK(back.a(i) == ds.a(i));
        CHECK(back.x(i)[1] == ds.x(i)[1]);
    }

    std::istringstream bad_header("x0,x1,a,t\n");
    CHECK_THROWS_AS(read_dataset_csv(bad_header, 3), DataError);
    std::istringstream bad_event("x0,x1,a,t,e\n1,0,1,2,Q\n");
    CHECK_THROWS_AS(read_dataset_csv(bad_event, 3), DataError);
    std::istringstream missing("x0,x1,a,t,e\n1,0,1,2\n");
    CHECK_THROWS_AS(read_dataset_csv(missing, 3), DataError);
}
