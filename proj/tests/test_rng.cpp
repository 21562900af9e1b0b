#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "riskshift/rng.hpp"

using namespace riskshift;

TEST_CASE("same seed reproduces the stream") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int equal = 0;
    for (int i = 0; i < 1000; ++i) equal += a.next() == b.next();
    CHECK(equal == 0);
}

TEST_CASE("uniform lies in [0,1) and has mean near 1/2") {
    Rng rng(7);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // SE of the mean is 1/sqrt(12 n)
    CHECK(std::abs(sum / n - 0.5) < 4.0 / std::sqrt(12.0 * n));
}

TEST_CASE("bernoulli frequency matches p") {
    Rng rng(11);
    const double p = 0.037;
    const int n = 400000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += rng.bernoulli(p);
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(hits) / n - p) < 4 * se);
}

TEST_CASE("substreams are distinct across units") {
    std::set<std::uint64_t> firsts;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        Rng rng = substream(99, i);
        firsts.insert(rng.next());
    }
    CHECK(firsts.size() == 10000);
}

TEST_CASE("mix_seed separates tags without collisions over a scan") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        for (std::uint64_t tag = 0; tag < 100; ++tag) seen.insert(mix_seed(seed, tag));
    CHECK(seen.size() == 10000);
}
