#include <cmath>
#include <vector>

#include <doctest.h>

#include "styleaudit/rng.hpp"

using styleaudit::Rng;

TEST_CASE("identical seeds produce identical streams") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams do not depend on draw position") {
    Rng a(5);
    const Rng c = a.derive(9);
    a.next_u64();
    a.next_u64();
    Rng d = a.derive(9);
    Rng e = c;
    for (int i = 0; i < 10; ++i) REQUIRE(d.next_u64() == e.next_u64());
}

TEST_CASE("uniform_int is unbiased enough and in range") {
    Rng rng(77);
    std::vector<int> counts(7, 0);
    const int draws = 70000;
    for (int i = 0; i < draws; ++i) {
        const auto v = rng.uniform_int(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    for (const int c : counts) {
        REQUIRE(c > draws / 7 - 600);
        REQUIRE(c < draws / 7 + 600);
    }
}

TEST_CASE("normal draws have the requested moments") {
    Rng rng(99);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal(2.0, 3.0);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    REQUIRE(std::fabs(mean - 2.0) < 0.05);
    REQUIRE(std::fabs(std::sqrt(var) - 3.0) < 0.05);
}

TEST_CASE("shuffle is a permutation") {
    Rng rng(13);
    std::vector<int> items{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    auto shuffled = items;
    rng.shuffle(shuffled);
    auto sorted = shuffled;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == items);
}
