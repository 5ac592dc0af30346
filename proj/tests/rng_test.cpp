#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "kaleido/rng.hpp"

using namespace kaleido;

TEST_CASE("same seed and stream name reproduce the identical sequence") {
    RngStream a(42, "env");
    RngStream b(42, "env");
    for (int i = 0; i < 1000; ++i) CHECK(a.u64() == b.u64());
}

TEST_CASE("different stream names from one seed give independent sequences") {
    RngStream a(7, "env");
    RngStream b(7, "exploration");
    int same = 0;
    for (int i = 0; i < 256; ++i) {
        if (a.u64() == b.u64()) ++same;
    }
    CHECK(same == 0);
}

TEST_CASE("different seeds on one stream name diverge") {
    RngStream a(1, "env");
    RngStream b(2, "env");
    int same = 0;
    for (int i = 0; i < 256; ++i) {
        if (a.u64() == b.u64()) ++same;
    }
    CHECK(same == 0);
}

TEST_CASE("advancing one stream leaves a sibling stream unaffected") {
    RngStream probe(99, "sampling");
    std::vector<uint64_t> expected;
    for (int i = 0; i < 64; ++i) expected.push_back(probe.u64());

    RngSet set(99);
    for (int i = 0; i < 10000; ++i) set.env.u64();  // burn a different stream
    for (int i = 0; i < 64; ++i) CHECK(set.sampling.u64() == expected[i]);
}

TEST_CASE("uniform draws land in [0,1) with a sane mean") {
    RngStream r(3, "default");
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    const double mean = sum / n;
    CHECK(mean > 0.49);
    CHECK(mean < 0.51);
}

TEST_CASE("bounded uniform respects the interval") {
    RngStream r(4, "default");
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform(-2.5, 1.5);
        CHECK(u >= -2.5);
        CHECK(u < 1.5);
    }
}

TEST_CASE("uniform_int covers every bucket") {
    RngStream r(5, "default");
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const int k = r.uniform_int(7);
        REQUIRE(k >= 0);
        REQUIRE(k < 7);
        ++counts[k];
    }
    for (int c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}

TEST_CASE("normal draws match N(0,1) moments loosely") {
    RngStream r(6, "default");
    double sum = 0.0, sumsq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.02);
    CHECK(std::fabs(var - 1.0) < 0.03);
}

TEST_CASE("shifted normal applies mean and stddev") {
    RngStream r(8, "default");
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += r.normal(3.0, 0.5);
    CHECK(std::fabs(sum / n - 3.0) < 0.01);
}

TEST_CASE("all five streams of a set start distinct") {
    RngSet set(1234);
    std::set<uint64_t> first;
    first.insert(set.env.u64());
    first.insert(set.exploration.u64());
    first.insert(set.reset.u64());
    first.insert(set.sampling.u64());
    first.insert(set.init.u64());
    CHECK(first.size() == 5);
}
