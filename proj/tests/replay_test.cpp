#include "doctest.h"

#include <vector>

#include "kaleido/replay.hpp"
#include "kaleido/rng.hpp"

using namespace kaleido;

namespace {

Transition stamped(double reward) {
    Transition t;
    t.reward = reward;
    t.obs = {reward, reward + 0.5};
    return t;
}

}  // namespace

TEST_CASE("zero capacity is rejected") {
    CHECK_THROWS(ReplayBuffer(0));
}

TEST_CASE("the ring overwrites oldest entries once full") {
    ReplayBuffer buf(2);
    buf.push(stamped(1.0));
    buf.push(stamped(2.0));
    buf.push(stamped(3.0));
    CHECK(buf.size() == 2);
    CHECK(buf.total_pushed() == 3);
    // slot 0 held the oldest transition and was overwritten
    CHECK(buf.at(0).reward == 3.0);
    CHECK(buf.at(1).reward == 2.0);
}

TEST_CASE("the write cursor wraps after capacity plus one pushes") {
    ReplayBuffer buf(4);
    for (int i = 0; i < 5; ++i) buf.push(stamped(i));
    CHECK(buf.cursor() == 1);
    CHECK(buf.size() == 4);
}

TEST_CASE("a stored transition can be sampled back out immediately") {
    ReplayBuffer buf(8);
    buf.push(stamped(7.0));
    RngStream rng(1, "sampling");
    const auto idx = buf.sample_indices(1, rng);
    REQUIRE(idx.size() == 1);
    CHECK(buf.at(idx[0]).reward == 7.0);
}

TEST_CASE("requesting a batch larger than the stored count is an error") {
    ReplayBuffer buf(8);
    buf.push(stamped(1.0));
    RngStream rng(1, "sampling");
    CHECK_THROWS(buf.sample_indices(3, rng));

    ReplayBuffer empty(8);
    CHECK_THROWS(empty.sample_indices(1, rng));
}

TEST_CASE("sampling is deterministic under a fixed stream") {
    ReplayBuffer buf(64);
    for (int i = 0; i < 64; ++i) buf.push(stamped(i));
    RngStream r1(9, "sampling");
    RngStream r2(9, "sampling");
    CHECK(buf.sample_indices(32, r1) == buf.sample_indices(32, r2));
}

TEST_CASE("sample frequencies over 100k draws are uniform") {
    ReplayBuffer buf(10);
    for (int i = 0; i < 10; ++i) buf.push(stamped(i));
    RngStream rng(4, "sampling");
    std::vector<int> counts(10, 0);
    const int n = 100000;
    for (int rep = 0; rep < n / 10; ++rep)
        for (size_t i : buf.sample_indices(10, rng)) ++counts[i];
    double chi2 = 0.0;
    const double expected = n / 10.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 16.919);  // 95th percentile, 9 degrees of freedom
}

TEST_CASE("sampling never mutates stored transitions") {
    ReplayBuffer buf(4);
    for (int i = 0; i < 4; ++i) buf.push(stamped(i));
    RngStream rng(2, "sampling");
    for (int rep = 0; rep < 16; ++rep) buf.sample_indices(4, rng);
    for (int i = 0; i < 4; ++i) {
        CHECK(buf.at(i).reward == static_cast<double>(i));
        CHECK(buf.at(i).obs[1] == static_cast<double>(i) + 0.5);
    }
}
