#include <vector>

#include "doctest.h"
#include "dpu/replay.hpp"

using namespace dpu;

namespace {

Transition tagged(double tag) {
    return {{tag}, {0.0}, tag, {tag}, false};
}

}  // namespace

TEST_CASE("push: count grows to capacity then saturates") {
    ReplayBuffer buf(3, 1, 1);
    buf.push(tagged(1));
    CHECK(buf.size() == 1);
    for (double t = 2; t <= 5; ++t) buf.push(tagged(t));
    CHECK(buf.size() == 3);
}

TEST_CASE("push: ring eviction keeps exactly the last capacity entries") {
    ReplayBuffer buf(3, 1, 1);
    for (double t = 1; t <= 5; ++t) buf.push(tagged(t));
    std::vector<double> held;
    for (std::size_t i = 0; i < buf.size(); ++i) held.push_back(buf.at(i).reward);
    std::sort(held.begin(), held.end());
    CHECK(held == std::vector<double>{3, 4, 5});
}

TEST_CASE("push: FIFO order exact after many wraparounds") {
    const std::size_t cap = 17;
    ReplayBuffer buf(cap, 1, 1);
    const int total = 1000;
    for (int t = 0; t < total; ++t) buf.push(tagged(t));
    std::vector<double> held;
    for (std::size_t i = 0; i < buf.size(); ++i) held.push_back(buf.at(i).reward);
    std::sort(held.begin(), held.end());
    for (std::size_t i = 0; i < cap; ++i)
        CHECK(held[i] == static_cast<double>(total - cap + i));
}

TEST_CASE("push: saturation at large scale") {
    const std::size_t cap = 100000;
    ReplayBuffer buf(cap, 1, 1);
    for (int t = 0; t < 1000000; ++t) buf.push(tagged(t % 97));
    CHECK(buf.size() == cap);
}

TEST_CASE("push: width mismatch rejected") {
    ReplayBuffer buf(4, 2, 1);
    CHECK_THROWS(buf.push({{1.0}, {0.0}, 0.0, {1.0}, false}));
    CHECK_THROWS(buf.push({{1.0, 2.0}, {0.0, 0.0}, 0.0, {1.0, 2.0}, false}));
}

TEST_CASE("sample: single stored item repeated") {
    ReplayBuffer buf(8, 1, 1);
    buf.push(tagged(42));
    Rng rng(0);
    const auto batch = buf.sample(4, rng);
    REQUIRE(batch.size() == 4);
    for (const Transition* t : batch) CHECK(t->reward == 42);
}

TEST_CASE("sample: empty buffer rejected") {
    ReplayBuffer buf(8, 1, 1);
    Rng rng(0);
    CHECK_THROWS(buf.sample(1, rng));
}

TEST_CASE("sample: deterministic under a seeded rng") {
    ReplayBuffer buf(50, 1, 1);
    for (double t = 0; t < 50; ++t) buf.push(tagged(t));
    Rng a(123), b(123);
    const auto ba = buf.sample(32, a);
    const auto bb = buf.sample(32, b);
    for (std::size_t i = 0; i < ba.size(); ++i) CHECK(ba[i] == bb[i]);
}

TEST_CASE("sample: items compare equal to stored transitions") {
    ReplayBuffer buf(10, 2, 1);
    for (double t = 0; t < 10; ++t)
        buf.push({{t, t + 0.5}, {t * 2}, t, {t + 1, t + 1.5}, t > 5});
    Rng rng(7);
    for (const Transition* s : buf.sample(100, rng)) {
        const double tag = s->reward;
        CHECK(s->state == std::vector<double>{tag, tag + 0.5});
        CHECK(s->action == std::vector<double>{tag * 2});
        CHECK(s->next_state == std::vector<double>{tag + 1, tag + 1.5});
        CHECK(s->done == (tag > 5));
    }
}

TEST_CASE("sample: index frequencies pass chi-square uniformity") {
    const std::size_t items = 100;
    const std::size_t draws = 100000;
    ReplayBuffer buf(items, 1, 1);
    for (double t = 0; t < static_cast<double>(items); ++t) buf.push(tagged(t));
    Rng rng(2024);
    std::vector<std::size_t> counts(items, 0);
    for (std::size_t chunk = 0; chunk < draws / 1000; ++chunk)
        for (const Transition* t : buf.sample(1000, rng))
            counts[static_cast<std::size_t>(t->reward)] += 1;

    const double expected = static_cast<double>(draws) / static_cast<double>(items);
    double chi2 = 0.0;
    for (std::size_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    // Critical value of chi-square with 99 dof at significance 0.001.
    CHECK(chi2 < 148.2304);
}
