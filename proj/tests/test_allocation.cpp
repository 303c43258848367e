#include <doctest.h>

#include "lsa/allocation.hpp"
#include "lsa/common.hpp"

using namespace lsa;

namespace {

// 4 users around the cell, 4 channels, channel 3 occupied; users 0..2 active.
NetworkState small_state() {
    NetworkState state;
    state.slot = 1;
    state.link = LinkParams{};
    state.users = {{0, 50.0, 0.0}, {1, 120.0, 40.0}, {2, -300.0, 10.0}, {3, 10.0, 200.0}};
    state.channels = {{0, 5e6, false}, {1, 1e7, false}, {2, 2e7, false}, {3, 1.5e7, true}};
    state.active_ids = {0, 1, 2};
    return state;
}

int count_kind(const FeasibilityReport& report, ViolationKind kind) {
    int n = 0;
    for (const auto& v : report.violations) n += v.kind == kind ? 1 : 0;
    return n;
}

}  // namespace

TEST_CASE("is_feasible: empty assignment is vacuously feasible") {
    const NetworkState state = small_state();
    const FeasibilityReport report = is_feasible(Allocation{}, state);
    CHECK(report.feasible);
    CHECK(report.violations.empty());
}

TEST_CASE("is_feasible: duplicate channel reported once per channel") {
    const NetworkState state = small_state();
    Allocation alloc;
    alloc.assignment = {{0, 1}, {1, 1}};
    const FeasibilityReport report = is_feasible(alloc, state);
    CHECK(!report.feasible);
    CHECK(report.violations.size() == 1);
    CHECK(count_kind(report, ViolationKind::DuplicateChannel) == 1);
    CHECK(report.violations[0].subject == 1);
}

TEST_CASE("is_feasible: occupied channel, unknown user, unknown channel") {
    const NetworkState state = small_state();

    Allocation occupied;
    occupied.assignment = {{0, 3}};
    CHECK(count_kind(is_feasible(occupied, state), ViolationKind::OccupiedChannel) == 1);

    Allocation inactive;
    inactive.assignment = {{3, 0}};  // user 3 exists but is not requesting
    CHECK(count_kind(is_feasible(inactive, state), ViolationKind::UnknownUser) == 1);

    Allocation ghost;
    ghost.assignment = {{0, 99}};
    CHECK(count_kind(is_feasible(ghost, state), ViolationKind::UnknownChannel) == 1);

    Allocation multi;
    multi.assignment = {{0, 3}, {1, 3}, {7, 0}};
    const FeasibilityReport report = is_feasible(multi, state);
    CHECK(count_kind(report, ViolationKind::OccupiedChannel) == 2);
    CHECK(count_kind(report, ViolationKind::DuplicateChannel) == 1);
    CHECK(count_kind(report, ViolationKind::UnknownUser) == 1);
}

TEST_CASE("slot_utility: empty, single pair, elementwise oracle, infeasible input") {
    const NetworkState state = small_state();
    CHECK(slot_utility(Allocation{}, state) == 0.0);

    const Matrix rates = rate_matrix(state);
    Allocation single;
    single.assignment = {{1, 2}};
    CHECK(slot_utility(single, state) == rates.at(1, 2));

    Allocation full;
    full.assignment = {{0, 2}, {1, 0}, {2, 1}};
    CHECK(slot_utility(full, state) ==
          doctest::Approx(rates.at(0, 2) + rates.at(1, 0) + rates.at(2, 1)).epsilon(1e-12));

    Allocation bad;
    bad.assignment = {{0, 1}, {1, 1}};
    CHECK_THROWS_AS(slot_utility(bad, state), InfeasibleAllocation);
}

TEST_CASE("slot_utility is additive over disjoint assignments") {
    const NetworkState state = small_state();
    Allocation a;
    a.assignment = {{0, 2}};
    Allocation b;
    b.assignment = {{1, 0}, {2, 1}};
    Allocation both;
    both.assignment = {{0, 2}, {1, 0}, {2, 1}};
    CHECK(slot_utility(both, state) ==
          doctest::Approx(slot_utility(a, state) + slot_utility(b, state)).epsilon(1e-12));
}

TEST_CASE("episode_utility: gamma extremes and direct evaluation") {
    const std::vector<double> u = {8.0, 4.0, 2.0};
    CHECK(episode_utility(u, 1.0) == 14.0);
    CHECK(episode_utility(u, 0.0) == 8.0);
    CHECK(episode_utility(u, 0.5) == doctest::Approx(10.5).epsilon(1e-15));
    CHECK(episode_utility({}, 0.7) == 0.0);
    CHECK_THROWS_AS(episode_utility(u, 1.5), std::invalid_argument);
}

TEST_CASE("quadratic_utility: feasible allocations collapse to slot_utility") {
    const NetworkState state = small_state();
    Matrix penalty(4, 4, 2.5);
    for (int i = 0; i < 4; ++i) penalty.at(i, i) = 0.0;

    Allocation feasible;
    feasible.assignment = {{0, 0}, {1, 2}, {2, 1}};
    for (const double eta : {0.0, 1.0, 17.5}) {
        CHECK(quadratic_utility(feasible, state, eta, penalty) ==
              doctest::Approx(slot_utility(feasible, state)).epsilon(1e-12));
    }
}

TEST_CASE("quadratic_utility: ordered-pair penalty against the literal double sum") {
    const NetworkState state = small_state();
    Matrix penalty(4, 4, 0.0);
    penalty.at(0, 1) = 5.0;
    penalty.at(1, 0) = 5.0;

    Allocation conflict;
    conflict.assignment = {{0, 1}, {1, 1}};  // both on channel 1

    // Literal sum over ordered pairs u != u' and channels.
    const Matrix rates = rate_matrix(state);
    double expect = rates.at(0, 1) + rates.at(1, 1);
    double pen = 0.0;
    const int ids[] = {0, 1};
    for (const int u1 : ids) {
        for (const int u2 : ids) {
            if (u1 == u2) continue;
            for (int c = 0; c < 4; ++c) {
                const bool x1 = conflict.assignment.count(u1) && conflict.assignment.at(u1) == c;
                const bool x2 = conflict.assignment.count(u2) && conflict.assignment.at(u2) == c;
                if (x1 && x2) pen += penalty.at(u1, u2);
            }
        }
    }
    CHECK(pen == 10.0);  // counted in both orders
    CHECK(quadratic_utility(conflict, state, 1.0, penalty) ==
          doctest::Approx(expect - pen).epsilon(1e-12));
    CHECK(quadratic_utility(conflict, state, 0.0, penalty) ==
          doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("quadratic_utility: rejects asymmetric or negative penalties") {
    const NetworkState state = small_state();
    Allocation alloc;
    alloc.assignment = {{0, 0}};

    Matrix asym(4, 4, 0.0);
    asym.at(0, 1) = 1.0;
    CHECK_THROWS_AS(quadratic_utility(alloc, state, 1.0, asym), std::invalid_argument);

    Matrix negative(4, 4, -1.0);
    CHECK_THROWS_AS(quadratic_utility(alloc, state, 1.0, negative), std::invalid_argument);
}
