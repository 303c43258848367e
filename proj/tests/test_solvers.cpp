#include <doctest.h>
#include <map>

#include "lsa/solvers.hpp"
#include "support/oracles.hpp"

using namespace lsa;

TEST_CASE("max_weight_assignment: dominant diagonal and single-row argmax") {
    Matrix w(2, 2);
    w.at(0, 0) = 10.0;
    w.at(0, 1) = 1.0;
    w.at(1, 0) = 1.0;
    w.at(1, 1) = 10.0;
    CHECK(max_weight_assignment(w) == std::vector<int>{0, 1});

    Matrix row(1, 5, 0.0);
    row.at(0, 3) = 7.0;
    CHECK(max_weight_assignment(row) == std::vector<int>{3});

    // More rows than columns: a max-weight subset of rows is served.
    Matrix tall(3, 1, 0.0);
    tall.at(0, 0) = 1.0;
    tall.at(1, 0) = 5.0;
    tall.at(2, 0) = 2.0;
    CHECK(max_weight_assignment(tall) == std::vector<int>{-1, 0, -1});
}

TEST_CASE("solve_random: forced pair, empty set, determinism") {
    NetworkState state;
    state.link = LinkParams{};
    state.users = {{0, 100.0, 0.0}};
    state.channels = {{0, 1e7, false}};
    state.active_ids = {0};

    const SolveResult forced = solve_random(3, state);
    CHECK(forced.allocation.assignment == std::map<int, int>{{0, 0}});
    CHECK(!forced.partial);

    state.active_ids = {};
    const SolveResult empty = solve_random(3, state);
    CHECK(empty.allocation.assignment.empty());
    CHECK(empty.objective == 0.0);

    const NetworkState big = make_state(77, 1, 12, 10, 6, 0.2, LinkParams{});
    const SolveResult a = solve_random(5, big);
    const SolveResult b = solve_random(5, big);
    CHECK(a.allocation.assignment == b.allocation.assignment);
    CHECK(is_feasible(a.allocation, big).feasible);
}

TEST_CASE("solve_random: the six 3x3 injections are drawn uniformly") {
    NetworkState state;
    state.link = LinkParams{};
    state.users = {{0, 50.0, 0.0}, {1, 150.0, 0.0}, {2, 250.0, 0.0}};
    state.channels = {{0, 1e7, false}, {1, 1.2e7, false}, {2, 1.4e7, false}};
    state.active_ids = {0, 1, 2};

    std::map<std::map<int, int>, int> counts;
    const int n = 10000;
    for (int seed = 0; seed < n; ++seed) ++counts[solve_random(seed, state).allocation.assignment];
    REQUIRE(counts.size() == 6);

    // Exact binomial: p = 1/6, three sigma.
    const double p = 1.0 / 6.0;
    const double sigma = std::sqrt(p * (1.0 - p) / n);
    for (const auto& [alloc, count] : counts) {
        CHECK(std::abs(static_cast<double>(count) / n - p) <= 3.0 * sigma);
    }
}

TEST_CASE("solve_exhaustive: 1x1, dominance on small instances, size guard") {
    NetworkState tiny;
    tiny.link = LinkParams{};
    tiny.users = {{0, 100.0, 0.0}};
    tiny.channels = {{0, 1e7, false}};
    tiny.active_ids = {0};
    CHECK(solve_exhaustive(tiny).allocation.assignment == std::map<int, int>{{0, 0}});

    const NetworkState state = make_state(31, 1, 6, 6, 4, 0.0, LinkParams{});
    const SolveResult best = solve_exhaustive(state);
    CHECK(best.objective >= solve_random(1, state).objective);
    CHECK(best.objective >= solve_hungarian(state).objective);
    CHECK(best.objective >= solve_de(1, state, DeOptions{50, 0.9, 0.5, 10, 1e9}).objective);

    CHECK_THROWS_AS(solve_exhaustive(state, 10), SizeExceeded);
}

TEST_CASE("solve_exhaustive: agrees with the permutation-loop oracle") {
    Rng rng(4242);
    for (int i = 0; i < 25; ++i) {
        const NetworkState state = make_state(rng.next_u64(), 1, 4, 5, 4, 0.1, LinkParams{});
        const SolveResult best = solve_exhaustive(state);
        CHECK(best.objective ==
              doctest::Approx(oracle::reference_best_assignment(state)).epsilon(1e-12));
        CHECK(is_feasible(best.allocation, state).feasible);
    }
}

TEST_CASE("solve_exhaustive: scarce idle channels still yield the optimum") {
    Rng rng(555);
    for (int i = 0; i < 10; ++i) {
        const NetworkState state = make_state(rng.next_u64(), 1, 5, 3, 5, 0.0, LinkParams{});
        const SolveResult best = solve_exhaustive(state);
        CHECK(best.partial);
        CHECK(best.objective ==
              doctest::Approx(oracle::reference_best_assignment(state)).epsilon(1e-12));
    }
}

TEST_CASE("solve_hungarian: equals exhaustive exactly on random instances") {
    Rng rng(101);
    for (int i = 0; i < 150; ++i) {
        const int users = 1 + static_cast<int>(rng.next_below(7));
        const int channels = 1 + static_cast<int>(rng.next_below(7));
        const int k = 1 + static_cast<int>(rng.next_below(users));
        const NetworkState state = make_state(rng.next_u64(), 1, users, channels, k,
                                              static_cast<double>(rng.next_below(40)) / 100.0,
                                              LinkParams{});
        if (idle_channels(state).empty()) continue;
        const SolveResult km = solve_hungarian(state);
        const SolveResult ex = solve_exhaustive(state);
        CHECK(km.objective == ex.objective);  // zero tolerance
        CHECK(is_feasible(km.allocation, state).feasible);
    }
}

TEST_CASE("solve_grouped_hungarian: one block reproduces plain Hungarian") {
    const NetworkState state = make_state(88, 1, 20, 24, 12, 0.1, LinkParams{});
    GroupedOptions opt;
    opt.group_size = 64;  // larger than the active set: a single block
    opt.min_iterations = 1;
    opt.max_iterations = 1;
    const SolveResult grouped = solve_grouped_hungarian(state, opt);
    const SolveResult km = solve_hungarian(state);
    CHECK(grouped.objective == doctest::Approx(km.objective).epsilon(1e-12));
}

TEST_CASE("solve_grouped_hungarian: tiny budget still completes one pass") {
    const NetworkState state = make_state(88, 1, 60, 80, 40, 0.1, LinkParams{});
    GroupedOptions opt;
    opt.group_size = 10;
    opt.budget_s = 1e-9;
    const SolveResult r = solve_grouped_hungarian(state, opt);
    CHECK(r.iterations == 1);
    CHECK(is_feasible(r.allocation, state).feasible);
    CHECK(r.allocation.assignment.size() == state.active_ids.size());
}

TEST_CASE("solve_grouped_hungarian: more iterations never hurt") {
    const NetworkState state = make_state(123, 1, 200, 220, 100, 0.05, LinkParams{});
    GroupedOptions one;
    one.group_size = 25;
    one.seed = 9;
    one.min_iterations = 1;
    one.max_iterations = 1;
    GroupedOptions many = one;
    many.min_iterations = 8;
    many.max_iterations = 8;
    const SolveResult first = solve_grouped_hungarian(state, one);
    const SolveResult refined = solve_grouped_hungarian(state, many);
    CHECK(refined.objective >= first.objective);
    CHECK(is_feasible(refined.allocation, state).feasible);
}

TEST_CASE("solve_de: forced pair, generation-zero population, determinism") {
    NetworkState tiny;
    tiny.link = LinkParams{};
    tiny.users = {{0, 100.0, 0.0}};
    tiny.channels = {{0, 1e7, false}};
    tiny.active_ids = {0};
    DeOptions zero;
    zero.generations = 0;
    CHECK(solve_de(4, tiny, zero).allocation.assignment == std::map<int, int>{{0, 0}});

    const NetworkState state = make_state(321, 1, 8, 8, 5, 0.0, LinkParams{});
    DeOptions opt;
    opt.generations = 30;
    const SolveResult a = solve_de(6, state, opt);
    const SolveResult b = solve_de(6, state, opt);
    CHECK(a.allocation.assignment == b.allocation.assignment);
    CHECK(a.iterations == 30);
    CHECK(is_feasible(a.allocation, state).feasible);

    DeOptions bad;
    bad.pop_size = 3;
    CHECK_THROWS_AS(solve_de(1, state, bad), std::invalid_argument);
}

TEST_CASE("solve_de: beats the mean random allocation on a 5x5 instance") {
    const NetworkState state = make_state(97, 1, 5, 5, 5, 0.0, LinkParams{});

    DeOptions opt;
    opt.generations = 200;
    const SolveResult de = solve_de(11, state, opt);

    double random_mean = 0.0;
    const int n = 1000;
    for (int seed = 0; seed < n; ++seed) random_mean += solve_random(seed, state).objective;
    random_mean /= n;
    CHECK(de.objective >= random_mean);
}

TEST_CASE("solver ordering holds on a small instance batch") {
    Rng rng(2024);
    double rand_sum = 0.0;
    double de_sum = 0.0;
    double km_sum = 0.0;
    double ex_sum = 0.0;
    for (int i = 0; i < 40; ++i) {
        const NetworkState state = make_state(rng.next_u64(), 1, 6, 7, 3, 0.0, LinkParams{});
        rand_sum += solve_random(i, state).objective;
        DeOptions opt;
        opt.generations = 15;
        de_sum += solve_de(i, state, opt).objective;
        km_sum += solve_hungarian(state).objective;
        ex_sum += solve_exhaustive(state).objective;
    }
    CHECK(km_sum == ex_sum);
    CHECK(de_sum > rand_sum);
    CHECK(km_sum >= de_sum);
}
