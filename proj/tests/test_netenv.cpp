#include <cmath>
#include <doctest.h>

#include "lsa/netenv.hpp"

using namespace lsa;

namespace {
bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}
}  // namespace

TEST_CASE("sample_topology: empty case and in-cell bound") {
    LinkParams link;
    CHECK(sample_topology(7, 0, link).empty());

    const auto users = sample_topology(11, 500, link);
    REQUIRE(users.size() == 500);
    for (const auto& u : users) CHECK(std::hypot(u.x_m, u.y_m) <= link.cell_radius_m);
}

TEST_CASE("sample_topology: reseeding reproduces bit-identical topologies") {
    LinkParams link;
    const auto a = sample_topology(42, 200, link);
    const auto b = sample_topology(42, 200, link);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x_m == b[i].x_m);
        CHECK(a[i].y_m == b[i].y_m);
    }
    const auto c = sample_topology(43, 200, link);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) any_diff = any_diff || a[i].x_m != c[i].x_m;
    CHECK(any_diff);
}

TEST_CASE("sample_topology: mean radial distance matches the uniform-disk law") {
    LinkParams link;
    const int n = 1000;
    const auto users = sample_topology(42, n, link);
    double mean_r = 0.0;
    for (const auto& u : users) mean_r += std::hypot(u.x_m, u.y_m);
    mean_r /= n;

    // E[r] = 2R/3, sd[r] = R/sqrt(18); allow three standard errors.
    const double expect = 2.0 * link.cell_radius_m / 3.0;
    const double se = link.cell_radius_m / std::sqrt(18.0) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean_r - expect) <= 3.0 * se);
}

TEST_CASE("normalized_distance: direct ratios") {
    LinkParams link;  // D_max = 500
    CHECK(normalized_distance({0, 500.0, 0.0}, link) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(normalized_distance({0, 300.0, 400.0}, link) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(normalized_distance({0, 100.0, 0.0}, link) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("normalized_distance: floor and the disabled-floor error") {
    LinkParams link;
    CHECK(normalized_distance({0, 0.0, 0.0}, link) == link.distance_floor);
    CHECK(normalized_distance({0, 0.1, 0.0}, link) == link.distance_floor);  // below the floor

    link.distance_floor = 0.0;
    CHECK_THROWS_AS(normalized_distance({0, 0.0, 0.0}, link), ZeroDistance);
}

TEST_CASE("received_power: unit ratio at lambda = 4 pi d D") {
    LinkParams link;
    const double d_norm = 0.37;
    link.wavelength_m = 4.0 * M_PI * d_norm * link.cell_radius_m;
    CHECK(close_rel(received_power(link, d_norm), dbm_to_watts(link.tx_power_dbm), 1e-12));
}

TEST_CASE("received_power: doubling the distance scales by 2^-alpha") {
    LinkParams link;
    const double p1 = received_power(link, 0.2);
    const double p2 = received_power(link, 0.4);
    CHECK(close_rel(p2, p1 * std::pow(2.0, -link.path_loss_exp), 1e-12));
}

TEST_CASE("received_power: frozen reference value at defaults") {
    // 23 dBm, unit gains, lambda 0.125 m, alpha 3.5, effective distance 100 m;
    // expected value evaluated ahead of time with a 40-digit oracle.
    LinkParams link;
    const double d_norm = 100.0 / link.cell_radius_m;
    CHECK(close_rel(received_power(link, d_norm), 1.9586215178462728e-15, 1e-12));
}

TEST_CASE("received_power: strictly decreasing in distance; domain error") {
    LinkParams link;
    double prev = received_power(link, 1e-3);
    for (double d = 0.05; d <= 1.0; d += 0.05) {
        const double p = received_power(link, d);
        CHECK(p < prev);
        prev = p;
    }
    CHECK_THROWS_AS(received_power(link, 0.0), NonPositiveDistance);
    CHECK_THROWS_AS(received_power(link, -0.1), NonPositiveDistance);
}

TEST_CASE("achievable_rate: zero power, exact SNR=3 case, frozen reference") {
    CHECK(achievable_rate(0.0, 0.0, 1e6, -112.0) == 0.0);

    // sigma^2 = 1e-15 * 1e6 = 1e-9 W, P = 3e-9 W -> log2(4) = 2 -> 2e6 bit/s.
    CHECK(close_rel(achievable_rate(3e-9, 0.0, 1e6, -120.0), 2e6, 1e-12));

    // Frozen 40-digit oracle of the full expression.
    CHECK(close_rel(achievable_rate(1e-9, 0.0, 1e7, -112.0), 226858.73204728244, 1e-12));
}

TEST_CASE("achievable_rate: monotonicity in power, bandwidth, interference") {
    const double base = achievable_rate(1e-9, 0.0, 1e7, -112.0);
    CHECK(achievable_rate(2e-9, 0.0, 1e7, -112.0) > base);
    CHECK(achievable_rate(1e-9, 0.0, 2e7, -112.0) > base);
    CHECK(achievable_rate(1e-9, 1e-9, 1e7, -112.0) < base);
}

TEST_CASE("dbm/watt conversions round-trip") {
    for (const double dbm : {-112.0, -30.0, 0.0, 23.0, 46.0}) {
        CHECK(close_rel(watts_to_dbm(dbm_to_watts(dbm)), dbm, 1e-12));
    }
    for (const double w : {1e-15, 1e-9, 0.1995262314968879, 1.0}) {
        CHECK(close_rel(dbm_to_watts(watts_to_dbm(w)), w, 1e-12));
    }
}

TEST_CASE("rate_matrix: empty active set and constant rows for equal bandwidths") {
    LinkParams link;
    NetworkState state;
    state.link = link;
    state.users = sample_topology(3, 4, link);
    for (int i = 0; i < 5; ++i) state.channels.push_back({i, 1e7, false});

    const Matrix empty = rate_matrix(state);
    CHECK(empty.rows() == 0);
    CHECK(empty.cols() == 5);

    state.active_ids = {0, 2};
    const Matrix rates = rate_matrix(state);
    REQUIRE(rates.rows() == 2);
    for (std::size_t r = 0; r < rates.rows(); ++r) {
        for (std::size_t c = 1; c < rates.cols(); ++c) CHECK(rates.at(r, c) == rates.at(r, 0));
    }
}

TEST_CASE("rate_matrix: every entry equals the scalar call") {
    const NetworkState state = make_state(99, 1, 10, 8, 6, 0.25, LinkParams{});
    const Matrix rates = rate_matrix(state);
    REQUIRE(rates.rows() == state.active_ids.size());
    for (std::size_t i = 0; i < rates.rows(); ++i) {
        const UserNode* user = nullptr;
        for (const auto& u : state.users) {
            if (u.id == state.active_ids[i]) user = &u;
        }
        REQUIRE(user != nullptr);
        const double p = received_power(state.link, normalized_distance(*user, state.link));
        for (std::size_t c = 0; c < rates.cols(); ++c) {
            const double expect = achievable_rate(p, 0.0, state.channels[c].bandwidth_hz,
                                                  state.link.noise_density_dbm_hz);
            CHECK(rates.at(i, c) == expect);
        }
    }
}

TEST_CASE("pair_rate agrees with the matrix entries") {
    const NetworkState state = make_state(123, 1, 8, 6, 4, 0.2, LinkParams{});
    const Matrix rates = rate_matrix(state);
    for (std::size_t i = 0; i < state.active_ids.size(); ++i) {
        for (std::size_t c = 0; c < state.channels.size(); ++c) {
            CHECK(pair_rate(state, state.active_ids[i], state.channels[c].id) == rates.at(i, c));
        }
    }
}

TEST_CASE("step_traffic: extremes, determinism, distinctness, range error") {
    LinkParams link;
    NetworkState state;
    state.link = link;
    state.users = sample_topology(5, 20, link);
    state.slot = 3;

    CHECK(step_traffic(1, state, 0, 0).empty());

    const auto all = step_traffic(1, state, 20, 20);
    CHECK(all.size() == 20);

    const auto a = step_traffic(9, state, 5, 10);
    const auto b = step_traffic(9, state, 5, 10);
    CHECK(a == b);
    CHECK(a.size() >= 5);
    CHECK(a.size() <= 10);
    CHECK(std::is_sorted(a.begin(), a.end()));
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i] != a[i - 1]);

    state.slot = 4;  // same seed, new slot -> fresh draw
    const auto c = step_traffic(9, state, 5, 10);
    CHECK(a != c);

    CHECK_THROWS_AS(step_traffic(1, state, 0, 21), RangeExceedsPopulation);
    CHECK_THROWS_AS(step_traffic(1, state, 7, 3), std::invalid_argument);
}

TEST_CASE("make_state: deterministic and well-formed") {
    const NetworkState a = make_state(5, 2, 30, 12, 7, 0.3, LinkParams{});
    const NetworkState b = make_state(5, 2, 30, 12, 7, 0.3, LinkParams{});
    CHECK(a.active_ids == b.active_ids);
    CHECK(a.users.size() == 30);
    CHECK(a.channels.size() == 12);
    CHECK(a.active_ids.size() == 7);
    for (std::size_t i = 0; i < a.channels.size(); ++i) {
        CHECK(a.channels[i].bandwidth_hz == b.channels[i].bandwidth_hz);
        CHECK(a.channels[i].bandwidth_hz >= 5e6);
        CHECK(a.channels[i].bandwidth_hz <= 2e7);
    }
}
