#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "lsa/common.hpp"

namespace lsa {

// Link-budget parameters of the single-cell downlink model.
struct LinkParams {
    double tx_power_dbm = 23.0;            // transmit power P_tx
    double antenna_gain_tx = 1.0;          // G_t, linear
    double antenna_gain_rx = 1.0;          // G_r, linear
    double wavelength_m = 0.125;           // carrier wavelength (2.4 GHz)
    double path_loss_exp = 3.5;            // alpha
    double noise_density_dbm_hz = -112.0;  // N_0
    double cell_radius_m = 500.0;          // D_max
    // Lower bound applied to the normalized distance; the path-loss law
    // diverges at d = 0. Set <= 0 to disable the floor.
    double distance_floor = 1e-3;

    void validate() const;  // throws std::invalid_argument
};

struct UserNode {
    int id = 0;
    double x_m = 0.0;  // position relative to the base station at the origin
    double y_m = 0.0;
};

struct ChannelSpec {
    int id = 0;
    double bandwidth_hz = 0.0;
    bool occupied = false;  // primary-user occupancy; occupied channels are off limits
};

// Full physical state of one scheduling slot.
struct NetworkState {
    int slot = 0;
    std::vector<UserNode> users;
    std::vector<ChannelSpec> channels;
    std::vector<int> active_ids;  // requesting users this slot, ascending
    LinkParams link;
    std::uint64_t rng_seed = 0;
};

struct ZeroDistance : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonPositiveDistance : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RangeExceedsPopulation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// num_users nodes uniform on the disk of radius cell_radius_m (a homogeneous
// Poisson process conditioned on its count is uniform). Ids are 0..n-1.
std::vector<UserNode> sample_topology(std::uint64_t seed, int num_users, const LinkParams& link);

// Channel set with bandwidths uniform in [bw_min_hz, bw_max_hz] and
// independent Bernoulli(occupied_fraction) primary-user occupancy.
std::vector<ChannelSpec> sample_channels(std::uint64_t seed, int num_channels, double bw_min_hz,
                                         double bw_max_hz, double occupied_fraction);

// Euclidean distance to the base station over D_max, floored at
// link.distance_floor. Throws ZeroDistance for a co-located user when the
// floor is disabled.
double normalized_distance(const UserNode& user, const LinkParams& link);

// Log-distance path loss: P_tx_w * G_t * G_r * (lambda / (4 pi d_norm D_max))^alpha.
double received_power(const LinkParams& link, double d_norm);

// Shannon-Hartley: B * log2(1 + P / (sigma^2 + I)), sigma^2 = N_0_w_per_hz * B.
double achievable_rate(double power_w, double interference_w, double bandwidth_hz,
                       double noise_density_dbm_hz);

// Rate of one (user, channel) pair under zero interference; equals the
// corresponding rate_matrix entry.
double pair_rate(const NetworkState& state, int user_id, int channel_id);

// K_t x C table of interference-free achievable rates, rows in active_ids
// order, columns in channel order.
Matrix rate_matrix(const NetworkState& state);

// New active set: K_t uniform in [k_min, k_max], then K_t distinct user ids
// without replacement. Deterministic per (seed, state.slot). Result ascending.
std::vector<int> step_traffic(std::uint64_t seed, const NetworkState& state, int k_min, int k_max);

// Convenience builder used by the benchmark harness and the trainer:
// topology and channels are drawn once from `seed`, the active set from
// (seed, slot). k_active is a fixed per-slot requester count.
NetworkState make_state(std::uint64_t seed, int slot, int num_users, int num_channels,
                        int k_active, double occupied_fraction, const LinkParams& link,
                        double bw_min_hz = 5e6, double bw_max_hz = 2e7);

// Id-keyed lookups plus cached per-active-user received power; built once per
// slot by the hot paths (repair, solvers).
class StateIndex {
public:
    explicit StateIndex(const NetworkState& state);

    const NetworkState& state() const { return *state_; }

    bool is_active(int user_id) const { return active_row_.count(user_id) != 0; }
    bool has_channel(int channel_id) const { return channel_col_.count(channel_id) != 0; }

    // Row of an active user in rate_matrix / active_ids order.
    int active_row(int user_id) const { return active_row_.at(user_id); }
    int channel_col(int channel_id) const { return channel_col_.at(channel_id); }

    const ChannelSpec& channel(int channel_id) const;
    const UserNode* find_user(int user_id) const;

    // Received power of an active user, cached.
    double power_w(int user_id) const { return power_w_[active_row_.at(user_id)]; }

    double rate(int user_id, int channel_id) const;

private:
    const NetworkState* state_;
    std::unordered_map<int, int> active_row_;
    std::unordered_map<int, int> channel_col_;
    std::unordered_map<int, int> user_index_;
    std::vector<double> power_w_;  // by active row
};

}  // namespace lsa
