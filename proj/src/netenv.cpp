#include "lsa/netenv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lsa {

void LinkParams::validate() const {
    if (!std::isfinite(tx_power_dbm)) throw std::invalid_argument("tx_power_dbm must be finite");
    if (!(path_loss_exp > 2.0)) throw std::invalid_argument("path_loss_exp must exceed 2");
    if (!(cell_radius_m > 0.0)) throw std::invalid_argument("cell_radius_m must be positive");
    if (!(wavelength_m > 0.0)) throw std::invalid_argument("wavelength_m must be positive");
    if (!(antenna_gain_tx > 0.0) || !(antenna_gain_rx > 0.0))
        throw std::invalid_argument("antenna gains must be positive");
}

std::vector<UserNode> sample_topology(std::uint64_t seed, int num_users, const LinkParams& link) {
    link.validate();
    if (num_users < 0) throw std::invalid_argument("num_users must be non-negative");

    Rng rng = Rng::substream(seed, 0x746f706fULL);  // "topo"
    std::vector<UserNode> users;
    users.reserve(static_cast<std::size_t>(num_users));
    for (int i = 0; i < num_users; ++i) {
        // Uniform on the disk: r = R sqrt(u), theta uniform.
        const double r = link.cell_radius_m * std::sqrt(rng.next_real());
        const double theta = 2.0 * std::numbers::pi * rng.next_real();
        users.push_back(UserNode{i, r * std::cos(theta), r * std::sin(theta)});
    }
    return users;
}

std::vector<ChannelSpec> sample_channels(std::uint64_t seed, int num_channels, double bw_min_hz,
                                         double bw_max_hz, double occupied_fraction) {
    if (num_channels < 0) throw std::invalid_argument("num_channels must be non-negative");
    if (!(bw_min_hz > 0.0) || bw_max_hz < bw_min_hz)
        throw std::invalid_argument("bandwidth range must satisfy 0 < min <= max");
    if (occupied_fraction < 0.0 || occupied_fraction >= 1.0)
        throw std::invalid_argument("occupied_fraction must lie in [0, 1)");

    Rng rng = Rng::substream(seed, 0x6368616eULL);  // "chan"
    std::vector<ChannelSpec> channels;
    channels.reserve(static_cast<std::size_t>(num_channels));
    for (int i = 0; i < num_channels; ++i) {
        const double bw = rng.next_real(bw_min_hz, bw_max_hz);
        const bool occupied = rng.next_real() < occupied_fraction;
        channels.push_back(ChannelSpec{i, bw, occupied});
    }
    return channels;
}

double normalized_distance(const UserNode& user, const LinkParams& link) {
    const double d = std::hypot(user.x_m, user.y_m) / link.cell_radius_m;
    if (d <= 0.0 && link.distance_floor <= 0.0)
        throw ZeroDistance("user co-located with the base station and no distance floor set");
    return std::max(d, link.distance_floor);
}

double received_power(const LinkParams& link, double d_norm) {
    if (!(d_norm > 0.0)) throw NonPositiveDistance("d_norm must be positive");
    const double ptx_w = dbm_to_watts(link.tx_power_dbm);
    const double ratio = link.wavelength_m / (4.0 * std::numbers::pi * d_norm * link.cell_radius_m);
    return ptx_w * link.antenna_gain_tx * link.antenna_gain_rx * std::pow(ratio, link.path_loss_exp);
}

double achievable_rate(double power_w, double interference_w, double bandwidth_hz,
                       double noise_density_dbm_hz) {
    if (power_w < 0.0 || interference_w < 0.0) throw std::invalid_argument("powers must be non-negative");
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    const double sigma2 = dbm_to_watts(noise_density_dbm_hz) * bandwidth_hz;
    return bandwidth_hz * std::log2(1.0 + power_w / (sigma2 + interference_w));
}

double pair_rate(const NetworkState& state, int user_id, int channel_id) {
    const UserNode* user = nullptr;
    for (const auto& u : state.users) {
        if (u.id == user_id) {
            user = &u;
            break;
        }
    }
    if (user == nullptr) throw std::invalid_argument("unknown user id");
    const ChannelSpec* chan = nullptr;
    for (const auto& c : state.channels) {
        if (c.id == channel_id) {
            chan = &c;
            break;
        }
    }
    if (chan == nullptr) throw std::invalid_argument("unknown channel id");
    const double p = received_power(state.link, normalized_distance(*user, state.link));
    return achievable_rate(p, 0.0, chan->bandwidth_hz, state.link.noise_density_dbm_hz);
}

Matrix rate_matrix(const NetworkState& state) {
    std::unordered_map<int, const UserNode*> by_id;
    by_id.reserve(state.users.size());
    for (const auto& u : state.users) by_id.emplace(u.id, &u);

    Matrix rates(state.active_ids.size(), state.channels.size());
    for (std::size_t i = 0; i < state.active_ids.size(); ++i) {
        const auto it = by_id.find(state.active_ids[i]);
        if (it == by_id.end()) throw std::invalid_argument("active id not present in users");
        const double p = received_power(state.link, normalized_distance(*it->second, state.link));
        for (std::size_t c = 0; c < state.channels.size(); ++c) {
            rates.at(i, c) = achievable_rate(p, 0.0, state.channels[c].bandwidth_hz,
                                             state.link.noise_density_dbm_hz);
        }
    }
    return rates;
}

std::vector<int> step_traffic(std::uint64_t seed, const NetworkState& state, int k_min, int k_max) {
    if (k_min < 0 || k_min > k_max) throw std::invalid_argument("need 0 <= k_min <= k_max");
    if (static_cast<std::size_t>(k_max) > state.users.size())
        throw RangeExceedsPopulation("k_max exceeds the user population");

    Rng rng = Rng::substream(seed ^ splitmix64(static_cast<std::uint64_t>(state.slot)), 0x74726166ULL);
    const int k = static_cast<int>(rng.next_int(k_min, k_max));

    std::vector<int> ids;
    ids.reserve(state.users.size());
    for (const auto& u : state.users) ids.push_back(u.id);
    rng.partial_shuffle(ids, static_cast<std::size_t>(k));
    ids.resize(static_cast<std::size_t>(k));
    std::sort(ids.begin(), ids.end());
    return ids;
}

NetworkState make_state(std::uint64_t seed, int slot, int num_users, int num_channels,
                        int k_active, double occupied_fraction, const LinkParams& link,
                        double bw_min_hz, double bw_max_hz) {
    NetworkState state;
    state.slot = slot;
    state.rng_seed = seed;
    state.link = link;
    state.users = sample_topology(seed, num_users, link);
    state.channels = sample_channels(seed, num_channels, bw_min_hz, bw_max_hz, occupied_fraction);
    state.active_ids = step_traffic(seed, state, k_active, k_active);
    return state;
}

StateIndex::StateIndex(const NetworkState& state) : state_(&state) {
    user_index_.reserve(state.users.size());
    for (std::size_t i = 0; i < state.users.size(); ++i) user_index_.emplace(state.users[i].id, static_cast<int>(i));
    channel_col_.reserve(state.channels.size());
    for (std::size_t i = 0; i < state.channels.size(); ++i)
        channel_col_.emplace(state.channels[i].id, static_cast<int>(i));

    active_row_.reserve(state.active_ids.size());
    power_w_.resize(state.active_ids.size());
    for (std::size_t i = 0; i < state.active_ids.size(); ++i) {
        const int uid = state.active_ids[i];
        active_row_.emplace(uid, static_cast<int>(i));
        const auto it = user_index_.find(uid);
        if (it == user_index_.end()) throw std::invalid_argument("active id not present in users");
        const UserNode& u = state.users[static_cast<std::size_t>(it->second)];
        power_w_[i] = received_power(state.link, normalized_distance(u, state.link));
    }
}

const ChannelSpec& StateIndex::channel(int channel_id) const {
    return state_->channels[static_cast<std::size_t>(channel_col_.at(channel_id))];
}

const UserNode* StateIndex::find_user(int user_id) const {
    const auto it = user_index_.find(user_id);
    if (it == user_index_.end()) return nullptr;
    return &state_->users[static_cast<std::size_t>(it->second)];
}

double StateIndex::rate(int user_id, int channel_id) const {
    const ChannelSpec& chan = channel(channel_id);
    return achievable_rate(power_w(user_id), 0.0, chan.bandwidth_hz, state_->link.noise_density_dbm_hz);
}

}  // namespace lsa
