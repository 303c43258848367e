#include "lsa/allocation.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace lsa {

FeasibilityReport is_feasible(const Allocation& alloc, const NetworkState& state) {
    FeasibilityReport report;

    std::unordered_set<int> active(state.active_ids.begin(), state.active_ids.end());
    std::unordered_map<int, const ChannelSpec*> channels;
    channels.reserve(state.channels.size());
    for (const auto& c : state.channels) channels.emplace(c.id, &c);

    std::unordered_map<int, int> channel_uses;
    for (const auto& [user_id, channel_id] : alloc.assignment) {
        if (active.count(user_id) == 0)
            report.violations.push_back({ViolationKind::UnknownUser, user_id});
        const auto it = channels.find(channel_id);
        if (it == channels.end()) {
            report.violations.push_back({ViolationKind::UnknownChannel, channel_id});
        } else {
            if (it->second->occupied)
                report.violations.push_back({ViolationKind::OccupiedChannel, channel_id});
            ++channel_uses[channel_id];
        }
    }
    for (const auto& [channel_id, uses] : channel_uses) {
        if (uses > 1) report.violations.push_back({ViolationKind::DuplicateChannel, channel_id});
    }

    report.feasible = report.violations.empty();
    return report;
}

double slot_utility(const Allocation& alloc, const NetworkState& state) {
    const FeasibilityReport report = is_feasible(alloc, state);
    if (!report.feasible)
        throw InfeasibleAllocation("slot_utility requires a feasible allocation");

    StateIndex index(state);
    double total = 0.0;
    for (const auto& [user_id, channel_id] : alloc.assignment)
        total += index.rate(user_id, channel_id);
    return total;
}

double episode_utility(const std::vector<double>& slot_utilities, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in [0, 1]");
    double total = 0.0;
    double weight = 1.0;
    for (const double u : slot_utilities) {
        total += weight * u;
        weight *= gamma;
    }
    return total;
}

double quadratic_utility(const Allocation& alloc, const NetworkState& state, double eta,
                         const Matrix& interference) {
    if (interference.rows() != interference.cols())
        throw std::invalid_argument("interference matrix must be square");
    for (std::size_t i = 0; i < interference.rows(); ++i) {
        for (std::size_t j = 0; j < interference.cols(); ++j) {
            const double v = interference.at(i, j);
            if (v < 0.0) throw std::invalid_argument("interference penalties must be non-negative");
            if (v != interference.at(j, i))
                throw std::invalid_argument("interference matrix must be symmetric");
        }
    }

    StateIndex index(state);

    double rate_sum = 0.0;
    for (const auto& [user_id, channel_id] : alloc.assignment) {
        if (index.find_user(user_id) == nullptr || !index.has_channel(channel_id))
            throw std::invalid_argument("quadratic_utility is defined on known users and channels");
        const UserNode& u = *index.find_user(user_id);
        const double p = received_power(state.link, normalized_distance(u, state.link));
        rate_sum += achievable_rate(p, 0.0, index.channel(channel_id).bandwidth_hz,
                                    state.link.noise_density_dbm_hz);
    }

    // Ordered-pair penalty: each co-channel pair contributes I(u,u') + I(u',u).
    double penalty = 0.0;
    for (const auto& [u1, c1] : alloc.assignment) {
        for (const auto& [u2, c2] : alloc.assignment) {
            if (u1 == u2 || c1 != c2) continue;
            if (static_cast<std::size_t>(u1) >= interference.rows() ||
                static_cast<std::size_t>(u2) >= interference.rows())
                throw std::invalid_argument("interference matrix does not cover the assigned user ids");
            penalty += interference.at(static_cast<std::size_t>(u1), static_cast<std::size_t>(u2));
        }
    }

    return rate_sum - eta * penalty;
}

}  // namespace lsa
