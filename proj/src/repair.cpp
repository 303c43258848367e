#include "lsa/repair.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_map>
#include <unordered_set>

namespace lsa {

namespace {
std::atomic<std::uint64_t> g_repair_calls{0};
}

std::uint64_t repair_invocations() { return g_repair_calls.load(); }

std::vector<int> idle_channels(const NetworkState& state) {
    std::vector<int> ids;
    for (const auto& c : state.channels) {
        if (!c.occupied) ids.push_back(c.id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

RepairOutcome repair(const std::map<int, int>& raw, const NetworkState& state) {
    g_repair_calls.fetch_add(1, std::memory_order_relaxed);

    StateIndex index(state);
    const std::vector<int> idle = idle_channels(state);
    std::unordered_set<int> idle_set(idle.begin(), idle.end());

    RepairOutcome out;
    out.allocation.slot = state.slot;

    // Stage 1: keep only (active user, idle channel) pairs.
    std::unordered_map<int, std::vector<int>> claimants;  // channel -> users
    for (const auto& [user_id, channel_id] : raw) {
        if (!index.is_active(user_id) || idle_set.count(channel_id) == 0) continue;
        claimants[channel_id].push_back(user_id);
    }

    // Stage 2: winner-take-all on contended channels; the winner is the
    // claimant with the highest rate on that channel, i.e. the highest
    // received power (ties: lowest id).
    std::unordered_set<int> used_channels;
    std::unordered_set<int> served_users;
    for (auto& [channel_id, users] : claimants) {
        int winner = users.front();
        for (const int u : users) {
            const double pu = index.power_w(u);
            const double pw = index.power_w(winner);
            if (pu > pw || (pu == pw && u < winner)) winner = u;
        }
        out.contention_events += static_cast<int>(users.size()) - 1;
        ++out.kept_suggestions;
        out.allocation.assignment.emplace(winner, channel_id);
        used_channels.insert(channel_id);
        served_users.insert(winner);
    }

    // Stage 3: greedy residual fill, best rate first. Users by descending
    // power, channels by descending bandwidth, then zip.
    std::vector<int> unserved;
    for (const int uid : state.active_ids) {
        if (served_users.count(uid) == 0) unserved.push_back(uid);
    }
    std::sort(unserved.begin(), unserved.end(), [&](int a, int b) {
        const double pa = index.power_w(a);
        const double pb = index.power_w(b);
        if (pa != pb) return pa > pb;
        return a < b;
    });

    std::vector<int> residual;
    for (const int cid : idle) {
        if (used_channels.count(cid) == 0) residual.push_back(cid);
    }
    std::sort(residual.begin(), residual.end(), [&](int a, int b) {
        const double ba = index.channel(a).bandwidth_hz;
        const double bb = index.channel(b).bandwidth_hz;
        if (ba != bb) return ba > bb;
        return a < b;
    });

    const std::size_t fills = std::min(unserved.size(), residual.size());
    for (std::size_t i = 0; i < fills; ++i) {
        out.allocation.assignment.emplace(unserved[i], residual[i]);
        ++out.greedy_fills;
    }

    out.unserved.assign(unserved.begin() + static_cast<std::ptrdiff_t>(fills), unserved.end());
    std::sort(out.unserved.begin(), out.unserved.end());
    return out;
}

}  // namespace lsa
