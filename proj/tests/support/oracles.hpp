// Test-only reference implementations. These deliberately mirror the
// contracts with straightforward brute force and stay independent of the
// library code paths they are used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "lsa/allocation.hpp"
#include "lsa/netenv.hpp"

namespace oracle {

// Brute-force three-stage repair: literal filtering, argmax winner per
// contended channel, then repeated global argmax over unserved x residual.
inline lsa::Allocation reference_repair(const std::map<int, int>& raw,
                                        const lsa::NetworkState& state) {
    const lsa::Matrix rates = lsa::rate_matrix(state);
    std::map<int, int> row_of;
    for (std::size_t i = 0; i < state.active_ids.size(); ++i)
        row_of[state.active_ids[i]] = static_cast<int>(i);
    std::map<int, int> col_of;
    for (std::size_t c = 0; c < state.channels.size(); ++c)
        col_of[state.channels[c].id] = static_cast<int>(c);

    std::set<int> idle;
    for (const auto& c : state.channels) {
        if (!c.occupied) idle.insert(c.id);
    }

    // Stage 1: keep (active, idle) pairs only.
    std::map<int, std::vector<int>> claimants;  // channel -> users, ascending
    for (const auto& [uid, cid] : raw) {
        if (row_of.count(uid) == 0 || idle.count(cid) == 0) continue;
        claimants[cid].push_back(uid);
    }

    lsa::Allocation alloc;
    alloc.slot = state.slot;
    std::set<int> served;
    std::set<int> used;

    // Stage 2: winner-take-all by rate, ties to the lowest user id.
    for (const auto& [cid, users] : claimants) {
        int winner = -1;
        double best = -1.0;
        for (const int uid : users) {
            const double r = rates.at(static_cast<std::size_t>(row_of[uid]),
                                      static_cast<std::size_t>(col_of[cid]));
            if (r > best || (r == best && uid < winner)) {
                best = r;
                winner = uid;
            }
        }
        alloc.assignment[winner] = cid;
        served.insert(winner);
        used.insert(cid);
    }

    // Stage 3: repeated global argmax with (rate, user id, channel id) order.
    std::vector<int> unserved;
    for (const int uid : state.active_ids) {
        if (served.count(uid) == 0) unserved.push_back(uid);
    }
    std::vector<int> residual;
    for (const int cid : idle) {
        if (used.count(cid) == 0) residual.push_back(cid);
    }
    while (!unserved.empty() && !residual.empty()) {
        int bu = -1;
        int bc = -1;
        double best = -1.0;
        for (const int uid : unserved) {
            for (const int cid : residual) {
                const double r = rates.at(static_cast<std::size_t>(row_of[uid]),
                                          static_cast<std::size_t>(col_of[cid]));
                if (r > best || (r == best && (uid < bu || (uid == bu && cid < bc)))) {
                    best = r;
                    bu = uid;
                    bc = cid;
                }
            }
        }
        alloc.assignment[bu] = bc;
        unserved.erase(std::find(unserved.begin(), unserved.end(), bu));
        residual.erase(std::find(residual.begin(), residual.end(), bc));
    }
    return alloc;
}

// Permutation-loop enumeration of the best injective active->idle map;
// written against std::next_permutation so its structure differs from the
// solver's DFS.
inline double reference_best_assignment(const lsa::NetworkState& state) {
    const lsa::Matrix rates = lsa::rate_matrix(state);
    std::map<int, int> col_of;
    for (std::size_t c = 0; c < state.channels.size(); ++c)
        col_of[state.channels[c].id] = static_cast<int>(c);

    std::vector<int> idle;
    for (const auto& c : state.channels) {
        if (!c.occupied) idle.push_back(c.id);
    }
    std::sort(idle.begin(), idle.end());

    const std::size_t k = state.active_ids.size();
    const std::size_t e = idle.size();
    if (k == 0 || e == 0) return 0.0;

    // Selector: 1 marks a chosen slot; permuting user labels over each chosen
    // channel subset covers every injection.
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> users(k);
    for (std::size_t i = 0; i < k; ++i) users[i] = static_cast<int>(i);

    if (e >= k) {
        std::vector<char> select(e, 0);
        std::fill(select.end() - static_cast<std::ptrdiff_t>(k), select.end(), 1);
        std::sort(select.begin(), select.end());
        do {
            std::vector<int> chosen;
            for (std::size_t i = 0; i < e; ++i) {
                if (select[i]) chosen.push_back(idle[i]);
            }
            std::vector<int> perm = users;
            do {
                double sum = 0.0;
                for (std::size_t i = 0; i < k; ++i)
                    sum += rates.at(static_cast<std::size_t>(perm[i]),
                                    static_cast<std::size_t>(col_of[chosen[i]]));
                best = std::max(best, sum);
            } while (std::next_permutation(perm.begin(), perm.end()));
        } while (std::next_permutation(select.begin(), select.end()));
    } else {
        // Scarce idle set: choose which users are served instead.
        std::vector<char> select(k, 0);
        std::fill(select.end() - static_cast<std::ptrdiff_t>(e), select.end(), 1);
        std::sort(select.begin(), select.end());
        do {
            std::vector<int> served;
            for (std::size_t i = 0; i < k; ++i) {
                if (select[i]) served.push_back(static_cast<int>(i));
            }
            std::vector<int> perm = served;
            std::sort(perm.begin(), perm.end());
            do {
                double sum = 0.0;
                for (std::size_t i = 0; i < e; ++i)
                    sum += rates.at(static_cast<std::size_t>(perm[i]),
                                    static_cast<std::size_t>(col_of[idle[i]]));
                best = std::max(best, sum);
            } while (std::next_permutation(perm.begin(), perm.end()));
        } while (std::next_permutation(select.begin(), select.end()));
    }
    return best;
}

}  // namespace oracle
