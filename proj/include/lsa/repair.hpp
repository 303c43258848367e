#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "lsa/allocation.hpp"
#include "lsa/netenv.hpp"

namespace lsa {

struct RepairOutcome {
    Allocation allocation;       // always feasible
    int kept_suggestions = 0;    // raw pairs preserved verbatim
    int contention_events = 0;   // raw pairs dropped as contention losers
    int greedy_fills = 0;        // pairs added by the residual greedy fill
    std::vector<int> unserved;   // active users left out, ascending; non-empty only
                                 // when idle channels are scarcer than requesters
};

// Ids of unoccupied channels, ascending.
std::vector<int> idle_channels(const NetworkState& state);

// Deterministic three-stage repair of a raw user->channel mapping:
//   1. drop pairs with unknown/inactive users or non-idle channels;
//   2. winner-take-all per contended channel: keep the claimant with the
//      highest rate (ties: lowest user id);
//   3. fill remaining active users from residual idle channels, best rate
//      first (ties: lowest user id, then lowest channel id).
// When idle channels outnumber requesters every active user ends up assigned;
// otherwise the leftovers are reported in `unserved`. Total on any input.
//
// Rates are strictly increasing in received power for a fixed channel and in
// bandwidth for a fixed user, so stages 2-3 order claimants by power and
// channels by bandwidth instead of materializing the rate matrix; the result
// is identical to best-rate-first on the full K_t x |E_t| table.
RepairOutcome repair(const std::map<int, int>& raw, const NetworkState& state);

// Process-wide invocation counter; lets callers assert that reward evaluation
// never routes through repair.
std::uint64_t repair_invocations();

}  // namespace lsa
