#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "lsa/netenv.hpp"

namespace lsa {

// User-to-channel mapping for one slot. Equivalent to the binary assignment
// matrix with x[u][c] = 1 iff assignment[u] == c. Raw candidates may violate
// the hard constraints; is_feasible reports, it does not reject.
struct Allocation {
    std::map<int, int> assignment;  // active user id -> channel id
    int slot = 0;
};

enum class ViolationKind {
    DuplicateChannel,  // channel assigned to more than one user
    OccupiedChannel,   // channel held by a primary user
    UnknownUser,       // key is not an active user this slot
    UnknownChannel,    // value is not a channel of this state
    MultiAssignment,   // user mapped to several channels (impossible for map-backed
                       // candidates; kept for pair-list sources)
};

struct Violation {
    ViolationKind kind;
    int subject;  // offending user id (UnknownUser/MultiAssignment) or channel id
};

struct FeasibilityReport {
    bool feasible = true;
    std::vector<Violation> violations;
};

struct InfeasibleAllocation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Checks single-connectivity, spectral exclusivity, primary-user protection
// and id validity. Lists every violation; duplicate channels are reported once
// per channel.
FeasibilityReport is_feasible(const Allocation& alloc, const NetworkState& state);

// Sum of interference-free achievable rates over the assignment.
// Throws InfeasibleAllocation for infeasible input.
double slot_utility(const Allocation& alloc, const NetworkState& state);

// Discounted episode objective: sum over t of gamma^(t-1) * u_t.
double episode_utility(const std::vector<double>& slot_utilities, double gamma);

// Interference-aware quadratic objective:
//   raw rate sum  -  eta * sum_{u != u'} sum_c x[u][c] x[u'][c] * I(u, u')
// The double sum runs over ordered pairs, so a conflicting pair is charged
// twice. `interference` is a symmetric non-negative matrix indexed by user id
// (channel-independent pairwise penalties). For feasible allocations the
// penalty term vanishes and the result equals slot_utility.
double quadratic_utility(const Allocation& alloc, const NetworkState& state, double eta,
                         const Matrix& interference);

}  // namespace lsa
