#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lsa/allocation.hpp"
#include "lsa/netenv.hpp"

namespace lsa {

struct SolveResult {
    Allocation allocation;  // always feasible
    double objective = 0.0;  // slot_utility(allocation)
    double elapsed_s = 0.0;
    std::string solver_name;
    long iterations = 0;
    bool partial = false;  // idle scarcity left some active users unserved
};

struct SizeExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Maximum-weight assignment of rows to distinct columns (rows <= cols is
// handled directly, otherwise the transpose is solved). Weights must be
// non-negative. Returns, per row, the assigned column or -1.
std::vector<int> max_weight_assignment(const Matrix& weights);

// Uniformly random injective map from active users into idle channels.
// When idle channels are scarce, a uniformly random subset of users is served
// and the result is flagged partial.
SolveResult solve_random(std::uint64_t seed, const NetworkState& state);

// Exact argmax of slot_utility over injective active->idle maps,
// lexicographically first among ties. Throws SizeExceeded when the number of
// maps to enumerate exceeds max_maps.
SolveResult solve_exhaustive(const NetworkState& state, std::uint64_t max_maps = 5000000);

// Kuhn-Munkres on the K_t x |E_t| rate table; optimal for the linear
// objective. Scarce idle channels serve a max-weight subset of users.
SolveResult solve_hungarian(const NetworkState& state);

struct GroupedOptions {
    int group_size = 50;
    double budget_s = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
    long min_iterations = 1;
    long max_iterations = std::numeric_limits<long>::max();
};

// Partitioned Hungarian: users and idle channels are split into disjoint
// random blocks of at most group_size, each block is matched independently and
// the results stitched. While wall clock remains under budget the partition is
// redrawn and the best stitched allocation kept. The first iteration always
// completes; afterwards the budget is checked between block solves, so the
// overshoot is bounded by one block solve.
SolveResult solve_grouped_hungarian(const NetworkState& state, const GroupedOptions& options);
SolveResult solve_grouped_hungarian(const NetworkState& state, double budget_s, int group_size);

struct DeOptions {
    int pop_size = 50;
    double crossover_rate = 0.9;
    double diff_weight = 0.5;  // F
    long generations = 100;
    double budget_s = std::numeric_limits<double>::infinity();
};

// DE/rand/1/bin over continuous genomes of length K_t in [0,1]. A genome is
// decoded by random keys: users ranked by descending gene value (ties: user
// order) pick channels from the idle list sorted best-rate-first, so every
// decoded allocation is feasible by construction.
SolveResult solve_de(std::uint64_t seed, const NetworkState& state, const DeOptions& options);

}  // namespace lsa
