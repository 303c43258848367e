#pragma once

#include <cstdint>
#include <map>
#include <string_view>

#include "lsa/netenv.hpp"
#include "lsa/serializer.hpp"

namespace lsa {

struct RewardWeights {
    double lambda1 = 1.0;  // structural weight
    double lambda2 = 1.0;  // performance weight
    double lambda3 = 1.0;  // depth-regularization weight

    double omega = 5.0;  // performance scale
    double kappa = 5.0;  // depth penalty magnitude
    double l_thr = 512.0;  // reasoning-depth threshold, tokens

    double clamp_lo = -10.0;
    double clamp_hi = 10.0;

    // Received co-channel power above this (watts) on an occupied channel
    // degrades psi to 0.3; negative means auto = 10 * sigma^2 of the violated
    // channel.
    double interference_threshold_w = -1.0;

    // Structural sub-scores: parseable block / valid ids / idle-only context.
    double struct_parse = 0.4;
    double struct_domain = 0.4;
    double struct_context = 0.4;
    double struct_cap = 1.2;
};

struct RewardBreakdown {
    double r_struct = 0.0;  // [0, struct_cap]
    double r_perf = 0.0;    // [clamp_lo, clamp_hi]
    double r_depth = 0.0;   // [-kappa, 0]
    double total = 0.0;     // clamp(l1*struct + l2*perf + l3*depth)
    double psi = 1.0;       // 0 | 0.3 | 1
    bool perf_degenerate = false;  // random baseline had zero throughput
};

// Structural compliance score: additive sub-scores for a parseable action
// block, in-domain ids, and idle-only channel choices, capped.
double reward_struct(const ParseResult& parsed, const NetworkState& state,
                     const RewardWeights& weights);

// Interference modulation: 0 on duplicate channel use, 0.3 when a primary
// channel receives co-channel power above the threshold, 1 otherwise.
double psi_penalty(const std::map<int, int>& raw, const NetworkState& state, double threshold_w);

// Relative performance gain against a fresh seeded random valid assignment:
// omega * (T(raw) / T(rand) - 1) * psi, clamped. Raw throughput is lenient:
// pairs with out-of-domain ids or occupied channels contribute zero rate.
// Returns 0 for an empty map and for a degenerate (zero-throughput) baseline.
double reward_perf(const std::map<int, int>& raw, const NetworkState& state,
                   const RewardWeights& weights, std::uint64_t seed,
                   bool* degenerate = nullptr, double* psi_out = nullptr);

// Length-aware incentive: -max(0, (l_thr - tokens) / l_thr * kappa).
double reward_depth(int output_tokens, const RewardWeights& weights);

// Full tripartite reward of one raw candidate text. Never invokes repair;
// training-phase credit assignment is computed on the raw output.
RewardBreakdown reward_total(std::string_view text, const NetworkState& state,
                             const RewardWeights& weights, std::uint64_t seed);

}  // namespace lsa
