#include "lsa/reward.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "lsa/solvers.hpp"

namespace lsa {

namespace {

double clamp_to(const RewardWeights& w, double v) { return std::clamp(v, w.clamp_lo, w.clamp_hi); }

// Lenient aggregate throughput of a raw map: only (active user, existing idle
// channel) pairs earn their rate, everything else contributes zero.
double lenient_throughput(const std::map<int, int>& raw, const StateIndex& index) {
    double total = 0.0;
    for (const auto& [user_id, channel_id] : raw) {
        if (!index.is_active(user_id) || !index.has_channel(channel_id)) continue;
        if (index.channel(channel_id).occupied) continue;
        total += index.rate(user_id, channel_id);
    }
    return total;
}

}  // namespace

double reward_struct(const ParseResult& parsed, const NetworkState& state,
                     const RewardWeights& weights) {
    if (!parsed.ok()) return 0.0;

    double score = weights.struct_parse;

    std::unordered_set<int> active(state.active_ids.begin(), state.active_ids.end());
    std::unordered_map<int, const ChannelSpec*> channels;
    channels.reserve(state.channels.size());
    for (const auto& c : state.channels) channels.emplace(c.id, &c);

    bool domain_ok = true;
    bool context_ok = true;
    for (const auto& [user_id, channel_id] : parsed.action) {
        if (active.count(user_id) == 0) domain_ok = false;
        const auto it = channels.find(channel_id);
        if (it == channels.end()) {
            domain_ok = false;
            context_ok = false;
        } else if (it->second->occupied) {
            context_ok = false;
        }
    }
    if (domain_ok) score += weights.struct_domain;
    if (context_ok) score += weights.struct_context;
    return std::min(score, weights.struct_cap);
}

double psi_penalty(const std::map<int, int>& raw, const NetworkState& state, double threshold_w) {
    std::unordered_map<int, int> channel_uses;
    for (const auto& [user_id, channel_id] : raw) {
        if (++channel_uses[channel_id] > 1) return 0.0;
    }

    const StateIndex index(state);
    for (const auto& [user_id, channel_id] : raw) {
        if (!index.has_channel(channel_id)) continue;
        const ChannelSpec& chan = index.channel(channel_id);
        if (!chan.occupied) continue;
        const UserNode* user = index.find_user(user_id);
        if (user == nullptr) continue;  // no transmitter, no interference
        const double p = received_power(state.link, normalized_distance(*user, state.link));
        const double thr = threshold_w >= 0.0
                               ? threshold_w
                               : 10.0 * dbm_to_watts(state.link.noise_density_dbm_hz) * chan.bandwidth_hz;
        if (p > thr) return 0.3;
    }
    return 1.0;
}

double reward_perf(const std::map<int, int>& raw, const NetworkState& state,
                   const RewardWeights& weights, std::uint64_t seed, bool* degenerate,
                   double* psi_out) {
    if (degenerate != nullptr) *degenerate = false;

    const double psi = psi_penalty(raw, state, weights.interference_threshold_w);
    if (psi_out != nullptr) *psi_out = psi;

    if (raw.empty()) return 0.0;

    const SolveResult baseline = solve_random(seed, state);
    if (baseline.objective <= 0.0) {
        if (degenerate != nullptr) *degenerate = true;
        return 0.0;
    }

    const StateIndex index(state);
    const double t_llm = lenient_throughput(raw, index);
    return clamp_to(weights, weights.omega * (t_llm / baseline.objective - 1.0) * psi);
}

double reward_depth(int output_tokens, const RewardWeights& weights) {
    if (output_tokens < 0) throw std::invalid_argument("output_tokens must be non-negative");
    const double deficit = (weights.l_thr - static_cast<double>(output_tokens)) / weights.l_thr;
    return -std::max(0.0, deficit * weights.kappa);
}

RewardBreakdown reward_total(std::string_view text, const NetworkState& state,
                             const RewardWeights& weights, std::uint64_t seed) {
    RewardBreakdown b;

    const ParseResult parsed = parse_action(text);
    static const std::map<int, int> kEmpty;
    const std::map<int, int>& raw = parsed.ok() ? parsed.action : kEmpty;

    b.r_struct = reward_struct(parsed, state, weights);
    b.r_perf = reward_perf(raw, state, weights, seed, &b.perf_degenerate, &b.psi);
    b.r_depth = reward_depth(estimate_tokens(text), weights);
    b.total = clamp_to(weights, weights.lambda1 * b.r_struct + weights.lambda2 * b.r_perf +
                                    weights.lambda3 * b.r_depth);
    return b;
}

}  // namespace lsa
