#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lsa/common.hpp"
#include "lsa/netenv.hpp"
#include "lsa/reward.hpp"

namespace lsa {

// Explicit categorical policy over channel choices. A user is featurized by
// its normalized-distance bucket; an idle channel by its rank in the
// bandwidth-descending order (capped at num_ranks - 1). Sampling walks the
// active users in id order and draws without replacement from the remaining
// idle channels, so emitted candidates are exclusivity-feasible by
// construction.
struct ToyPolicy {
    int num_buckets = 8;
    int num_ranks = 16;
    double temperature = 1.0;
    Matrix theta;  // num_buckets x num_ranks logits

    static ToyPolicy make(int num_buckets = 8, int num_ranks = 16, double temperature = 1.0);
};

struct Candidate {
    std::map<int, int> raw_map;
    std::string rendered_text;  // schema form; round-trips through parse_action
    double logprob_current = 0.0;
    double logprob_ref = 0.0;
    double reward = 0.0;
    double advantage = 0.0;
};

struct CandidateGroup {
    std::vector<Candidate> candidates;
    int state_slot = 0;
    double mu_r = 0.0;
    double sigma_r = 0.0;  // population
};

struct UnreachableCandidate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One rollout; logprob_current is the sum of per-draw log softmax terms.
Candidate sample_candidate(const ToyPolicy& policy, const NetworkState& state, Rng& rng);

// g independent rollouts for one state, g >= 2.
CandidateGroup sample_group(const ToyPolicy& policy, const NetworkState& state, int g,
                            std::uint64_t seed);

// Exact sequential log-probability of raw_map under the without-replacement
// process. Throws UnreachableCandidate for maps the sampler cannot emit.
double log_prob(const ToyPolicy& policy, const NetworkState& state,
                const std::map<int, int>& raw_map);

// Group-relative normalization: (R_i - mu) / (sigma + epsilon), population sigma.
std::vector<double> group_advantages(const std::vector<double>& rewards, double epsilon);

// Clipped surrogate with an analytic per-decision KL penalty, averaged over
// the group's visited decision points:
//   (1/G) sum_i min(r_i A_i, clip(r_i, 1-eps, 1+eps) A_i) - beta * KL
double grpo_objective(const CandidateGroup& group, const ToyPolicy& policy, const ToyPolicy& ref,
                      double clip_eps, double beta, const NetworkState& state);

// One gradient-ascent step on grpo_objective; advantages are treated as
// constants. Deterministic.
ToyPolicy grpo_step(const ToyPolicy& policy, const CandidateGroup& group, const ToyPolicy& ref,
                    double clip_eps, double beta, double learning_rate, const NetworkState& state);

// One ascent step on the summed log-likelihood of expert allocations.
ToyPolicy sft_update(const ToyPolicy& policy,
                     const std::vector<std::pair<NetworkState, std::map<int, int>>>& expert_pairs,
                     double learning_rate);

struct TrainConfig {
    int num_users = 10;
    int num_channels = 15;
    int k_active = 3;
    double occupied_fraction = 0.0;
    LinkParams link;
    double bw_min_hz = 5e6;
    double bw_max_hz = 2e7;

    int steps = 300;
    int group_size = 8;
    double clip_eps = 0.2;
    double beta = 0.25;
    double learning_rate = 0.05;
    double epsilon = 1e-8;  // advantage-normalization regularizer
    RewardWeights weights;
};

struct TraceRow {
    int step = 0;
    double total_mean = 0.0;
    double struct_mean = 0.0;
    double perf_mean = 0.0;
    double depth_mean = 0.0;
};

struct TrainResult {
    ToyPolicy policy;
    std::vector<TraceRow> trace;
};

// GRPO loop: fresh state per step, sample a group, score raw candidates (no
// repair), normalize advantages, update. The reference policy is a frozen
// copy of the policy passed in, so a post-SFT warm start anchors to the SFT
// checkpoint while a cold start anchors to the initial table.
TrainResult train(ToyPolicy policy, const TrainConfig& config, std::uint64_t seed);

// step,total,r_struct_mean,r_perf_mean,r_depth_mean
void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out);

}  // namespace lsa
