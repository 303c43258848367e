#include "lsa/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "lsa/repair.hpp"
#include "lsa/serializer.hpp"

namespace lsa {

namespace {

// Idle channels in preference order (bandwidth descending, ties by id) with
// their capped policy ranks.
struct Ranking {
    std::vector<int> channel_ids;
    std::vector<int> ranks;  // min(position, num_ranks - 1)
};

Ranking make_ranking(const StateIndex& index, const NetworkState& state, const ToyPolicy& policy) {
    Ranking rk;
    rk.channel_ids = idle_channels(state);
    std::sort(rk.channel_ids.begin(), rk.channel_ids.end(), [&](int a, int b) {
        const double ba = index.channel(a).bandwidth_hz;
        const double bb = index.channel(b).bandwidth_hz;
        if (ba != bb) return ba > bb;
        return a < b;
    });
    rk.ranks.resize(rk.channel_ids.size());
    for (std::size_t i = 0; i < rk.ranks.size(); ++i)
        rk.ranks[i] = static_cast<int>(std::min<std::size_t>(i, static_cast<std::size_t>(policy.num_ranks - 1)));
    return rk;
}

int bucket_of(const ToyPolicy& policy, const StateIndex& index, const NetworkState& state,
              int user_id) {
    const UserNode* user = index.find_user(user_id);
    const double d = normalized_distance(*user, state.link);
    const int b = static_cast<int>(d * static_cast<double>(policy.num_buckets));
    return std::clamp(b, 0, policy.num_buckets - 1);
}

// Softmax over the remaining positions of the ranking; returns per-position
// probabilities and, via log_z, the normalizer needed for log-probabilities.
void softmax_remaining(const ToyPolicy& policy, int bucket, const Ranking& rk,
                       const std::vector<int>& remaining, std::vector<double>& probs,
                       std::vector<double>& logits) {
    probs.resize(remaining.size());
    logits.resize(remaining.size());
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < remaining.size(); ++i) {
        const int rank = rk.ranks[static_cast<std::size_t>(remaining[i])];
        logits[i] = policy.theta.at(static_cast<std::size_t>(bucket), static_cast<std::size_t>(rank)) /
                    policy.temperature;
        max_logit = std::max(max_logit, logits[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
        probs[i] = std::exp(logits[i] - max_logit);
        z += probs[i];
    }
    for (double& p : probs) p /= z;
}

// Replayed decision point of one candidate.
struct Decision {
    int bucket = 0;
    std::vector<int> remaining;  // positions into the ranking
    std::size_t chosen = 0;      // index into `remaining`
};

// Reconstructs the sampler's decision sequence for raw_map. Throws
// UnreachableCandidate when the map cannot be produced by the
// without-replacement walk.
std::vector<Decision> replay(const ToyPolicy& policy, const StateIndex& index,
                             const NetworkState& state, const Ranking& rk,
                             const std::map<int, int>& raw_map) {
    std::vector<Decision> decisions;
    std::vector<int> remaining(rk.channel_ids.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = static_cast<int>(i);

    std::size_t consumed = 0;
    for (const int uid : state.active_ids) {
        if (remaining.empty()) {
            if (raw_map.count(uid) != 0)
                throw UnreachableCandidate("user assigned after idle channels were exhausted");
            continue;
        }
        const auto it = raw_map.find(uid);
        if (it == raw_map.end())
            throw UnreachableCandidate("active user missing from the candidate map");
        ++consumed;

        std::size_t chosen = remaining.size();
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            if (rk.channel_ids[static_cast<std::size_t>(remaining[i])] == it->second) {
                chosen = i;
                break;
            }
        }
        if (chosen == remaining.size())
            throw UnreachableCandidate("assigned channel is not an unused idle channel");

        Decision d;
        d.bucket = bucket_of(policy, index, state, uid);
        d.remaining = remaining;
        d.chosen = chosen;
        decisions.push_back(std::move(d));
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(chosen));
    }
    if (consumed != raw_map.size())
        throw UnreachableCandidate("candidate map contains non-active users");
    return decisions;
}

double logprob_of_decisions(const ToyPolicy& policy, const std::vector<Decision>& decisions,
                            const Ranking& rk) {
    std::vector<double> probs, logits;
    double lp = 0.0;
    for (const Decision& d : decisions) {
        softmax_remaining(policy, d.bucket, rk, d.remaining, probs, logits);
        lp += std::log(probs[d.chosen]);
    }
    return lp;
}

}  // namespace

ToyPolicy ToyPolicy::make(int num_buckets, int num_ranks, double temperature) {
    if (num_buckets < 1 || num_ranks < 1) throw std::invalid_argument("policy table must be non-empty");
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    ToyPolicy p;
    p.num_buckets = num_buckets;
    p.num_ranks = num_ranks;
    p.temperature = temperature;
    p.theta = Matrix(static_cast<std::size_t>(num_buckets), static_cast<std::size_t>(num_ranks), 0.0);
    return p;
}

Candidate sample_candidate(const ToyPolicy& policy, const NetworkState& state, Rng& rng) {
    const StateIndex index(state);
    const Ranking rk = make_ranking(index, state, policy);

    Candidate cand;
    std::vector<int> remaining(rk.channel_ids.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = static_cast<int>(i);

    std::vector<double> probs, logits;
    for (const int uid : state.active_ids) {
        if (remaining.empty()) break;
        const int bucket = bucket_of(policy, index, state, uid);
        softmax_remaining(policy, bucket, rk, remaining, probs, logits);

        const double u = rng.next_real();
        std::size_t pick = probs.size() - 1;
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) {
                pick = i;
                break;
            }
        }
        cand.raw_map.emplace(uid, rk.channel_ids[static_cast<std::size_t>(remaining[pick])]);
        cand.logprob_current += std::log(probs[pick]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    cand.rendered_text = render_action(cand.raw_map);
    cand.logprob_ref = cand.logprob_current;
    return cand;
}

CandidateGroup sample_group(const ToyPolicy& policy, const NetworkState& state, int g,
                            std::uint64_t seed) {
    if (g < 2) throw std::invalid_argument("group size must be at least 2");
    CandidateGroup group;
    group.state_slot = state.slot;
    group.candidates.reserve(static_cast<std::size_t>(g));
    for (int i = 0; i < g; ++i) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
        group.candidates.push_back(sample_candidate(policy, state, rng));
    }
    return group;
}

double log_prob(const ToyPolicy& policy, const NetworkState& state,
                const std::map<int, int>& raw_map) {
    const StateIndex index(state);
    const Ranking rk = make_ranking(index, state, policy);
    return logprob_of_decisions(policy, replay(policy, index, state, rk, raw_map), rk);
}

std::vector<double> group_advantages(const std::vector<double>& rewards, double epsilon) {
    if (rewards.size() < 2) throw std::invalid_argument("need at least two rewards");
    const double n = static_cast<double>(rewards.size());
    double mu = 0.0;
    for (const double r : rewards) mu += r;
    mu /= n;
    double var = 0.0;
    for (const double r : rewards) var += (r - mu) * (r - mu);
    const double sigma = std::sqrt(var / n);

    std::vector<double> advantages(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i)
        advantages[i] = (rewards[i] - mu) / (sigma + epsilon);
    return advantages;
}

namespace {

struct EvalResult {
    double objective = 0.0;
    Matrix grad;  // d objective / d theta; empty unless requested
};

EvalResult eval_grpo(const CandidateGroup& group, const ToyPolicy& policy, const ToyPolicy& ref,
                     double clip_eps, double beta, const NetworkState& state, bool want_grad) {
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw std::invalid_argument("clip_eps must lie in (0,1)");
    if (beta < 0.0) throw std::invalid_argument("beta must be non-negative");
    if (group.candidates.empty()) throw std::invalid_argument("empty candidate group");
    if (policy.num_buckets != ref.num_buckets || policy.num_ranks != ref.num_ranks)
        throw std::invalid_argument("policy and reference must share the same table shape");

    const StateIndex index(state);
    const Ranking rk = make_ranking(index, state, policy);
    const double g = static_cast<double>(group.candidates.size());
    const double inv_tau = 1.0 / policy.temperature;

    EvalResult out;
    Matrix surrogate_grad(policy.theta.rows(), policy.theta.cols(), 0.0);
    Matrix kl_grad(policy.theta.rows(), policy.theta.cols(), 0.0);

    double surrogate_sum = 0.0;
    double kl_sum = 0.0;
    long kl_points = 0;

    std::vector<double> p_cur, p_ref, l_cur, l_ref;
    for (const Candidate& cand : group.candidates) {
        const std::vector<Decision> decisions = replay(policy, index, state, rk, cand.raw_map);

        // Per-decision categorical distributions for both policies.
        double lp_cur = 0.0;
        double lp_ref = 0.0;
        std::vector<std::vector<double>> probs_cur(decisions.size());
        std::vector<std::vector<double>> probs_ref(decisions.size());
        for (std::size_t d = 0; d < decisions.size(); ++d) {
            softmax_remaining(policy, decisions[d].bucket, rk, decisions[d].remaining, p_cur, l_cur);
            softmax_remaining(ref, decisions[d].bucket, rk, decisions[d].remaining, p_ref, l_ref);
            lp_cur += std::log(p_cur[decisions[d].chosen]);
            lp_ref += std::log(p_ref[decisions[d].chosen]);
            probs_cur[d] = p_cur;
            probs_ref[d] = p_ref;
        }

        const double ratio = std::exp(lp_cur - lp_ref);
        const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
        const double u1 = ratio * cand.advantage;
        const double u2 = clipped * cand.advantage;
        surrogate_sum += std::min(u1, u2);

        // Gradient flows only through the unclipped branch.
        if (want_grad && u1 <= u2) {
            const double coeff = ratio * cand.advantage / g;
            for (std::size_t d = 0; d < decisions.size(); ++d) {
                const Decision& dec = decisions[d];
                const std::size_t b = static_cast<std::size_t>(dec.bucket);
                const std::vector<double>& p = probs_cur[d];
                const int chosen_rank = rk.ranks[static_cast<std::size_t>(dec.remaining[dec.chosen])];
                surrogate_grad.at(b, static_cast<std::size_t>(chosen_rank)) += coeff * inv_tau;
                for (std::size_t i = 0; i < dec.remaining.size(); ++i) {
                    const int r = rk.ranks[static_cast<std::size_t>(dec.remaining[i])];
                    surrogate_grad.at(b, static_cast<std::size_t>(r)) -= coeff * inv_tau * p[i];
                }
            }
        }

        // Analytic KL over every visited decision point.
        for (std::size_t d = 0; d < decisions.size(); ++d) {
            const Decision& dec = decisions[d];
            const std::vector<double>& p = probs_cur[d];
            const std::vector<double>& q = probs_ref[d];
            double kl = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
            kl_sum += kl;
            ++kl_points;

            if (want_grad && beta > 0.0) {
                const std::size_t b = static_cast<std::size_t>(dec.bucket);
                for (std::size_t i = 0; i < p.size(); ++i) {
                    const int r = rk.ranks[static_cast<std::size_t>(dec.remaining[i])];
                    const double term = p[i] * ((std::log(p[i]) - std::log(q[i])) - kl);
                    kl_grad.at(b, static_cast<std::size_t>(r)) += inv_tau * term;
                }
            }
        }
    }

    const double mean_kl = kl_points > 0 ? kl_sum / static_cast<double>(kl_points) : 0.0;
    out.objective = surrogate_sum / g - beta * mean_kl;

    if (want_grad) {
        out.grad = Matrix(policy.theta.rows(), policy.theta.cols(), 0.0);
        const double kl_scale = kl_points > 0 ? beta / static_cast<double>(kl_points) : 0.0;
        for (std::size_t i = 0; i < out.grad.data().size(); ++i)
            out.grad.data()[i] = surrogate_grad.data()[i] - kl_scale * kl_grad.data()[i];
    }
    return out;
}

}  // namespace

double grpo_objective(const CandidateGroup& group, const ToyPolicy& policy, const ToyPolicy& ref,
                      double clip_eps, double beta, const NetworkState& state) {
    return eval_grpo(group, policy, ref, clip_eps, beta, state, false).objective;
}

ToyPolicy grpo_step(const ToyPolicy& policy, const CandidateGroup& group, const ToyPolicy& ref,
                    double clip_eps, double beta, double learning_rate, const NetworkState& state) {
    const EvalResult eval = eval_grpo(group, policy, ref, clip_eps, beta, state, true);
    ToyPolicy next = policy;
    for (std::size_t i = 0; i < next.theta.data().size(); ++i)
        next.theta.data()[i] += learning_rate * eval.grad.data()[i];
    return next;
}

ToyPolicy sft_update(const ToyPolicy& policy,
                     const std::vector<std::pair<NetworkState, std::map<int, int>>>& expert_pairs,
                     double learning_rate) {
    Matrix grad(policy.theta.rows(), policy.theta.cols(), 0.0);
    const double inv_tau = 1.0 / policy.temperature;

    std::vector<double> p, l;
    for (const auto& [state, expert] : expert_pairs) {
        const StateIndex index(state);
        const Ranking rk = make_ranking(index, state, policy);
        const std::vector<Decision> decisions = replay(policy, index, state, rk, expert);
        for (const Decision& dec : decisions) {
            softmax_remaining(policy, dec.bucket, rk, dec.remaining, p, l);
            const std::size_t b = static_cast<std::size_t>(dec.bucket);
            const int chosen_rank = rk.ranks[static_cast<std::size_t>(dec.remaining[dec.chosen])];
            grad.at(b, static_cast<std::size_t>(chosen_rank)) += inv_tau;
            for (std::size_t i = 0; i < dec.remaining.size(); ++i) {
                const int r = rk.ranks[static_cast<std::size_t>(dec.remaining[i])];
                grad.at(b, static_cast<std::size_t>(r)) -= inv_tau * p[i];
            }
        }
    }

    ToyPolicy next = policy;
    for (std::size_t i = 0; i < next.theta.data().size(); ++i)
        next.theta.data()[i] += learning_rate * grad.data()[i];
    return next;
}

TrainResult train(ToyPolicy policy, const TrainConfig& config, std::uint64_t seed) {
    if (config.steps < 1) throw std::invalid_argument("steps must be at least 1");

    const ToyPolicy ref = policy;  // frozen anchor
    TrainResult result;
    result.trace.reserve(static_cast<std::size_t>(config.steps));

    for (int step = 1; step <= config.steps; ++step) {
        const std::uint64_t state_seed = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(step)));
        const NetworkState state =
            make_state(state_seed, step, config.num_users, config.num_channels, config.k_active,
                       config.occupied_fraction, config.link, config.bw_min_hz, config.bw_max_hz);

        CandidateGroup group = sample_group(policy, state, config.group_size,
                                            splitmix64(state_seed + 0x67726f75ULL));

        TraceRow row;
        row.step = step;
        std::vector<double> rewards;
        rewards.reserve(group.candidates.size());
        for (std::size_t j = 0; j < group.candidates.size(); ++j) {
            Candidate& cand = group.candidates[j];
            const RewardBreakdown bd =
                reward_total(cand.rendered_text, state, config.weights,
                             splitmix64(state_seed + 0x72657761ULL + 7919 * j));
            cand.reward = bd.total;
            cand.logprob_ref = log_prob(ref, state, cand.raw_map);
            rewards.push_back(bd.total);
            row.total_mean += bd.total;
            row.struct_mean += bd.r_struct;
            row.perf_mean += bd.r_perf;
            row.depth_mean += bd.r_depth;
        }
        const double g = static_cast<double>(group.candidates.size());
        row.total_mean /= g;
        row.struct_mean /= g;
        row.perf_mean /= g;
        row.depth_mean /= g;

        const std::vector<double> advantages = group_advantages(rewards, config.epsilon);
        double mu = 0.0;
        for (const double r : rewards) mu += r;
        group.mu_r = mu / g;
        double var = 0.0;
        for (const double r : rewards) var += (r - group.mu_r) * (r - group.mu_r);
        group.sigma_r = std::sqrt(var / g);
        for (std::size_t j = 0; j < group.candidates.size(); ++j)
            group.candidates[j].advantage = advantages[j];

        policy = grpo_step(policy, group, ref, config.clip_eps, config.beta, config.learning_rate,
                           state);
        result.trace.push_back(row);
    }

    result.policy = std::move(policy);
    return result;
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out) {
    out << "step,total,r_struct_mean,r_perf_mean,r_depth_mean\n";
    char buf[160];
    for (const TraceRow& row : trace) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g\n", row.step, row.total_mean,
                      row.struct_mean, row.perf_mean, row.depth_mean);
        out << buf;
    }
}

}  // namespace lsa
