#include "lsa/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lsa/repair.hpp"

namespace lsa {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Residual-cost shortest augmenting path assignment (Jonker-Volgenant style),
// minimizing. Requires rows <= cols. Returns per-row column indices.
std::vector<int> min_cost_assignment(const Matrix& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(m) + 1, 0);  // column -> row (1-based)
    std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(m) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = match[static_cast<std::size_t>(j0)];
            double delta = inf;
            int j1 = -1;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost.at(static_cast<std::size_t>(i0 - 1), static_cast<std::size_t>(j - 1)) -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= m; ++j) {
        if (match[static_cast<std::size_t>(j)] != 0)
            row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
    }
    return row_to_col;
}

double canonical_objective(const Allocation& alloc, const NetworkState& state) {
    return alloc.assignment.empty() ? 0.0 : slot_utility(alloc, state);
}

// Idle channels ordered best-rate-first: every user's rate grows with
// bandwidth, so the order is shared (descending bandwidth, ties by id).
std::vector<int> idle_by_preference(const StateIndex& index, const std::vector<int>& idle) {
    std::vector<int> ordered = idle;
    std::sort(ordered.begin(), ordered.end(), [&](int a, int b) {
        const double ba = index.channel(a).bandwidth_hz;
        const double bb = index.channel(b).bandwidth_hz;
        if (ba != bb) return ba > bb;
        return a < b;
    });
    return ordered;
}

// Weight table over a subset of active users and idle channels.
Matrix weight_table(const StateIndex& index, const std::vector<int>& user_ids,
                    const std::vector<int>& channel_ids) {
    Matrix w(user_ids.size(), channel_ids.size());
    for (std::size_t i = 0; i < user_ids.size(); ++i) {
        for (std::size_t j = 0; j < channel_ids.size(); ++j) {
            w.at(i, j) = index.rate(user_ids[i], channel_ids[j]);
        }
    }
    return w;
}

// Max-weight matching of user_ids to channel_ids; inserts pairs into alloc.
void match_block(const StateIndex& index, const std::vector<int>& user_ids,
                 const std::vector<int>& channel_ids, Allocation& alloc) {
    if (user_ids.empty() || channel_ids.empty()) return;
    const Matrix w = weight_table(index, user_ids, channel_ids);
    const std::vector<int> row_to_col = max_weight_assignment(w);
    for (std::size_t i = 0; i < user_ids.size(); ++i) {
        if (row_to_col[i] >= 0)
            alloc.assignment.emplace(user_ids[i], channel_ids[static_cast<std::size_t>(row_to_col[i])]);
    }
}

}  // namespace

std::vector<int> max_weight_assignment(const Matrix& weights) {
    if (weights.rows() == 0 || weights.cols() == 0)
        return std::vector<int>(weights.rows(), -1);

    if (weights.rows() > weights.cols()) {
        // Solve the transpose, then invert: every column gets a distinct row.
        Matrix t(weights.cols(), weights.rows());
        for (std::size_t r = 0; r < weights.rows(); ++r)
            for (std::size_t c = 0; c < weights.cols(); ++c) t.at(c, r) = weights.at(r, c);
        const std::vector<int> col_to_row = max_weight_assignment(t);
        std::vector<int> row_to_col(weights.rows(), -1);
        for (std::size_t c = 0; c < col_to_row.size(); ++c) {
            if (col_to_row[c] >= 0) row_to_col[static_cast<std::size_t>(col_to_row[c])] = static_cast<int>(c);
        }
        return row_to_col;
    }

    // Maximize by minimizing (max_w - w); costs stay non-negative. Weights are
    // non-negative rates, so a full row assignment is optimal among partial ones.
    double max_w = 0.0;
    for (const double w : weights.data()) max_w = std::max(max_w, w);
    Matrix cost(weights.rows(), weights.cols());
    for (std::size_t r = 0; r < weights.rows(); ++r)
        for (std::size_t c = 0; c < weights.cols(); ++c) cost.at(r, c) = max_w - weights.at(r, c);
    return min_cost_assignment(cost);
}

SolveResult solve_random(std::uint64_t seed, const NetworkState& state) {
    const auto start = Clock::now();
    SolveResult result;
    result.solver_name = "random";
    result.allocation.slot = state.slot;

    std::vector<int> idle = idle_channels(state);
    std::vector<int> active = state.active_ids;
    Rng rng = Rng::substream(seed, 0x72616e64ULL);

    if (!active.empty() && !idle.empty()) {
        if (idle.size() >= active.size()) {
            rng.partial_shuffle(idle, active.size());
            for (std::size_t i = 0; i < active.size(); ++i)
                result.allocation.assignment.emplace(active[i], idle[i]);
        } else {
            // Scarce idle set: uniformly random subset of users, random channels.
            rng.partial_shuffle(active, idle.size());
            rng.shuffle(idle);
            for (std::size_t i = 0; i < idle.size(); ++i)
                result.allocation.assignment.emplace(active[i], idle[i]);
            result.partial = true;
        }
    } else if (!active.empty()) {
        result.partial = true;
    }

    result.objective = canonical_objective(result.allocation, state);
    result.iterations = 1;
    result.elapsed_s = seconds_since(start);
    return result;
}

SolveResult solve_exhaustive(const NetworkState& state, std::uint64_t max_maps) {
    const auto start = Clock::now();
    const StateIndex index(state);
    const std::vector<int> idle = idle_channels(state);
    const std::vector<int>& active = state.active_ids;
    const std::size_t k = active.size();
    const std::size_t e = idle.size();

    // Enumeration count: product of remaining choices, with an extra "skip"
    // branch per user when idle channels are scarce.
    const bool allow_skip = e < k;
    double estimated = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double choices = static_cast<double>(e > i ? e - i : 0) + (allow_skip ? 1.0 : 0.0);
        estimated *= std::max(choices, 1.0);
        if (estimated > static_cast<double>(max_maps)) {
            throw SizeExceeded("exhaustive enumeration would exceed the configured budget");
        }
    }

    SolveResult result;
    result.solver_name = "exhaustive";
    result.allocation.slot = state.slot;

    const Matrix rates = weight_table(index, active, idle);
    std::vector<int> chosen(k, -1);  // index into idle, -1 = skipped
    std::vector<char> used(e, 0);
    std::vector<int> best = chosen;
    double best_sum = -1.0;
    long leaves = 0;

    // DFS in lexicographic order (channels ascending, skip last); strict
    // improvement keeps the lexicographically-first argmax.
    auto dfs = [&](auto&& self, std::size_t depth, double sum) -> void {
        if (depth == k) {
            ++leaves;
            if (sum > best_sum) {
                best_sum = sum;
                best = chosen;
            }
            return;
        }
        for (std::size_t j = 0; j < e; ++j) {
            if (used[j]) continue;
            used[j] = 1;
            chosen[depth] = static_cast<int>(j);
            self(self, depth + 1, sum + rates.at(depth, j));
            used[j] = 0;
        }
        if (allow_skip) {
            chosen[depth] = -1;
            self(self, depth + 1, sum);
        }
    };
    if (k == 0) {
        best_sum = 0.0;
    } else {
        dfs(dfs, 0, 0.0);
    }

    for (std::size_t i = 0; i < k; ++i) {
        if (best[i] >= 0)
            result.allocation.assignment.emplace(active[i], idle[static_cast<std::size_t>(best[i])]);
    }
    result.partial = result.allocation.assignment.size() < k;
    result.objective = canonical_objective(result.allocation, state);
    result.iterations = leaves;
    result.elapsed_s = seconds_since(start);
    return result;
}

SolveResult solve_hungarian(const NetworkState& state) {
    const auto start = Clock::now();
    const StateIndex index(state);
    const std::vector<int> idle = idle_channels(state);
    const std::vector<int>& active = state.active_ids;

    SolveResult result;
    result.solver_name = "hungarian";
    result.allocation.slot = state.slot;

    if (!active.empty() && !idle.empty()) {
        const Matrix w = weight_table(index, active, idle);
        const std::vector<int> row_to_col = max_weight_assignment(w);
        for (std::size_t i = 0; i < active.size(); ++i) {
            if (row_to_col[i] >= 0)
                result.allocation.assignment.emplace(active[i], idle[static_cast<std::size_t>(row_to_col[i])]);
        }
    }
    result.partial = result.allocation.assignment.size() < active.size();
    result.objective = canonical_objective(result.allocation, state);
    result.iterations = 1;
    result.elapsed_s = seconds_since(start);
    return result;
}

SolveResult solve_grouped_hungarian(const NetworkState& state, const GroupedOptions& options) {
    if (options.group_size < 1) throw std::invalid_argument("group_size must be at least 1");
    if (!(options.budget_s > 0.0)) throw std::invalid_argument("budget must be positive");

    const auto start = Clock::now();
    const StateIndex index(state);
    const std::vector<int> idle = idle_channels(state);
    const std::vector<int>& active = state.active_ids;

    SolveResult result;
    result.solver_name = "grouped_km";
    result.allocation.slot = state.slot;

    if (active.empty() || idle.empty()) {
        result.partial = !active.empty();
        result.objective = 0.0;
        result.iterations = 1;
        result.elapsed_s = seconds_since(start);
        return result;
    }

    const std::size_t num_blocks =
        (active.size() + static_cast<std::size_t>(options.group_size) - 1) /
        static_cast<std::size_t>(options.group_size);

    Allocation best;
    best.slot = state.slot;
    double best_obj = -1.0;
    long iters = 0;
    bool aborted = false;

    while (iters < options.max_iterations) {
        if (iters >= options.min_iterations && seconds_since(start) >= options.budget_s) break;

        Rng rng = Rng::substream(options.seed, static_cast<std::uint64_t>(iters));
        std::vector<int> users = active;
        std::vector<int> chans = idle;
        rng.shuffle(users);
        rng.shuffle(chans);

        Allocation stitched;
        stitched.slot = state.slot;
        std::size_t user_pos = 0;
        std::size_t chan_pos = 0;
        bool complete = true;
        for (std::size_t b = 0; b < num_blocks; ++b) {
            // After the first full pass, keep the budget overshoot below one
            // block solve by checking between blocks.
            if (iters > 0 && seconds_since(start) >= options.budget_s) {
                complete = false;
                aborted = true;
                break;
            }
            const std::size_t users_left = users.size() - user_pos;
            const std::size_t blocks_left = num_blocks - b;
            const std::size_t nu = std::min<std::size_t>(
                static_cast<std::size_t>(options.group_size),
                (users_left + blocks_left - 1) / blocks_left);
            const std::size_t chans_left = chans.size() - chan_pos;
            const std::size_t nc = (chans_left + blocks_left - 1) / blocks_left;

            const std::vector<int> block_users(users.begin() + static_cast<std::ptrdiff_t>(user_pos),
                                               users.begin() + static_cast<std::ptrdiff_t>(user_pos + nu));
            const std::vector<int> block_chans(chans.begin() + static_cast<std::ptrdiff_t>(chan_pos),
                                               chans.begin() + static_cast<std::ptrdiff_t>(chan_pos + nc));
            user_pos += nu;
            chan_pos += nc;
            match_block(index, block_users, block_chans, stitched);
        }
        if (!complete) break;

        const double obj = canonical_objective(stitched, state);
        if (obj > best_obj) {
            best_obj = obj;
            best = std::move(stitched);
        }
        ++iters;
    }
    (void)aborted;

    result.allocation = std::move(best);
    result.partial = result.allocation.assignment.size() < active.size();
    result.objective = std::max(best_obj, 0.0);
    result.iterations = iters;
    result.elapsed_s = seconds_since(start);
    return result;
}

SolveResult solve_grouped_hungarian(const NetworkState& state, double budget_s, int group_size) {
    GroupedOptions options;
    options.budget_s = budget_s;
    options.group_size = group_size;
    return solve_grouped_hungarian(state, options);
}

SolveResult solve_de(std::uint64_t seed, const NetworkState& state, const DeOptions& options) {
    if (options.pop_size < 4) throw std::invalid_argument("DE needs a population of at least 4");
    const auto start = Clock::now();
    const StateIndex index(state);
    const std::vector<int> idle = idle_channels(state);
    const std::vector<int>& active = state.active_ids;
    const std::size_t k = active.size();

    SolveResult result;
    result.solver_name = "de";
    result.allocation.slot = state.slot;

    if (k == 0 || idle.empty()) {
        result.partial = k != 0;
        result.objective = 0.0;
        result.elapsed_s = seconds_since(start);
        return result;
    }

    const std::vector<int> preference = idle_by_preference(index, idle);

    // Random-key decoding: rank genes descending (ties: user order); the
    // user holding rank j takes preference[j].
    std::vector<std::size_t> order(k);
    auto decode = [&](const std::vector<double>& genome) {
        for (std::size_t i = 0; i < k; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return genome[a] > genome[b]; });
        Allocation alloc;
        alloc.slot = state.slot;
        const std::size_t served = std::min(k, preference.size());
        for (std::size_t j = 0; j < served; ++j)
            alloc.assignment.emplace(active[order[j]], preference[j]);
        return alloc;
    };
    auto fitness = [&](const std::vector<double>& genome) {
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return genome[a] > genome[b]; });
        const std::size_t served = std::min(k, preference.size());
        for (std::size_t j = 0; j < served; ++j) total += index.rate(active[order[j]], preference[j]);
        return total;
    };

    Rng rng = Rng::substream(seed, 0x6465ULL);  // "de"
    const std::size_t np = static_cast<std::size_t>(options.pop_size);
    std::vector<std::vector<double>> pop(np, std::vector<double>(k));
    std::vector<double> fit(np);
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t d = 0; d < k; ++d) pop[i][d] = rng.next_real();
        fit[i] = fitness(pop[i]);
    }

    long gens = 0;
    std::vector<double> trial(k);
    while (gens < options.generations && seconds_since(start) < options.budget_s) {
        for (std::size_t i = 0; i < np; ++i) {
            // DE/rand/1: three distinct donors, none equal to the target.
            std::size_t a, b, c;
            do { a = rng.next_below(np); } while (a == i);
            do { b = rng.next_below(np); } while (b == i || b == a);
            do { c = rng.next_below(np); } while (c == i || c == a || c == b);

            const std::size_t j_rand = rng.next_below(k);
            for (std::size_t d = 0; d < k; ++d) {
                if (d == j_rand || rng.next_real() < options.crossover_rate) {
                    const double v = pop[a][d] + options.diff_weight * (pop[b][d] - pop[c][d]);
                    trial[d] = std::clamp(v, 0.0, 1.0);
                } else {
                    trial[d] = pop[i][d];
                }
            }
            const double f = fitness(trial);
            if (f >= fit[i]) {
                pop[i] = trial;
                fit[i] = f;
            }
        }
        ++gens;
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < np; ++i) {
        if (fit[i] > fit[best]) best = i;
    }
    result.allocation = decode(pop[best]);
    result.partial = result.allocation.assignment.size() < k;
    result.objective = canonical_objective(result.allocation, state);
    result.iterations = gens;
    result.elapsed_s = seconds_since(start);
    return result;
}

}  // namespace lsa
