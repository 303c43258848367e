#include "lsa/serializer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "lsa/repair.hpp"

namespace lsa {

namespace {

std::string format_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// {name} substitution; a brace group is a placeholder only if its body is a
// lowercase identifier, so literal schema braces pass through untouched.
std::string render_template(const std::string& tpl,
                            const std::unordered_map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t i = 0;
    while (i < tpl.size()) {
        if (tpl[i] == '{') {
            const std::size_t close = tpl.find('}', i);
            if (close != std::string::npos) {
                const std::string body = tpl.substr(i + 1, close - i - 1);
                const bool ident = !body.empty() &&
                                   std::all_of(body.begin(), body.end(), [](unsigned char ch) {
                                       return std::islower(ch) || std::isdigit(ch) || ch == '_';
                                   });
                if (ident) {
                    const auto it = vars.find(body);
                    if (it == vars.end())
                        throw std::invalid_argument("unknown template placeholder: " + body);
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tpl[i++];
    }
    return out;
}

std::string join_ids(const std::vector<int>& ids, std::size_t cap) {
    if (ids.empty()) return "(none)";
    std::ostringstream os;
    const std::size_t n = std::min(ids.size(), cap);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) os << ", ";
        os << ids[i];
    }
    if (ids.size() > cap) os << ", ...";
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read template file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

constexpr const char* kStatsTemplate =
    "=== NETWORK STATE (slot {slot}) ===\n"
    "Requesting users K_t: {k_t}\n"
    "Noise power spectral density: {noise_dbm_hz} dBm/Hz\n"
    "Idle channels: {idle_count} of {channel_count}\n"
    "Idle channel ids: {idle_list}\n"
    "Received power over requesting users x idle channels [W]: "
    "min={power_min} max={power_max} mean={power_mean} std={power_std}\n"
    "Idle channel bandwidths [Hz]: min={bw_min} max={bw_max} mean={bw_mean} std={bw_std}\n"
    "{user_detail}";

constexpr const char* kConstraintsTemplate =
    "=== OPERATIONAL CONSTRAINTS AND GUIDANCE ===\n"
    "Objective: maximize aggregate system throughput and spectrum utilization.\n"
    "Rate law: R(u, c) = B_c * log2(1 + P(u, c) / (sigma2 + I)), with sigma2 = N0 * B_c.\n"
    "Linear-scale conversion: P_watts = 10^((P_dBm - 30) / 10).\n"
    "Hard rules:\n"
    "  1. Each requesting user receives at most one channel.\n"
    "  2. A channel serves at most one user; never assign a channel twice.\n"
    "  3. Occupied channels belong to primary users; use idle channel ids only.\n"
    "Avoid co-channel interference; treat the task as collision-free one-to-one matching.\n"
    "Do not write explanations. Produce the allocation directly.\n";

constexpr const char* kSchemaTemplate =
    "=== OUTPUT SCHEMA ===\n"
    "Emit exactly one Python dictionary literal named `action`, mapping integer\n"
    "user ids to integer channel ids drawn from the idle list:\n"
    "action = {user_id: channel_id}\n";

}  // namespace

const char* to_string(DetailLevel level) {
    switch (level) {
        case DetailLevel::StatsOnly: return "stats_only";
        case DetailLevel::TopK: return "top_k";
        case DetailLevel::FullTable: return "full_table";
    }
    return "unknown";
}

PromptTemplates PromptTemplates::defaults() {
    return PromptTemplates{kStatsTemplate, kConstraintsTemplate, kSchemaTemplate};
}

PromptTemplates PromptTemplates::load(const std::string& dir) {
    PromptTemplates t;
    t.stats = read_file(dir + "/stats_block.txt");
    t.constraints = read_file(dir + "/constraints_block.txt");
    t.schema = read_file(dir + "/schema_block.txt");
    return t;
}

StatSummary summarize_state(const NetworkState& state) {
    StatSummary s;
    s.k_t = static_cast<int>(state.active_ids.size());
    s.noise_density_dbm_hz = state.link.noise_density_dbm_hz;

    std::vector<int> idle = idle_channels(state);
    s.idle_count = static_cast<int>(idle.size());
    const std::size_t cap = static_cast<std::size_t>(StatSummary::kIdleSummaryCap);
    s.idle_channel_ids.assign(idle.begin(),
                              idle.begin() + static_cast<std::ptrdiff_t>(std::min(idle.size(), cap)));

    StateIndex index(state);

    // Two-pass statistics over the K_t x |E_t| received-power multiset.
    auto two_pass = [](const std::vector<double>& xs) {
        StatRange r;
        if (xs.empty()) return r;
        r.min = xs.front();
        r.max = xs.front();
        double sum = 0.0;
        for (const double x : xs) {
            r.min = std::min(r.min, x);
            r.max = std::max(r.max, x);
            sum += x;
        }
        r.mean = sum / static_cast<double>(xs.size());
        double sq = 0.0;
        for (const double x : xs) sq += (x - r.mean) * (x - r.mean);
        r.std = std::sqrt(sq / static_cast<double>(xs.size()));
        return r;
    };

    std::vector<double> powers;
    powers.reserve(state.active_ids.size() * idle.size());
    for (const int uid : state.active_ids) {
        const double p = index.power_w(uid);
        for (std::size_t c = 0; c < idle.size(); ++c) powers.push_back(p);
    }
    s.power_stats = two_pass(powers);

    std::vector<double> bws;
    bws.reserve(idle.size());
    for (const int cid : idle) bws.push_back(index.channel(cid).bandwidth_hz);
    s.bandwidth_stats = two_pass(bws);

    return s;
}

int estimate_tokens(std::string_view text) {
    return static_cast<int>((text.size() + 3) / 4);
}

namespace {

// Per-user rows of the link detail table, strongest first.
std::string user_table(const NetworkState& state, const StateIndex& index, std::size_t top_k,
                       int k_t) {
    std::vector<int> idle = idle_channels(state);
    if (state.active_ids.empty()) return "";

    // Best idle channel is the widest one; shared across users.
    int best_chan = -1;
    double best_bw = -1.0;
    for (const int cid : idle) {
        const double bw = index.channel(cid).bandwidth_hz;
        if (bw > best_bw || (bw == best_bw && cid < best_chan)) {
            best_bw = bw;
            best_chan = cid;
        }
    }

    std::vector<int> order = state.active_ids;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double pa = index.power_w(a);
        const double pb = index.power_w(b);
        if (pa != pb) return pa > pb;
        return a < b;
    });
    const std::size_t n = std::min(order.size(), top_k);

    std::ostringstream os;
    if (n < order.size()) {
        os << "Top " << n << " of " << k_t << " requesting users by best idle rate:\n";
    } else {
        os << "Requesting user link detail:\n";
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int uid = order[i];
        const UserNode* u = index.find_user(uid);
        os << "  user " << uid << ": pos=(" << format_num(u->x_m) << ", " << format_num(u->y_m)
           << ") m, power=" << format_num(index.power_w(uid)) << " W";
        if (best_chan >= 0) os << ", best_rate=" << format_num(index.rate(uid, best_chan)) << " bit/s";
        os << "\n";
    }
    return os.str();
}

}  // namespace

PromptBundle serialize(const NetworkState& state, int budget_tokens) {
    return serialize(state, budget_tokens, PromptTemplates::defaults());
}

PromptBundle serialize(const NetworkState& state, int budget_tokens, const PromptTemplates& templates) {
    constexpr int kMinBudget = 256;
    if (budget_tokens < kMinBudget)
        throw BudgetTooSmall("serializer budget must be at least 256 tokens");

    const StatSummary s = summarize_state(state);
    const StateIndex index(state);
    const std::vector<int> idle = idle_channels(state);

    std::unordered_map<std::string, std::string> vars{
        {"slot", std::to_string(state.slot)},
        {"k_t", std::to_string(s.k_t)},
        {"noise_dbm_hz", format_num(s.noise_density_dbm_hz)},
        {"idle_count", std::to_string(s.idle_count)},
        {"channel_count", std::to_string(static_cast<int>(state.channels.size()))},
        {"power_min", format_num(s.power_stats.min)},
        {"power_max", format_num(s.power_stats.max)},
        {"power_mean", format_num(s.power_stats.mean)},
        {"power_std", format_num(s.power_stats.std)},
        {"bw_min", format_num(s.bandwidth_stats.min)},
        {"bw_max", format_num(s.bandwidth_stats.max)},
        {"bw_mean", format_num(s.bandwidth_stats.mean)},
        {"bw_std", format_num(s.bandwidth_stats.std)},
    };

    // Detail schedule, finest first. TopK keeps the full idle list but caps
    // the user table; StatsOnly keeps a short idle prefix and no table.
    struct Level {
        DetailLevel level;
        std::size_t idle_cap;
        std::size_t table_cap;
    };
    const std::size_t all = std::numeric_limits<std::size_t>::max();
    const Level levels[] = {
        {DetailLevel::FullTable, all, all},
        {DetailLevel::TopK, all, 64},
        {DetailLevel::StatsOnly, 16, 0},
    };

    for (const Level& lv : levels) {
        vars["idle_list"] = join_ids(idle, lv.idle_cap);
        vars["user_detail"] = lv.table_cap == 0 ? "" : user_table(state, index, lv.table_cap, s.k_t);

        PromptBundle bundle;
        bundle.stats_block = render_template(templates.stats, vars);
        bundle.constraints_block = render_template(templates.constraints, vars);
        bundle.schema_block = render_template(templates.schema, vars);
        bundle.budget = budget_tokens;
        bundle.detail = lv.level;
        bundle.token_estimate = estimate_tokens(bundle.concatenated());
        if (bundle.token_estimate <= budget_tokens) return bundle;
    }
    throw BudgetTooSmall("statistics-only serialization still exceeds the token budget");
}

namespace {

bool parse_uint(std::string_view text, std::size_t& pos, long long& value) {
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) return false;
    long long v = 0;
    std::size_t digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        v = v * 10 + (text[pos] - '0');
        if (++digits > 9) return false;  // keeps values inside int range
        ++pos;
    }
    value = v;
    return true;
}

void skip_ws(std::string_view text, std::size_t& pos) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
}

}  // namespace

ParseResult parse_action(std::string_view text) {
    ParseResult result;

    // Prefer the last complete fenced code block.
    std::string_view scope = text;
    std::vector<std::size_t> fences;
    for (std::size_t p = text.find("```"); p != std::string_view::npos; p = text.find("```", p + 3))
        fences.push_back(p);
    if (fences.size() >= 2) {
        const std::size_t open = fences[fences.size() - (fences.size() % 2 == 0 ? 2 : 3)];
        const std::size_t close = fences[fences.size() - (fences.size() % 2 == 0 ? 1 : 2)];
        std::size_t content = open + 3;
        // Skip an optional language tag line.
        const std::size_t nl = text.find('\n', content);
        if (nl != std::string_view::npos && nl < close) content = nl + 1;
        scope = text.substr(content, close - content);
    }

    // Last `action` assignment wins.
    std::size_t anchor = std::string_view::npos;
    for (std::size_t p = scope.find("action"); p != std::string_view::npos;
         p = scope.find("action", p + 6)) {
        const bool lhs_ok = p == 0 || (!std::isalnum(static_cast<unsigned char>(scope[p - 1])) &&
                                       scope[p - 1] != '_');
        std::size_t q = p + 6;
        skip_ws(scope, q);
        if (lhs_ok && q < scope.size() && scope[q] == '=') anchor = p;
    }
    if (anchor == std::string_view::npos) {
        result.status = ParseStatus::NoActionFound;
        result.detail = "no `action = {...}` assignment in the candidate text";
        return result;
    }

    std::size_t pos = scope.find('=', anchor) + 1;
    skip_ws(scope, pos);
    if (pos >= scope.size() || scope[pos] != '{') {
        result.status = ParseStatus::NoActionFound;
        result.detail = "`action =` is not followed by a dictionary literal";
        return result;
    }
    ++pos;

    std::map<int, int> action;
    skip_ws(scope, pos);
    while (true) {
        if (pos >= scope.size()) {
            result.status = ParseStatus::MalformedEntry;
            result.detail = "unterminated dictionary literal";
            return result;
        }
        if (scope[pos] == '}') break;

        long long key = 0;
        if (!parse_uint(scope, pos, key)) {
            result.status = ParseStatus::MalformedEntry;
            result.detail = "dictionary key is not a non-negative integer";
            return result;
        }
        skip_ws(scope, pos);
        if (pos >= scope.size() || scope[pos] != ':') {
            result.status = ParseStatus::MalformedEntry;
            result.detail = "expected ':' after dictionary key";
            return result;
        }
        ++pos;
        skip_ws(scope, pos);
        long long value = 0;
        if (!parse_uint(scope, pos, value)) {
            result.status = ParseStatus::MalformedEntry;
            result.detail = "dictionary value is not a non-negative integer";
            return result;
        }
        action[static_cast<int>(key)] = static_cast<int>(value);  // duplicates: last wins

        skip_ws(scope, pos);
        if (pos < scope.size() && scope[pos] == ',') {
            ++pos;
            skip_ws(scope, pos);
            continue;
        }
        if (pos < scope.size() && scope[pos] == '}') break;
        result.status = ParseStatus::MalformedEntry;
        result.detail = "expected ',' or '}' after dictionary entry";
        return result;
    }

    result.status = ParseStatus::Ok;
    result.action = std::move(action);
    return result;
}

std::string render_action(const std::map<int, int>& action) {
    std::ostringstream os;
    os << "action = {";
    bool first = true;
    for (const auto& [user_id, channel_id] : action) {
        if (!first) os << ", ";
        os << user_id << ": " << channel_id;
        first = false;
    }
    os << "}";
    return os.str();
}

}  // namespace lsa
