#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lsa/netenv.hpp"

namespace lsa {

// Prompt detail, ordered from coarsest to finest.
enum class DetailLevel { StatsOnly = 0, TopK = 1, FullTable = 2 };

const char* to_string(DetailLevel level);

struct StatRange {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
};

struct StatSummary {
    int k_t = 0;
    double noise_density_dbm_hz = 0.0;
    int idle_count = 0;
    std::vector<int> idle_channel_ids;  // ascending, truncated at kIdleSummaryCap
    StatRange power_stats;              // watts, over the K_t x |E_t| received-power entries
    StatRange bandwidth_stats;          // hertz, over idle-channel bandwidths

    static constexpr int kIdleSummaryCap = 64;
};

// Three-block serialized state plus its token accounting.
struct PromptBundle {
    std::string stats_block;
    std::string constraints_block;
    std::string schema_block;
    int token_estimate = 0;
    int budget = 0;
    DetailLevel detail = DetailLevel::FullTable;

    std::string concatenated() const { return stats_block + constraints_block + schema_block; }
};

struct BudgetTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Block templates with {placeholder} substitution. The bundled defaults and
// the files under assets/prompts are kept identical by test.
struct PromptTemplates {
    std::string stats;
    std::string constraints;
    std::string schema;

    static PromptTemplates defaults();
    static PromptTemplates load(const std::string& dir);  // stats_block.txt etc.
};

// Exact descriptive statistics of the slot: requester count, noise floor,
// idle set, and min/max/mean/std of powers and idle bandwidths.
StatSummary summarize_state(const NetworkState& state);

// Serializes the state into the three blocks, degrading detail in fixed order
// (full per-user table -> top-k users by best rate -> statistics only) until
// the estimate fits the budget. Throws BudgetTooSmall when even the
// statistics-only form does not fit or the budget is below 256 tokens.
PromptBundle serialize(const NetworkState& state, int budget_tokens);
PromptBundle serialize(const NetworkState& state, int budget_tokens, const PromptTemplates& templates);

// ceil(byte length / 4); crude but monotone in text length.
int estimate_tokens(std::string_view text);

enum class ParseStatus { Ok, NoActionFound, MalformedEntry };

struct ParseResult {
    ParseStatus status = ParseStatus::NoActionFound;
    std::map<int, int> action;
    std::string detail;

    bool ok() const { return status == ParseStatus::Ok; }
};

// Extracts `action = {user_id: channel_id, ...}` from generated text: the last
// fenced code block if any (else the whole text), then the last `action`
// dictionary literal in it. Keys and values must be non-negative integers;
// whitespace and one trailing comma are tolerated; duplicate keys last-wins.
// Richer Python (quotes, expressions) is rejected as MalformedEntry.
ParseResult parse_action(std::string_view text);

// Canonical text form of a raw map under the output schema; round-trips
// through parse_action.
std::string render_action(const std::map<int, int>& action);

}  // namespace lsa
