#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsa/grpo.hpp"
#include "lsa/netenv.hpp"
#include "lsa/policy_backends.hpp"
#include "lsa/serializer.hpp"
#include "lsa/solvers.hpp"

namespace lsa {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
    std::string id;
    int num_users = 5;
    int num_channels = 5;
    int k_active = 1;
    int slots = 100;
    double gamma = 1.0;
    double occupied_fraction = 0.0;
    LinkParams link;
    double bw_min_hz = 5e6;
    double bw_max_hz = 2e7;

    void validate() const;  // throws ConfigError
};

enum class MethodKind { Random, Exhaustive, Hungarian, GroupedKM, DE, Mock, Toy, Remote };

struct MethodSpec {
    MethodKind kind = MethodKind::Random;
    std::string label;

    std::uint64_t max_maps = 5000000;  // exhaustive

    int group_size = 50;  // grouped KM
    long grouped_iterations = 1;
    std::optional<double> grouped_budget_s;  // wall-clock driven (nondeterministic)

    DeOptions de;

    int candidates = 8;  // generative backends
    double temperature = 1.0;
    int length_target_tokens = 512;
    MockProportions mock;
    RemoteConfig remote;

    bool is_generative() const {
        return kind == MethodKind::Mock || kind == MethodKind::Toy || kind == MethodKind::Remote;
    }
};

enum class RunStatus { Ok, BudgetExceeded, Degraded };
const char* to_string(RunStatus status);

struct BenchRecord {
    std::string scenario_id;
    std::string method;
    std::uint64_t seed = 0;
    double episode_throughput = 0.0;  // gamma-discounted slot-utility sum
    double mean_latency_s = 0.0;      // wall clock per decision; reported in JSON only
    double valid_rate = 1.0;          // pre-repair; 1.0 by convention for solvers
    RunStatus status = RunStatus::Ok;
    bool deploy_feasible = true;  // post-hoc audit over every deployed allocation
    int detail_level = -1;        // serializer degradation (generative path), -1 for solvers
};

struct BenchConfig {
    std::vector<ScenarioConfig> scenarios;
    std::vector<MethodSpec> methods;
    std::vector<std::uint64_t> seeds;
    bool time_equated = false;  // grouped-KM budget := measured generative latency
    int serializer_budget = 2048;
};

// JSON config with field-level diagnostics on error.
BenchConfig parse_config(const std::string& json_text);
BenchConfig load_config(const std::string& path);

struct AggregateRow {
    std::string scenario_id;
    std::string method;
    int records = 0;
    double throughput_mean = 0.0;
    double throughput_se = 0.0;  // standard error over seeds
    double valid_rate_mean = 1.0;
    double latency_mean_s = 0.0;  // JSON only
    RunStatus status = RunStatus::Ok;  // worst across cells
};

struct BenchOutput {
    std::vector<BenchRecord> records;
    std::vector<AggregateRow> rows;
    bool audits_ok = true;  // every deployed allocation passed is_feasible
};

// One episode of scenario x method x seed. States depend only on (scenario,
// seed), never on the method, so per-seed comparisons are paired.
BenchRecord run_episode(const ScenarioConfig& scenario, const MethodSpec& method,
                        std::uint64_t seed, int serializer_budget,
                        std::optional<double> grouped_budget_override = std::nullopt);

// Full cross product of scenarios x methods x seeds. In time-equated mode the
// generative cells run first and grouped-KM inherits their measured mean
// latency as its wall budget.
BenchOutput run_benchmark(const BenchConfig& config);

// Deterministic result table: no wall-clock columns, frozen column order.
// schema,scenario,method,seeds,throughput_mean,throughput_se,valid_rate,status
std::string results_csv(const BenchOutput& output);

// Full dump of every record including measured latencies (not byte-stable).
std::string results_json(const BenchOutput& output);

struct ContextRow {
    int budget = 0;
    bool budget_ok = true;  // false when the serializer minimum is undercut
    int detail_level = -1;
    double episode_throughput = 0.0;
    double mean_latency_s = 0.0;
};

// Generative path at each budget; degradation level recorded per row.
std::vector<ContextRow> compare_context_budgets(const ScenarioConfig& scenario,
                                                const MethodSpec& generative,
                                                const std::vector<int>& budgets,
                                                std::uint64_t seed);
std::string context_csv(const std::vector<ContextRow>& rows);

struct TrainRunConfig {
    TrainConfig train;
    std::vector<std::uint64_t> seeds{1};
    int sft_steps = 0;      // optional warm start
    int sft_examples = 16;  // expert states for the warm start
};
TrainRunConfig parse_train_config(const std::string& json_text);

// Optional SFT warm start on Hungarian expert allocations, then GRPO.
TrainResult run_training(const TrainRunConfig& config, std::uint64_t seed);

struct ContextRunConfig {
    ScenarioConfig scenario;
    MethodSpec method;
    std::vector<int> budgets{1024, 2048, 4096};
    std::uint64_t seed = 1;
};
ContextRunConfig parse_context_config(const std::string& json_text);

// Self-contained repair audit (feasibility, idempotence, suggestion
// preservation) over n fuzzed raw mappings; used by the CLI.
struct FuzzReport {
    int cases = 0;
    int feasible = 0;
    int idempotent = 0;
    int preservation_ok = 0;
    bool ok() const { return cases == feasible && cases == idempotent && cases == preservation_ok; }
};
FuzzReport repair_fuzz(int n, std::uint64_t seed);

}  // namespace lsa
