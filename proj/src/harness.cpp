#include "lsa/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "lsa/allocation.hpp"
#include "lsa/repair.hpp"

namespace lsa {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// --- config parsing -------------------------------------------------------

template <typename T>
T require_field(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key)) throw ConfigError(context + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(context + "." + key + ": " + e.what());
    }
}

template <typename T>
T field_or(const json& j, const std::string& key, T fallback, const std::string& context) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(context + "." + key + ": " + e.what());
    }
}

LinkParams parse_link(const json& j, const std::string& context) {
    LinkParams link;
    link.tx_power_dbm = field_or(j, "tx_power_dbm", link.tx_power_dbm, context);
    link.antenna_gain_tx = field_or(j, "antenna_gain_tx", link.antenna_gain_tx, context);
    link.antenna_gain_rx = field_or(j, "antenna_gain_rx", link.antenna_gain_rx, context);
    link.wavelength_m = field_or(j, "wavelength_m", link.wavelength_m, context);
    link.path_loss_exp = field_or(j, "path_loss_exp", link.path_loss_exp, context);
    link.noise_density_dbm_hz = field_or(j, "noise_density_dbm_hz", link.noise_density_dbm_hz, context);
    link.cell_radius_m = field_or(j, "cell_radius_m", link.cell_radius_m, context);
    link.distance_floor = field_or(j, "distance_floor", link.distance_floor, context);
    return link;
}

ScenarioConfig parse_scenario(const json& j, const std::string& context) {
    ScenarioConfig s;
    s.id = require_field<std::string>(j, "id", context);
    s.num_users = require_field<int>(j, "users", context);
    s.num_channels = require_field<int>(j, "channels", context);
    s.k_active = require_field<int>(j, "k_active", context);
    s.slots = field_or(j, "slots", s.slots, context);
    s.gamma = field_or(j, "gamma", s.gamma, context);
    s.occupied_fraction = field_or(j, "occupied_fraction", s.occupied_fraction, context);
    s.bw_min_hz = field_or(j, "bw_min_hz", s.bw_min_hz, context);
    s.bw_max_hz = field_or(j, "bw_max_hz", s.bw_max_hz, context);
    if (j.contains("link")) s.link = parse_link(j.at("link"), context + ".link");
    s.validate();
    return s;
}

MethodSpec parse_method(const json& j, const std::string& context) {
    MethodSpec m;
    const std::string type = require_field<std::string>(j, "type", context);
    if (type == "random") {
        m.kind = MethodKind::Random;
    } else if (type == "exhaustive") {
        m.kind = MethodKind::Exhaustive;
        m.max_maps = field_or<std::uint64_t>(j, "max_maps", m.max_maps, context);
    } else if (type == "hungarian") {
        m.kind = MethodKind::Hungarian;
    } else if (type == "grouped_km") {
        m.kind = MethodKind::GroupedKM;
        m.group_size = field_or(j, "group_size", m.group_size, context);
        m.grouped_iterations = field_or<long>(j, "iterations", m.grouped_iterations, context);
        if (j.contains("budget_s"))
            m.grouped_budget_s = require_field<double>(j, "budget_s", context);
    } else if (type == "de") {
        m.kind = MethodKind::DE;
        m.de.pop_size = field_or(j, "pop_size", m.de.pop_size, context);
        m.de.crossover_rate = field_or(j, "crossover_rate", m.de.crossover_rate, context);
        m.de.diff_weight = field_or(j, "diff_weight", m.de.diff_weight, context);
        m.de.generations = field_or<long>(j, "generations", m.de.generations, context);
    } else if (type == "mock") {
        m.kind = MethodKind::Mock;
        if (j.contains("proportions")) {
            const json& p = j.at("proportions");
            const std::string pc = context + ".proportions";
            m.mock.valid = field_or(p, "valid", 0.0, pc);
            m.mock.duplicate_channel = field_or(p, "duplicate_channel", 0.0, pc);
            m.mock.occupied_channel = field_or(p, "occupied_channel", 0.0, pc);
            m.mock.prose = field_or(p, "prose", 0.0, pc);
            m.mock.short_output = field_or(p, "short_output", 0.0, pc);
        }
    } else if (type == "toy") {
        m.kind = MethodKind::Toy;
    } else if (type == "remote") {
        m.kind = MethodKind::Remote;
        m.remote.base_url = require_field<std::string>(j, "url", context);
        m.remote.path = field_or<std::string>(j, "path", m.remote.path, context);
        m.remote.timeout_s = field_or(j, "timeout_s", m.remote.timeout_s, context);
        m.remote.auth_token = field_or<std::string>(j, "auth_token", "", context);
        if (m.remote.auth_token.empty()) {
            if (const char* tok = std::getenv("LSA_REMOTE_TOKEN")) m.remote.auth_token = tok;
        }
    } else {
        throw ConfigError(context + ".type: unknown method '" + type + "'");
    }

    if (m.is_generative()) {
        m.candidates = field_or(j, "candidates", m.candidates, context);
        m.temperature = field_or(j, "temperature", m.temperature, context);
        m.length_target_tokens = field_or(j, "length_target", m.length_target_tokens, context);
        if (m.candidates < 1) throw ConfigError(context + ".candidates: must be at least 1");
    }
    m.label = field_or<std::string>(j, "label", type, context);
    return m;
}

RewardWeights parse_weights(const json& j, const std::string& context) {
    RewardWeights w;
    w.lambda1 = field_or(j, "lambda1", w.lambda1, context);
    w.lambda2 = field_or(j, "lambda2", w.lambda2, context);
    w.lambda3 = field_or(j, "lambda3", w.lambda3, context);
    w.omega = field_or(j, "omega", w.omega, context);
    w.kappa = field_or(j, "kappa", w.kappa, context);
    w.l_thr = field_or(j, "l_thr", w.l_thr, context);
    w.clamp_lo = field_or(j, "clamp_lo", w.clamp_lo, context);
    w.clamp_hi = field_or(j, "clamp_hi", w.clamp_hi, context);
    w.interference_threshold_w = field_or(j, "interference_threshold_w", w.interference_threshold_w, context);
    return w;
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

// --- episode machinery ----------------------------------------------------

std::unique_ptr<PolicyBackend> make_backend(const MethodSpec& method) {
    switch (method.kind) {
        case MethodKind::Mock:
            return std::make_unique<MockBackend>(method.mock, method.length_target_tokens);
        case MethodKind::Toy:
            return std::make_unique<ToyPolicyBackend>(ToyPolicy::make(), method.length_target_tokens);
        case MethodKind::Remote:
            return std::make_unique<RemoteBackend>(method.remote);
        default:
            throw std::logic_error("not a generative method");
    }
}

struct SlotDecision {
    Allocation deployed;
    double utility = 0.0;
    int candidates = 0;
    int valid = 0;
    bool degraded = false;
    int detail_level = -1;
};

SlotDecision decide_generative(PolicyBackend& backend, const MethodSpec& method,
                               const NetworkState& state, int serializer_budget,
                               std::uint64_t slot_seed) {
    SlotDecision d;

    std::vector<std::string> texts;
    try {
        const PromptBundle bundle = serialize(state, serializer_budget);
        d.detail_level = static_cast<int>(bundle.detail);

        GenerationRequest request;
        request.prompt = bundle.concatenated();
        request.max_tokens = 2 * method.length_target_tokens;
        request.num_candidates = method.candidates;
        request.temperature = method.temperature;
        request.seed = slot_seed;
        request.state = &state;
        texts = backend.generate(request).texts;
    } catch (const BudgetTooSmall&) {
        d.degraded = true;
    } catch (const BackendTimeout&) {
        d.degraded = true;
    } catch (const BackendProtocolError&) {
        d.degraded = true;
    }

    // Score repaired candidates by slot utility; deploy the argmax. A failed
    // generation degrades to repairing the empty map so the episode completes.
    bool have = false;
    for (const std::string& text : texts) {
        ++d.candidates;
        const ParseResult parsed = parse_action(text);
        std::map<int, int> raw;
        if (parsed.ok()) {
            raw = parsed.action;
            Allocation candidate{raw, state.slot};
            if (is_feasible(candidate, state).feasible) ++d.valid;
        }
        const RepairOutcome repaired = repair(raw, state);
        const double utility = repaired.allocation.assignment.empty()
                                   ? 0.0
                                   : slot_utility(repaired.allocation, state);
        if (!have || utility > d.utility) {
            d.utility = utility;
            d.deployed = repaired.allocation;
            have = true;
        }
    }
    if (!have) {
        const RepairOutcome fallback = repair({}, state);
        d.deployed = fallback.allocation;
        d.utility = fallback.allocation.assignment.empty()
                        ? 0.0
                        : slot_utility(fallback.allocation, state);
    }
    return d;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (id.empty()) throw ConfigError("scenario id must not be empty");
    if (num_users < 0 || num_channels < 0) throw ConfigError(id + ": negative sizes");
    if (k_active < 0 || k_active > num_users)
        throw ConfigError(id + ": k_active must lie in [0, users]");
    if (slots < 1) throw ConfigError(id + ": slots must be at least 1");
    if (gamma < 0.0 || gamma > 1.0) throw ConfigError(id + ": gamma must lie in [0, 1]");
    if (occupied_fraction < 0.0 || occupied_fraction >= 1.0)
        throw ConfigError(id + ": occupied_fraction must lie in [0, 1)");
}

const char* to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Ok: return "ok";
        case RunStatus::BudgetExceeded: return "budget_exceeded";
        case RunStatus::Degraded: return "degraded";
    }
    return "unknown";
}

BenchConfig parse_config(const std::string& json_text) {
    const json root = parse_json_text(json_text);
    BenchConfig cfg;

    if (root.contains("seeds")) {
        cfg.seeds = require_field<std::vector<std::uint64_t>>(root, "seeds", "config");
    } else {
        const int n = field_or(root, "seed_count", 1, "config");
        for (int i = 1; i <= n; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    if (cfg.seeds.empty()) throw ConfigError("config.seeds: need at least one seed");

    cfg.time_equated = field_or(root, "time_equated", false, "config");
    cfg.serializer_budget = field_or(root, "serializer_budget", cfg.serializer_budget, "config");

    if (!root.contains("scenarios") || !root.at("scenarios").is_array() || root.at("scenarios").empty())
        throw ConfigError("config.scenarios: need a non-empty array");
    int i = 0;
    for (const json& js : root.at("scenarios"))
        cfg.scenarios.push_back(parse_scenario(js, "scenarios[" + std::to_string(i++) + "]"));

    if (!root.contains("methods") || !root.at("methods").is_array() || root.at("methods").empty())
        throw ConfigError("config.methods: need a non-empty array");
    i = 0;
    for (const json& jm : root.at("methods"))
        cfg.methods.push_back(parse_method(jm, "methods[" + std::to_string(i++) + "]"));

    std::unordered_set<std::string> labels;
    for (const MethodSpec& m : cfg.methods) {
        if (!labels.insert(m.label).second)
            throw ConfigError("config.methods: duplicate label '" + m.label + "'");
    }

    if (cfg.time_equated) {
        const bool any_generative =
            std::any_of(cfg.methods.begin(), cfg.methods.end(),
                        [](const MethodSpec& m) { return m.is_generative(); });
        if (!any_generative)
            throw ConfigError("config.time_equated: needs at least one generative method");
    }
    return cfg;
}

BenchConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

BenchRecord run_episode(const ScenarioConfig& scenario, const MethodSpec& method,
                        std::uint64_t seed, int serializer_budget,
                        std::optional<double> grouped_budget_override) {
    scenario.validate();

    BenchRecord rec;
    rec.scenario_id = scenario.id;
    rec.method = method.label.empty() ? "method" : method.label;
    rec.seed = seed;

    // States depend on (scenario, seed) only; methods see identical episodes.
    const std::uint64_t state_seed = splitmix64(seed ^ fnv1a(scenario.id));
    NetworkState state = make_state(state_seed, 1, scenario.num_users, scenario.num_channels,
                                    scenario.k_active, scenario.occupied_fraction, scenario.link,
                                    scenario.bw_min_hz, scenario.bw_max_hz);

    std::unique_ptr<PolicyBackend> backend;
    if (method.is_generative()) backend = make_backend(method);

    std::vector<double> utilities;
    utilities.reserve(static_cast<std::size_t>(scenario.slots));
    double latency_sum = 0.0;
    long candidates_total = 0;
    long candidates_valid = 0;

    for (int t = 1; t <= scenario.slots; ++t) {
        state.slot = t;
        state.active_ids = step_traffic(state_seed, state, scenario.k_active, scenario.k_active);
        const std::uint64_t slot_seed = splitmix64(state_seed + 0x736c6f74ULL * static_cast<std::uint64_t>(t));

        const auto start = Clock::now();
        Allocation deployed;
        double utility = 0.0;

        try {
            if (method.is_generative()) {
                const SlotDecision d = decide_generative(*backend, method, state, serializer_budget,
                                                         slot_seed);
                deployed = d.deployed;
                utility = d.utility;
                candidates_total += d.candidates;
                candidates_valid += d.valid;
                if (d.degraded) rec.status = RunStatus::Degraded;
                if (d.detail_level >= 0)
                    rec.detail_level = rec.detail_level < 0
                                           ? d.detail_level
                                           : std::min(rec.detail_level, d.detail_level);
            } else {
                SolveResult sr;
                switch (method.kind) {
                    case MethodKind::Random:
                        sr = solve_random(slot_seed, state);
                        break;
                    case MethodKind::Exhaustive:
                        sr = solve_exhaustive(state, method.max_maps);
                        break;
                    case MethodKind::Hungarian:
                        sr = solve_hungarian(state);
                        break;
                    case MethodKind::GroupedKM: {
                        GroupedOptions opt;
                        opt.group_size = method.group_size;
                        opt.seed = slot_seed;
                        if (grouped_budget_override.has_value()) {
                            opt.budget_s = *grouped_budget_override;
                        } else if (method.grouped_budget_s.has_value()) {
                            opt.budget_s = *method.grouped_budget_s;
                        } else {
                            opt.min_iterations = method.grouped_iterations;
                            opt.max_iterations = method.grouped_iterations;
                        }
                        sr = solve_grouped_hungarian(state, opt);
                        break;
                    }
                    case MethodKind::DE:
                        sr = solve_de(slot_seed, state, method.de);
                        break;
                    default:
                        throw std::logic_error("unhandled method kind");
                }
                deployed = sr.allocation;
                utility = sr.objective;
            }
        } catch (const SizeExceeded&) {
            rec.status = RunStatus::BudgetExceeded;
            rec.episode_throughput = 0.0;
            rec.mean_latency_s = 0.0;
            return rec;
        }

        latency_sum += seconds_since(start);
        utilities.push_back(utility);
        if (!is_feasible(deployed, state).feasible) rec.deploy_feasible = false;
    }

    rec.episode_throughput = episode_utility(utilities, scenario.gamma);
    rec.mean_latency_s = latency_sum / static_cast<double>(scenario.slots);
    rec.valid_rate = method.is_generative() && candidates_total > 0
                         ? static_cast<double>(candidates_valid) / static_cast<double>(candidates_total)
                         : 1.0;
    return rec;
}

BenchOutput run_benchmark(const BenchConfig& config) {
    BenchOutput out;

    struct Cell {
        std::size_t scenario;
        std::size_t method;
        std::uint64_t seed;
    };
    std::vector<Cell> now;
    std::vector<Cell> deferred;  // grouped cells wait for measured latency
    for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
        for (std::size_t m = 0; m < config.methods.size(); ++m) {
            for (const std::uint64_t seed : config.seeds) {
                const bool defer = config.time_equated &&
                                   config.methods[m].kind == MethodKind::GroupedKM;
                (defer ? deferred : now).push_back({s, m, seed});
            }
        }
    }

    std::map<std::string, std::pair<double, long>> generative_latency;  // scenario -> (sum, n)
    for (const Cell& cell : now) {
        BenchRecord rec = run_episode(config.scenarios[cell.scenario], config.methods[cell.method],
                                      cell.seed, config.serializer_budget);
        if (config.methods[cell.method].is_generative()) {
            auto& [sum, n] = generative_latency[rec.scenario_id];
            sum += rec.mean_latency_s;
            ++n;
        }
        out.records.push_back(std::move(rec));
    }

    for (const Cell& cell : deferred) {
        const std::string& sid = config.scenarios[cell.scenario].id;
        const auto it = generative_latency.find(sid);
        if (it == generative_latency.end())
            throw ConfigError("time_equated: no generative latency measured for scenario " + sid);
        const double budget = std::max(it->second.first / static_cast<double>(it->second.second), 1e-4);
        out.records.push_back(run_episode(config.scenarios[cell.scenario],
                                          config.methods[cell.method], cell.seed,
                                          config.serializer_budget, budget));
    }

    // Stable aggregation in config order.
    for (const ScenarioConfig& s : config.scenarios) {
        for (const MethodSpec& m : config.methods) {
            AggregateRow row;
            row.scenario_id = s.id;
            row.method = m.label;
            std::vector<double> throughputs;
            for (const BenchRecord& rec : out.records) {
                if (rec.scenario_id != s.id || rec.method != m.label) continue;
                ++row.records;
                throughputs.push_back(rec.episode_throughput);
                row.valid_rate_mean += rec.valid_rate;
                row.latency_mean_s += rec.mean_latency_s;
                if (rec.status == RunStatus::BudgetExceeded) row.status = RunStatus::BudgetExceeded;
                else if (rec.status == RunStatus::Degraded && row.status == RunStatus::Ok)
                    row.status = RunStatus::Degraded;
                if (!rec.deploy_feasible) out.audits_ok = false;
            }
            if (row.records == 0) continue;
            const double n = static_cast<double>(row.records);
            double mean = 0.0;
            for (const double v : throughputs) mean += v;
            mean /= n;
            double var = 0.0;
            for (const double v : throughputs) var += (v - mean) * (v - mean);
            row.throughput_mean = mean;
            row.throughput_se = row.records > 1 ? std::sqrt(var / (n - 1.0)) / std::sqrt(n) : 0.0;
            row.valid_rate_mean /= n;
            row.latency_mean_s /= n;
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

std::string results_csv(const BenchOutput& output) {
    std::string csv = "schema,scenario,method,seeds,throughput_mean,throughput_se,valid_rate,status\n";
    for (const AggregateRow& row : output.rows) {
        csv += "1," + row.scenario_id + "," + row.method + "," + std::to_string(row.records) + "," +
               fmt(row.throughput_mean) + "," + fmt(row.throughput_se) + "," +
               fmt(row.valid_rate_mean) + "," + to_string(row.status) + "\n";
    }
    return csv;
}

std::string results_json(const BenchOutput& output) {
    json root;
    root["schema"] = 1;
    root["audits_ok"] = output.audits_ok;
    root["records"] = json::array();
    for (const BenchRecord& rec : output.records) {
        root["records"].push_back({
            {"scenario", rec.scenario_id},
            {"method", rec.method},
            {"seed", rec.seed},
            {"episode_throughput", rec.episode_throughput},
            {"mean_latency_s", rec.mean_latency_s},
            {"valid_rate", rec.valid_rate},
            {"status", to_string(rec.status)},
            {"deploy_feasible", rec.deploy_feasible},
            {"detail_level", rec.detail_level},
        });
    }
    root["aggregates"] = json::array();
    for (const AggregateRow& row : output.rows) {
        root["aggregates"].push_back({
            {"scenario", row.scenario_id},
            {"method", row.method},
            {"seeds", row.records},
            {"throughput_mean", row.throughput_mean},
            {"throughput_se", row.throughput_se},
            {"valid_rate", row.valid_rate_mean},
            {"latency_mean_s", row.latency_mean_s},
            {"status", to_string(row.status)},
        });
    }
    return root.dump(2);
}

std::vector<ContextRow> compare_context_budgets(const ScenarioConfig& scenario,
                                                const MethodSpec& generative,
                                                const std::vector<int>& budgets,
                                                std::uint64_t seed) {
    if (!generative.is_generative())
        throw ConfigError("context comparison needs a generative method");

    std::vector<ContextRow> rows;
    rows.reserve(budgets.size());
    for (const int budget : budgets) {
        ContextRow row;
        row.budget = budget;
        try {
            const BenchRecord rec = run_episode(scenario, generative, seed, budget);
            // A degraded record with no detail level means the serializer
            // never fit the budget.
            row.budget_ok = rec.detail_level >= 0;
            row.detail_level = rec.detail_level;
            row.episode_throughput = rec.episode_throughput;
            row.mean_latency_s = rec.mean_latency_s;
        } catch (const BudgetTooSmall&) {
            row.budget_ok = false;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string context_csv(const std::vector<ContextRow>& rows) {
    std::string csv = "schema,budget_tokens,budget_ok,detail_level,episode_throughput,mean_latency_s\n";
    for (const ContextRow& row : rows) {
        const std::string level =
            row.detail_level < 0 ? "none" : to_string(static_cast<DetailLevel>(row.detail_level));
        csv += "1," + std::to_string(row.budget) + "," + (row.budget_ok ? "yes" : "no") + "," +
               level + "," + fmt(row.episode_throughput) + "," + fmt(row.mean_latency_s) + "\n";
    }
    return csv;
}

TrainRunConfig parse_train_config(const std::string& json_text) {
    const json root = parse_json_text(json_text);
    TrainRunConfig cfg;

    if (root.contains("scenario")) {
        const json& js = root.at("scenario");
        const std::string ctx = "scenario";
        cfg.train.num_users = field_or(js, "users", cfg.train.num_users, ctx);
        cfg.train.num_channels = field_or(js, "channels", cfg.train.num_channels, ctx);
        cfg.train.k_active = field_or(js, "k_active", cfg.train.k_active, ctx);
        cfg.train.occupied_fraction = field_or(js, "occupied_fraction", cfg.train.occupied_fraction, ctx);
        cfg.train.bw_min_hz = field_or(js, "bw_min_hz", cfg.train.bw_min_hz, ctx);
        cfg.train.bw_max_hz = field_or(js, "bw_max_hz", cfg.train.bw_max_hz, ctx);
        if (js.contains("link")) cfg.train.link = parse_link(js.at("link"), "scenario.link");
    }
    cfg.train.steps = field_or(root, "steps", cfg.train.steps, "config");
    cfg.train.group_size = field_or(root, "group_size", cfg.train.group_size, "config");
    cfg.train.clip_eps = field_or(root, "clip_eps", cfg.train.clip_eps, "config");
    cfg.train.beta = field_or(root, "beta", cfg.train.beta, "config");
    cfg.train.learning_rate = field_or(root, "learning_rate", cfg.train.learning_rate, "config");
    cfg.train.epsilon = field_or(root, "epsilon", cfg.train.epsilon, "config");
    if (root.contains("weights")) cfg.train.weights = parse_weights(root.at("weights"), "weights");

    if (root.contains("seeds"))
        cfg.seeds = require_field<std::vector<std::uint64_t>>(root, "seeds", "config");
    cfg.sft_steps = field_or(root, "sft_steps", cfg.sft_steps, "config");
    cfg.sft_examples = field_or(root, "sft_examples", cfg.sft_examples, "config");
    if (cfg.train.steps < 1) throw ConfigError("config.steps: must be at least 1");
    if (cfg.train.group_size < 2) throw ConfigError("config.group_size: must be at least 2");
    return cfg;
}

TrainResult run_training(const TrainRunConfig& config, std::uint64_t seed) {
    ToyPolicy policy = ToyPolicy::make();

    if (config.sft_steps > 0) {
        // Expert allocations from the exact bipartite matcher.
        std::vector<std::pair<NetworkState, std::map<int, int>>> experts;
        experts.reserve(static_cast<std::size_t>(config.sft_examples));
        for (int i = 0; i < config.sft_examples; ++i) {
            const std::uint64_t s = splitmix64(seed + 0x73667431ULL + static_cast<std::uint64_t>(i));
            NetworkState state = make_state(s, i + 1, config.train.num_users,
                                            config.train.num_channels, config.train.k_active,
                                            config.train.occupied_fraction, config.train.link,
                                            config.train.bw_min_hz, config.train.bw_max_hz);
            const SolveResult expert = solve_hungarian(state);
            experts.emplace_back(std::move(state), expert.allocation.assignment);
        }
        for (int step = 0; step < config.sft_steps; ++step)
            policy = sft_update(policy, experts, config.train.learning_rate);
    }

    return train(std::move(policy), config.train, seed);
}

ContextRunConfig parse_context_config(const std::string& json_text) {
    const json root = parse_json_text(json_text);
    ContextRunConfig cfg;
    if (!root.contains("scenario")) throw ConfigError("config.scenario: missing");
    cfg.scenario = parse_scenario(root.at("scenario"), "scenario");
    if (root.contains("method")) {
        cfg.method = parse_method(root.at("method"), "method");
    } else {
        cfg.method.kind = MethodKind::Toy;
        cfg.method.label = "toy";
    }
    if (root.contains("budgets"))
        cfg.budgets = require_field<std::vector<int>>(root, "budgets", "config");
    cfg.seed = field_or<std::uint64_t>(root, "seed", cfg.seed, "config");
    if (cfg.budgets.empty()) throw ConfigError("config.budgets: need at least one budget");
    return cfg;
}

FuzzReport repair_fuzz(int n, std::uint64_t seed) {
    FuzzReport report;
    Rng rng(seed);

    for (int i = 0; i < n; ++i) {
        const int users = 2 + static_cast<int>(rng.next_below(12));
        const int channels = 1 + static_cast<int>(rng.next_below(18));
        const int k = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(users) + 1));
        const double occupied = static_cast<double>(rng.next_below(60)) / 100.0;

        LinkParams link;
        const NetworkState state = make_state(rng.next_u64(), 1 + static_cast<int>(rng.next_below(50)),
                                              users, channels, k, occupied, link);

        // Raw maps with unknown ids, occupied channels and duplicates.
        std::map<int, int> raw;
        const int entries = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(users) + 3));
        for (int e = 0; e < entries; ++e) {
            const int uid = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(users) + 4)) - 2;
            const int cid = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(channels) + 4)) - 2;
            raw[uid] = cid;
        }

        ++report.cases;
        const RepairOutcome outcome = repair(raw, state);
        if (is_feasible(outcome.allocation, state).feasible) ++report.feasible;

        const RepairOutcome again = repair(outcome.allocation.assignment, state);
        if (again.allocation.assignment == outcome.allocation.assignment) ++report.idempotent;

        // Valid un-contended suggestions must survive verbatim.
        const StateIndex index(state);
        const std::vector<int> idle = idle_channels(state);
        const std::unordered_set<int> idle_set(idle.begin(), idle.end());
        std::unordered_map<int, int> claims;
        for (const auto& [uid, cid] : raw) {
            if (index.is_active(uid) && idle_set.count(cid) != 0) ++claims[cid];
        }
        bool preserved = true;
        for (const auto& [uid, cid] : raw) {
            if (!index.is_active(uid) || idle_set.count(cid) == 0 || claims[cid] != 1) continue;
            const auto it = outcome.allocation.assignment.find(uid);
            if (it == outcome.allocation.assignment.end() || it->second != cid) preserved = false;
        }
        if (preserved) ++report.preservation_ok;
    }
    return report;
}

}  // namespace lsa
