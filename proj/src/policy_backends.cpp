#include "lsa/policy_backends.hpp"

#include <chrono>

#include <httplib.h>
#include <json.hpp>

#include "lsa/repair.hpp"
#include "lsa/serializer.hpp"

namespace lsa {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Deterministic filler prepended before the action line until the whole text
// reaches the token target. Never placed after the dictionary, so parsing
// still finds it.
std::string pad_to_tokens(const std::string& action_line, int token_target) {
    static constexpr const char* kFiller =
        "# reasoning: compare candidate channels by bandwidth and received power, "
        "then keep the collision-free assignment with the best aggregate rate.\n";
    std::string out;
    const std::size_t target_bytes = static_cast<std::size_t>(token_target) * 4;
    while (out.size() + action_line.size() < target_bytes) out += kFiller;
    out += action_line;
    return out;
}

enum class MockMode { Valid, DuplicateChannel, OccupiedChannel, Prose, ShortOutput };

MockMode draw_mode(const MockProportions& p, Rng& rng) {
    const double weights[] = {p.valid, p.duplicate_channel, p.occupied_channel, p.prose,
                              p.short_output};
    double total = 0.0;
    for (const double w : weights) {
        if (w < 0.0) throw std::invalid_argument("mock proportions must be non-negative");
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("mock proportions must not all be zero");
    double u = rng.next_real() * total;
    for (std::size_t i = 0; i < 5; ++i) {
        if (u < weights[i]) return static_cast<MockMode>(i);
        u -= weights[i];
    }
    return MockMode::Valid;
}

}  // namespace

MockBackend::MockBackend(MockProportions proportions, int pad_tokens)
    : props_(proportions), pad_tokens_(pad_tokens) {}

GenerationResponse MockBackend::generate(const GenerationRequest& request) {
    if (request.state == nullptr)
        throw std::invalid_argument("mock backend needs the structured state");
    if (request.num_candidates < 1) throw std::invalid_argument("num_candidates must be positive");
    const auto start = Clock::now();
    const NetworkState& state = *request.state;

    const std::vector<int> idle = idle_channels(state);
    std::vector<int> occupied;
    for (const auto& c : state.channels) {
        if (c.occupied) occupied.push_back(c.id);
    }
    const std::vector<int>& active = state.active_ids;

    GenerationResponse response;
    response.backend_name = name();
    response.texts.reserve(static_cast<std::size_t>(request.num_candidates));

    for (int j = 0; j < request.num_candidates; ++j) {
        Rng rng = Rng::substream(request.seed, static_cast<std::uint64_t>(j));
        MockMode mode = draw_mode(props_, rng);

        // Fall back when the state cannot express the requested failure.
        if (mode == MockMode::DuplicateChannel && (active.size() < 2 || idle.empty()))
            mode = MockMode::Valid;
        if (mode == MockMode::OccupiedChannel && (occupied.empty() || active.empty()))
            mode = MockMode::Valid;

        std::map<int, int> action;
        switch (mode) {
            case MockMode::Valid:
            case MockMode::ShortOutput:
                for (std::size_t i = 0; i < active.size() && i < idle.size(); ++i)
                    action.emplace(active[i], idle[i]);
                break;
            case MockMode::DuplicateChannel:
                action.emplace(active[0], idle[0]);
                action.emplace(active[1], idle[0]);
                for (std::size_t i = 2; i < active.size() && i - 1 < idle.size(); ++i)
                    action.emplace(active[i], idle[i - 1]);
                break;
            case MockMode::OccupiedChannel:
                action.emplace(active[0], occupied[0]);
                for (std::size_t i = 1; i < active.size() && i - 1 < idle.size(); ++i)
                    action.emplace(active[i], idle[i - 1]);
                break;
            case MockMode::Prose:
                break;
        }

        switch (mode) {
            case MockMode::Prose:
                response.texts.push_back(
                    "The spectrum is congested today; users should coordinate politely and "
                    "defer to primary transmitters whenever possible.");
                break;
            case MockMode::ShortOutput:
                response.texts.push_back(render_action(action));
                break;
            default:
                response.texts.push_back(pad_to_tokens(render_action(action), pad_tokens_));
                break;
        }
    }

    response.latency_s = seconds_since(start);
    return response;
}

ToyPolicyBackend::ToyPolicyBackend(ToyPolicy policy, int length_target_tokens)
    : policy_(std::move(policy)), length_target_tokens_(length_target_tokens) {}

GenerationResponse ToyPolicyBackend::generate(const GenerationRequest& request) {
    if (request.state == nullptr)
        throw std::invalid_argument("toy backend needs the structured state");
    if (request.num_candidates < 1) throw std::invalid_argument("num_candidates must be positive");
    const auto start = Clock::now();

    ToyPolicy policy = policy_;
    policy.temperature = request.temperature;

    GenerationResponse response;
    response.backend_name = name();
    response.texts.reserve(static_cast<std::size_t>(request.num_candidates));
    for (int j = 0; j < request.num_candidates; ++j) {
        Rng rng = Rng::substream(request.seed, static_cast<std::uint64_t>(j));
        const Candidate cand = sample_candidate(policy, *request.state, rng);
        response.texts.push_back(pad_to_tokens(cand.rendered_text, length_target_tokens_));
    }
    response.latency_s = seconds_since(start);
    return response;
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw std::invalid_argument("remote backend needs a base URL");
}

GenerationResponse RemoteBackend::generate(const GenerationRequest& request) {
    if (request.num_candidates < 1) throw std::invalid_argument("num_candidates must be positive");
    const auto start = Clock::now();

    httplib::Client client(config_.base_url);
    const auto timeout_us = std::chrono::microseconds(
        static_cast<long long>(config_.timeout_s * 1e6));
    client.set_connection_timeout(timeout_us);
    client.set_read_timeout(timeout_us);
    client.set_write_timeout(timeout_us);

    httplib::Headers headers;
    if (!config_.auth_token.empty())
        headers.emplace("Authorization", "Bearer " + config_.auth_token);

    GenerationResponse response;
    response.backend_name = name();
    response.texts.reserve(static_cast<std::size_t>(request.num_candidates));

    for (int j = 0; j < request.num_candidates; ++j) {
        nlohmann::json body{
            {"prompt", request.prompt},
            {"max_tokens", request.max_tokens},
            {"temperature", request.temperature},
            {"n", 1},
        };
        const std::string payload = body.dump();

        // One retry on transport failure, then give up.
        httplib::Result res = client.Post(config_.path, headers, payload, "application/json");
        if (!res) res = client.Post(config_.path, headers, payload, "application/json");
        if (!res)
            throw BackendTimeout("remote generation did not answer within " +
                                 std::to_string(config_.timeout_s) + " s");
        if (res->status != 200)
            throw BackendProtocolError("remote generation returned HTTP " +
                                       std::to_string(res->status));

        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception&) {
            throw BackendProtocolError("remote generation returned invalid JSON");
        }
        if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
            parsed["choices"].empty() || !parsed["choices"][0].contains("text"))
            throw BackendProtocolError("remote generation reply lacks choices[0].text");
        response.texts.push_back(parsed["choices"][0]["text"].get<std::string>());
    }

    response.latency_s = seconds_since(start);
    return response;
}

}  // namespace lsa
