#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lsa/grpo.hpp"
#include "lsa/netenv.hpp"

namespace lsa {

struct GenerationRequest {
    std::string prompt;  // concatenated prompt blocks; the remote backend sees only this
    int max_tokens = 1024;
    int num_candidates = 1;  // G
    double temperature = 1.0;
    std::uint64_t seed = 0;
    // Structured slot state for the local backends (mock and toy policy);
    // ignored by the remote backend.
    const NetworkState* state = nullptr;
};

struct GenerationResponse {
    std::vector<std::string> texts;  // exactly num_candidates entries
    double latency_s = 0.0;
    std::string backend_name;
};

struct BackendTimeout : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BackendProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class PolicyBackend {
public:
    virtual ~PolicyBackend() = default;
    virtual GenerationResponse generate(const GenerationRequest& request) = 0;
    virtual std::string name() const = 0;
};

// Failure-mode proportions of the scripted mock backend. Weights need not sum
// to one; they are normalized. Modes the state cannot express (a duplicate
// needs two requesters, an occupied hit needs an occupied channel) fall back
// to valid output.
struct MockProportions {
    double valid = 1.0;             // parseable, in-domain, idle-only, padded
    double duplicate_channel = 0.0; // two users mapped to one channel
    double occupied_channel = 0.0;  // one user mapped to a primary channel
    double prose = 0.0;             // no dictionary at all
    double short_output = 0.0;      // valid single pair, no reasoning padding
};

// Deterministic templated generator used to exercise the structural-reward
// taxonomy and the repair path with reproducible proportions.
class MockBackend : public PolicyBackend {
public:
    explicit MockBackend(MockProportions proportions, int pad_tokens = 512);
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string name() const override { return "mock"; }

private:
    MockProportions props_;
    int pad_tokens_;
};

// Samples the toy categorical policy and renders candidates through the
// output schema, padded up to a token target (the dictionary itself is never
// truncated).
class ToyPolicyBackend : public PolicyBackend {
public:
    explicit ToyPolicyBackend(ToyPolicy policy, int length_target_tokens = 512);
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string name() const override { return "toy"; }

    const ToyPolicy& policy() const { return policy_; }

private:
    ToyPolicy policy_;
    int length_target_tokens_;
};

struct RemoteConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8080
    std::string path = "/generate";
    double timeout_s = 10.0;
    std::string auth_token;  // optional bearer token
};

// JSON-over-HTTP text-generation client. One POST per candidate with body
// {"prompt", "max_tokens", "temperature", "n"}; expects {"choices":
// [{"text": ...}]}. One retry on transport failure, then BackendTimeout;
// malformed or non-200 replies raise BackendProtocolError.
class RemoteBackend : public PolicyBackend {
public:
    explicit RemoteBackend(RemoteConfig config);
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string name() const override { return "remote"; }

private:
    RemoteConfig config_;
};

}  // namespace lsa
