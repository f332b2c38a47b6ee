#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtlforge::llm {

inline constexpr double kBenchmarkTemperature = 0.1;
inline constexpr const char* kDefaultApiKeyEnv = "RTLFORGE_API_KEY";

struct ProviderConfig {
    std::string model_name = "gpt-4-turbo";
    double temperature = kBenchmarkTemperature;
    int max_output_tokens = 2048;
    std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
    /// Name of the environment variable holding the key. The key itself is
    /// never stored here.
    std::string api_key_env = kDefaultApiKeyEnv;
    std::chrono::duration<double> request_timeout{60.0};
    int max_retries = 3;
    std::chrono::duration<double> backoff_base{0.5};
    std::chrono::duration<double> backoff_cap{8.0};

    /// Throws Error(kInvalidArgument) on out-of-range fields.
    void validate() const;
};

/// Request tags: one per pipeline step that talks to the model.
inline constexpr std::string_view kRequestTags[] = {"refine", "generate", "mmd_convert",
                                                    "rag_fix", "localize", "correct"};

struct ChatRequest {
    std::string system_text;
    std::string user_text;
    std::string tag;
    /// Overrides the provider temperature when set. Not part of the digest.
    std::optional<double> temperature;

    void validate() const;
};

struct CompletionResult {
    enum class Status { kOk, kTransportError, kProviderError, kReplayMiss };

    Status status = Status::kOk;
    std::string response_text;
    /// Raw diagnostic for failures (transport message, HTTP body, missing digest).
    std::string diagnostic;
    /// For replay misses: the stored digest sharing the longest prefix.
    std::string nearest_digest;
    int retry_count = 0;
    std::chrono::milliseconds latency{0};

    bool ok() const { return status == Status::kOk; }
};

std::string_view to_string(CompletionResult::Status s);

/// Trims trailing whitespace on every line and unifies newlines to \n.
std::string normalize(std::string_view text);

/// SHA-256 over normalize(system) + "\n\0" + normalize(user).
std::string request_digest(const ChatRequest& req);

/// Ordered (digest -> response) pairs with unique digests. Appends are
/// serialized so several recording workers may share one sink.
class Transcript {
public:
    struct Entry {
        std::string digest;
        std::string response;
    };

    Transcript() = default;
    Transcript(const Transcript& other);
    Transcript& operator=(const Transcript& other);

    /// Returns false (and leaves the transcript unchanged) if the digest is present.
    bool add(const std::string& digest, const std::string& response);
    std::optional<std::string> find(const std::string& digest) const;
    std::string nearest(const std::string& digest) const;
    std::vector<Entry> entries() const;
    size_t size() const;

    /// JSON Lines: {"digest": hex, "response": text}
    static Transcript load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
    std::string to_jsonl() const;

private:
    mutable std::mutex mu_;
    std::vector<Entry> entries_;
    std::map<std::string, size_t> index_;
};

/// Live call against an OpenAI-style chat-completions endpoint.
CompletionResult complete(const ProviderConfig& cfg, const ChatRequest& req);

/// Pure lookup; never consumes entries.
CompletionResult replay_complete(const Transcript& transcript, const ChatRequest& req);

/// Behaves like complete() and appends (digest, response) on success.
CompletionResult record_complete(const ProviderConfig& cfg, const ChatRequest& req, Transcript& sink);

// Everything above the client boundary talks to a Provider.
class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResult complete(const ChatRequest& req) = 0;
};

class HttpProvider : public Provider {
public:
    explicit HttpProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {}
    CompletionResult complete(const ChatRequest& req) override { return llm::complete(cfg_, req); }
    const ProviderConfig& config() const { return cfg_; }

private:
    ProviderConfig cfg_;
};

class ReplayProvider : public Provider {
public:
    explicit ReplayProvider(const Transcript& t) : transcript_(t) {}
    CompletionResult complete(const ChatRequest& req) override { return replay_complete(transcript_, req); }

private:
    const Transcript& transcript_;
};

/// Wraps any provider and records its successful answers into `sink`.
class RecordingProvider : public Provider {
public:
    RecordingProvider(Provider& inner, Transcript& sink) : inner_(inner), sink_(sink) {}
    CompletionResult complete(const ChatRequest& req) override;

private:
    Provider& inner_;
    Transcript& sink_;
};

/// Stamps a temperature on every request that does not carry one.
class TemperatureProvider : public Provider {
public:
    TemperatureProvider(Provider& inner, double temperature) : inner_(inner), temperature_(temperature) {}
    CompletionResult complete(const ChatRequest& req) override {
        ChatRequest r = req;
        if (!r.temperature) r.temperature = temperature_;
        return inner_.complete(r);
    }

private:
    Provider& inner_;
    double temperature_;
};

class FunctionProvider : public Provider {
public:
    using Fn = std::function<CompletionResult(const ChatRequest&)>;
    explicit FunctionProvider(Fn fn) : fn_(std::move(fn)) {}
    CompletionResult complete(const ChatRequest& req) override { return fn_(req); }

private:
    Fn fn_;
};

/// Offline provider answering from per-tag response queues. The last response
/// of a queue repeats once the queue is drained. Used to author replay
/// fixtures and for demos without network access.
class ScriptedProvider : public Provider {
public:
    using Script = std::map<std::string, std::vector<std::string>>;

    ScriptedProvider() = default;
    explicit ScriptedProvider(Script script) : script_(std::move(script)) {}

    /// JSON object: {"<tag>": ["response", ...], ...}
    static Script load_script(const std::filesystem::path& path);
    static ScriptedProvider from_json_file(const std::filesystem::path& path);

    void push(const std::string& tag, std::string response) { script_[tag].push_back(std::move(response)); }
    CompletionResult complete(const ChatRequest& req) override;
    const std::vector<ChatRequest>& requests() const { return seen_; }

private:
    std::mutex mu_;
    std::map<std::string, std::vector<std::string>> script_;
    std::map<std::string, size_t> cursor_;
    std::vector<ChatRequest> seen_;
};

}  // namespace rtlforge::llm
