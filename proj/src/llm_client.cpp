#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "rtlforge/llm_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "rtlforge/digest.hpp"
#include "rtlforge/error.hpp"
#include "rtlforge/text.hpp"

namespace rtlforge::llm {

using json = nlohmann::json;

void ProviderConfig::validate() const {
    if (model_name.empty()) throw Error(ErrorCode::kInvalidArgument, "model_name is empty");
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw Error(ErrorCode::kInvalidArgument, "temperature must lie in [0, 2]");
    if (max_output_tokens <= 0) throw Error(ErrorCode::kInvalidArgument, "max_output_tokens must be positive");
    if (endpoint_url.empty()) throw Error(ErrorCode::kInvalidArgument, "endpoint_url is empty");
    if (api_key_env.empty()) throw Error(ErrorCode::kInvalidArgument, "api_key_env is empty");
    if (request_timeout.count() <= 0) throw Error(ErrorCode::kInvalidArgument, "request_timeout must be positive");
    if (max_retries < 0 || max_retries > 10) throw Error(ErrorCode::kInvalidArgument, "max_retries must lie in [0, 10]");
}

void ChatRequest::validate() const {
    if (user_text.empty()) throw Error(ErrorCode::kInvalidArgument, "user_text is empty");
    if (std::find(std::begin(kRequestTags), std::end(kRequestTags), tag) == std::end(kRequestTags))
        throw Error(ErrorCode::kInvalidArgument, "unknown request tag '" + tag + "'");
    if (temperature && !(*temperature >= 0.0 && *temperature <= 2.0))
        throw Error(ErrorCode::kInvalidArgument, "temperature must lie in [0, 2]");
}

std::string_view to_string(CompletionResult::Status s) {
    switch (s) {
        case CompletionResult::Status::kOk: return "ok";
        case CompletionResult::Status::kTransportError: return "transport_error";
        case CompletionResult::Status::kProviderError: return "provider_error";
        case CompletionResult::Status::kReplayMiss: return "replay_miss";
    }
    return "unknown";
}

std::string normalize(std::string_view input) {
    std::string unified;
    unified.reserve(input.size());
    for (size_t i = 0; i < input.size(); ++i) {
        if (input[i] == '\r') {
            unified.push_back('\n');
            if (i + 1 < input.size() && input[i + 1] == '\n') ++i;
        } else {
            unified.push_back(input[i]);
        }
    }
    std::string out;
    out.reserve(unified.size());
    size_t start = 0;
    while (start <= unified.size()) {
        size_t nl = unified.find('\n', start);
        size_t end = nl == std::string::npos ? unified.size() : nl;
        size_t last = end;
        while (last > start && (unified[last - 1] == ' ' || unified[last - 1] == '\t' ||
                                unified[last - 1] == '\v' || unified[last - 1] == '\f'))
            --last;
        out.append(unified, start, last - start);
        if (nl == std::string::npos) break;
        out.push_back('\n');
        start = nl + 1;
    }
    return out;
}

std::string request_digest(const ChatRequest& req) {
    std::string material = normalize(req.system_text);
    material.push_back('\n');
    material.push_back('\0');
    material += normalize(req.user_text);
    return sha256_hex(material);
}

// --- Transcript -------------------------------------------------------------

Transcript::Transcript(const Transcript& other) {
    std::lock_guard lock(other.mu_);
    entries_ = other.entries_;
    index_ = other.index_;
}

Transcript& Transcript::operator=(const Transcript& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mu_, other.mu_);
    entries_ = other.entries_;
    index_ = other.index_;
    return *this;
}

bool Transcript::add(const std::string& digest, const std::string& response) {
    std::lock_guard lock(mu_);
    if (index_.count(digest)) return false;
    index_[digest] = entries_.size();
    entries_.push_back({digest, response});
    return true;
}

std::optional<std::string> Transcript::find(const std::string& digest) const {
    std::lock_guard lock(mu_);
    auto it = index_.find(digest);
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].response;
}

std::string Transcript::nearest(const std::string& digest) const {
    std::lock_guard lock(mu_);
    std::string best;
    size_t best_len = 0;
    for (const auto& e : entries_) {
        size_t n = 0;
        while (n < e.digest.size() && n < digest.size() && e.digest[n] == digest[n]) ++n;
        if (best.empty() || n > best_len) {
            best = e.digest;
            best_len = n;
        }
    }
    return best;
}

std::vector<Transcript::Entry> Transcript::entries() const {
    std::lock_guard lock(mu_);
    return entries_;
}

size_t Transcript::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

Transcript Transcript::load(const std::filesystem::path& path) {
    Transcript t;
    std::istringstream in(text::read_file(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!obj.is_object() || !obj.contains("digest") || !obj.contains("response") ||
            !obj["digest"].is_string() || !obj["response"].is_string())
            throw Error(ErrorCode::kParseError,
                        path.string() + ":" + std::to_string(lineno) + ": expected {digest, response}");
        if (!t.add(obj["digest"].get<std::string>(), obj["response"].get<std::string>()))
            throw Error(ErrorCode::kDuplicateId,
                        path.string() + ":" + std::to_string(lineno) + ": repeated digest");
    }
    return t;
}

std::string Transcript::to_jsonl() const {
    std::string out;
    for (const auto& e : entries()) {
        json obj = {{"digest", e.digest}, {"response", e.response}};
        out += obj.dump();
        out.push_back('\n');
    }
    return out;
}

void Transcript::save(const std::filesystem::path& path) const { text::write_file(path, to_jsonl()); }

// --- live client ------------------------------------------------------------

namespace {

struct Endpoint {
    std::string scheme_host_port;
    std::string path;
};

Endpoint split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "endpoint_url lacks a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string request_body(const ProviderConfig& cfg, const ChatRequest& req) {
    json messages = json::array();
    if (!req.system_text.empty()) messages.push_back({{"role", "system"}, {"content", req.system_text}});
    messages.push_back({{"role", "user"}, {"content", req.user_text}});
    json body = {{"model", cfg.model_name},
                 {"temperature", req.temperature.value_or(cfg.temperature)},
                 {"max_tokens", cfg.max_output_tokens},
                 {"n", 1},
                 {"messages", messages}};
    return body.dump();
}

enum class Attempt { kOk, kRetry, kFatal };

}  // namespace

CompletionResult complete(const ProviderConfig& cfg, const ChatRequest& req) {
    cfg.validate();
    req.validate();
    const auto started = std::chrono::steady_clock::now();
    const Endpoint ep = split_url(cfg.endpoint_url);
    const std::string body = request_body(cfg, req);

    CompletionResult result;
    for (int attempt = 0;; ++attempt) {
        httplib::Client client(ep.scheme_host_port);
        const auto secs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.request_timeout);
        client.set_connection_timeout(secs);
        client.set_read_timeout(secs);
        client.set_write_timeout(secs);

        httplib::Headers headers;
        // The key is read here, at send time, and nowhere else.
        if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);

        Attempt verdict = Attempt::kFatal;
        auto res = client.Post(ep.path, headers, body, "application/json");
        if (!res) {
            result.status = CompletionResult::Status::kTransportError;
            result.diagnostic = httplib::to_string(res.error());
            verdict = Attempt::kRetry;
        } else if (res->status < 200 || res->status >= 300) {
            result.status = CompletionResult::Status::kProviderError;
            result.diagnostic = "HTTP " + std::to_string(res->status) + ": " + res->body;
            verdict = (res->status >= 500 || res->status == 429) ? Attempt::kRetry : Attempt::kFatal;
        } else {
            try {
                json payload = json::parse(res->body);
                const auto& content = payload.at("choices").at(0).at("message").at("content");
                result.status = CompletionResult::Status::kOk;
                result.response_text = content.get<std::string>();
                result.diagnostic.clear();
                verdict = Attempt::kOk;
            } catch (const json::exception& e) {
                result.status = CompletionResult::Status::kProviderError;
                result.diagnostic = std::string("malformed payload: ") + e.what() + ": " + res->body.substr(0, 512);
                verdict = Attempt::kFatal;
            }
        }

        if (verdict != Attempt::kRetry || attempt >= cfg.max_retries) break;
        auto wait = std::min(cfg.backoff_base.count() * static_cast<double>(1 << attempt), cfg.backoff_cap.count());
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        result.retry_count = attempt + 1;
    }
    result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    return result;
}

CompletionResult replay_complete(const Transcript& transcript, const ChatRequest& req) {
    req.validate();
    CompletionResult result;
    const std::string digest = request_digest(req);
    if (auto hit = transcript.find(digest)) {
        result.response_text = *hit;
        return result;
    }
    result.status = CompletionResult::Status::kReplayMiss;
    result.diagnostic = "no transcript entry for digest " + digest + " (tag " + req.tag + ")";
    result.nearest_digest = transcript.nearest(digest);
    return result;
}

CompletionResult record_complete(const ProviderConfig& cfg, const ChatRequest& req, Transcript& sink) {
    CompletionResult result = complete(cfg, req);
    if (result.ok()) sink.add(request_digest(req), result.response_text);
    return result;
}

CompletionResult RecordingProvider::complete(const ChatRequest& req) {
    CompletionResult result = inner_.complete(req);
    if (result.ok()) sink_.add(request_digest(req), result.response_text);
    return result;
}

// --- scripted provider --------------------------------------------------------

ScriptedProvider::Script ScriptedProvider::load_script(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(text::read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::kParseError, path.string() + ": expected an object");
    std::map<std::string, std::vector<std::string>> script;
    for (auto& [tag, list] : doc.items()) {
        if (!list.is_array()) throw Error(ErrorCode::kParseError, path.string() + ": '" + tag + "' must be an array");
        for (auto& item : list) {
            if (!item.is_string()) throw Error(ErrorCode::kParseError, path.string() + ": responses must be strings");
            script[tag].push_back(item.get<std::string>());
        }
    }
    return script;
}

ScriptedProvider ScriptedProvider::from_json_file(const std::filesystem::path& path) {
    return ScriptedProvider(load_script(path));
}

CompletionResult ScriptedProvider::complete(const ChatRequest& req) {
    req.validate();
    std::lock_guard lock(mu_);
    seen_.push_back(req);
    CompletionResult result;
    auto it = script_.find(req.tag);
    if (it == script_.end() || it->second.empty()) {
        result.status = CompletionResult::Status::kProviderError;
        result.diagnostic = "script has no response for tag '" + req.tag + "'";
        return result;
    }
    size_t& cur = cursor_[req.tag];
    result.response_text = it->second[std::min(cur, it->second.size() - 1)];
    ++cur;
    return result;
}

}  // namespace rtlforge::llm
