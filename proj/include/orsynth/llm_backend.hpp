#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace orsynth {

struct CompletionRequest {
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 2500;

    // Throws std::invalid_argument on an empty prompt or out-of-range settings.
    void validate() const;
};

struct Completion {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

enum class BackendErrorKind { Transport, Exhausted, Protocol };
std::string_view to_string(BackendErrorKind kind);

class BackendError : public std::runtime_error {
public:
    BackendError(BackendErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}
    BackendErrorKind kind() const { return kind_; }

private:
    BackendErrorKind kind_;
};

class BackendConfigError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual Completion complete(const CompletionRequest& request) = 0;
};

// Which half of a generation iteration a query belongs to.
enum class Phase { Description, Solution };
std::string_view to_string(Phase phase);

struct Usage {
    long queries = 0;
    long prompt_tokens = 0;
    long completion_tokens = 0;

    Usage& operator+=(const Usage& o) {
        queries += o.queries;
        prompt_tokens += o.prompt_tokens;
        completion_tokens += o.completion_tokens;
        return *this;
    }
    bool operator==(const Usage&) const = default;
};

// Query and token accounting, split by phase. Thread-safe.
class BudgetLedger {
public:
    void record(Phase phase, long prompt_tokens, long completion_tokens);
    Usage phase(Phase phase) const;
    Usage total() const;
    nlohmann::ordered_json to_json() const;

private:
    mutable std::mutex mutex_;
    Usage description_;
    Usage solution_;
};

// Sends one request and records it in `ledger` under `phase`, whether or not it succeeds.
std::string complete(Backend& backend, const CompletionRequest& request, BudgetLedger& ledger,
                     Phase phase);

// Whitespace-delimited word count; the scripted backend's token estimate.
long count_words(std::string_view text);

class FixtureParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Replays canned responses in order. Each entry may require the incoming prompt
// to contain a substring.
class ScriptedBackend : public Backend {
public:
    struct Entry {
        std::optional<std::string> expect_substring;
        std::string response;
    };

    explicit ScriptedBackend(std::vector<Entry> entries);
    Completion complete(const CompletionRequest& request) override;
    std::size_t remaining() const;
    std::size_t served() const;

private:
    mutable std::mutex mutex_;
    std::deque<Entry> queue_;
    std::size_t served_ = 0;
};

std::vector<ScriptedBackend::Entry> parse_script(std::string_view jsonl);
std::unique_ptr<ScriptedBackend> load_scripted(const std::filesystem::path& path);

struct HttpBackendConfig {
    std::string endpoint;     // e.g. https://host/v1/chat/completions
    std::string model;
    std::string api_key_env;  // name of the environment variable holding the key
    int retries = 2;
    double timeout_seconds = 120.0;
};

// Chat-completions style JSON over HTTP(S).
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    Completion complete(const CompletionRequest& request) override;
    const HttpBackendConfig& config() const { return config_; }

private:
    Completion attempt(const CompletionRequest& request) const;

    HttpBackendConfig config_;
    std::string base_url_;
    std::string path_;
    std::string api_key_;
};

// Builds a backend from a spec string: "scripted:<fixture.jsonl>" or the path of a
// key-value config file (type, endpoint, model, api_key_env, retries, timeout, fixture).
std::unique_ptr<Backend> make_backend(const std::string& spec);

}  // namespace orsynth
