#include "orsynth/llm_backend.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace orsynth {

using nlohmann::json;

void CompletionRequest::validate() const {
    if (prompt.empty()) throw std::invalid_argument("completion prompt is empty");
    if (!(temperature >= 0.0 && temperature <= 1.0))
        throw std::invalid_argument("temperature must lie in [0, 1]");
    if (max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");
}

std::string_view to_string(BackendErrorKind kind) {
    switch (kind) {
        case BackendErrorKind::Transport: return "transport";
        case BackendErrorKind::Exhausted: return "exhausted";
        case BackendErrorKind::Protocol: return "protocol";
    }
    return "unknown";
}

std::string_view to_string(Phase phase) {
    return phase == Phase::Description ? "description" : "solution";
}

void BudgetLedger::record(Phase phase, long prompt_tokens, long completion_tokens) {
    std::lock_guard lock(mutex_);
    Usage& u = phase == Phase::Description ? description_ : solution_;
    u += Usage{1, prompt_tokens, completion_tokens};
}

Usage BudgetLedger::phase(Phase phase) const {
    std::lock_guard lock(mutex_);
    return phase == Phase::Description ? description_ : solution_;
}

Usage BudgetLedger::total() const {
    std::lock_guard lock(mutex_);
    Usage t = description_;
    t += solution_;
    return t;
}

nlohmann::ordered_json BudgetLedger::to_json() const {
    auto usage_json = [](const Usage& u) {
        return nlohmann::ordered_json{{"queries", u.queries},
                                      {"prompt_tokens", u.prompt_tokens},
                                      {"completion_tokens", u.completion_tokens}};
    };
    Usage d = phase(Phase::Description), s = phase(Phase::Solution), t = total();
    nlohmann::ordered_json j = usage_json(t);
    j["description"] = usage_json(d);
    j["solution"] = usage_json(s);
    return j;
}

std::string complete(Backend& backend, const CompletionRequest& request, BudgetLedger& ledger,
                     Phase phase) {
    request.validate();
    try {
        Completion c = backend.complete(request);
        ledger.record(phase, c.prompt_tokens, c.completion_tokens);
        return std::move(c.text);
    } catch (const BackendError&) {
        ledger.record(phase, 0, 0);
        throw;
    }
}

long count_words(std::string_view text) {
    long n = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = std::isspace(static_cast<unsigned char>(c));
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<Entry> entries)
    : queue_(entries.begin(), entries.end()) {}

Completion ScriptedBackend::complete(const CompletionRequest& request) {
    std::lock_guard lock(mutex_);
    if (queue_.empty())
        throw BackendError(BackendErrorKind::Exhausted,
                           "scripted backend has no response left (served " +
                               std::to_string(served_) + ")");
    Entry entry = std::move(queue_.front());
    queue_.pop_front();
    ++served_;
    if (entry.expect_substring && request.prompt.find(*entry.expect_substring) == std::string::npos)
        throw BackendError(BackendErrorKind::Protocol,
                           "prompt for scripted response #" + std::to_string(served_) +
                               " does not contain expected substring \"" +
                               *entry.expect_substring + "\"");
    return Completion{entry.response, count_words(request.prompt), count_words(entry.response)};
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
}

std::size_t ScriptedBackend::served() const {
    std::lock_guard lock(mutex_);
    return served_;
}

std::vector<ScriptedBackend::Entry> parse_script(std::string_view jsonl) {
    std::vector<ScriptedBackend::Entry> entries;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json j = json::parse(line);
            ScriptedBackend::Entry e;
            e.response = j.at("response").get<std::string>();
            if (j.contains("expect_substring") && !j.at("expect_substring").is_null())
                e.expect_substring = j.at("expect_substring").get<std::string>();
            entries.push_back(std::move(e));
        } catch (const std::exception& ex) {
            throw FixtureParseError("fixture line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return entries;
}

std::unique_ptr<ScriptedBackend> load_scripted(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FixtureParseError("cannot read fixture " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return std::make_unique<ScriptedBackend>(parse_script(ss.str()));
}

// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url))
        throw BackendConfigError("invalid endpoint URL '" + config_.endpoint + "'");
    base_url_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
#ifndef ORSYNTH_HAVE_OPENSSL
    if (base_url_.rfind("https://", 0) == 0)
        throw BackendConfigError("this build has no TLS support; use an http:// endpoint");
#endif
    if (config_.model.empty()) throw BackendConfigError("backend model name is empty");
    if (config_.retries < 0) throw BackendConfigError("retry count must be non-negative");
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key)
            throw BackendConfigError("environment variable " + config_.api_key_env + " is not set");
        api_key_ = key;
    }
}

Completion HttpBackend::attempt(const CompletionRequest& request) const {
    httplib::Client client(base_url_);
    auto secs = static_cast<time_t>(config_.timeout_seconds);
    auto usecs = static_cast<time_t>((config_.timeout_seconds - std::floor(config_.timeout_seconds)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    json body{{"model", config_.model},
              {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res)
        throw BackendError(BackendErrorKind::Transport,
                           "request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw BackendError(BackendErrorKind::Transport, "HTTP " + std::to_string(res->status));
    if (res->status != 200)
        throw BackendError(BackendErrorKind::Protocol,
                           "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    try {
        json j = json::parse(res->body);
        Completion c;
        c.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) {
            const auto& u = j.at("usage");
            c.prompt_tokens = u.value("prompt_tokens", 0L);
            c.completion_tokens = u.value("completion_tokens", 0L);
        } else {
            c.prompt_tokens = count_words(request.prompt);
            c.completion_tokens = count_words(c.text);
        }
        return c;
    } catch (const std::exception& e) {
        throw BackendError(BackendErrorKind::Protocol, std::string("malformed response: ") + e.what());
    }
}

Completion HttpBackend::complete(const CompletionRequest& request) {
    for (int attempt_no = 0;; ++attempt_no) {
        try {
            return attempt(request);
        } catch (const BackendError& e) {
            if (e.kind() != BackendErrorKind::Transport || attempt_no >= config_.retries) throw;
        }
    }
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw BackendConfigError("cannot read backend config " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw BackendConfigError(path.string() + ":" + std::to_string(line_no) +
                                     ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace

std::unique_ptr<Backend> make_backend(const std::string& spec) {
    constexpr std::string_view prefix = "scripted:";
    if (spec.rfind(prefix, 0) == 0) return load_scripted(spec.substr(prefix.size()));

    auto kv = read_key_values(spec);
    std::string type = kv.count("type") ? kv["type"] : "http";
    if (type == "scripted") {
        if (!kv.count("fixture")) throw BackendConfigError("scripted backend needs 'fixture'");
        std::filesystem::path fixture = kv["fixture"];
        if (fixture.is_relative()) fixture = std::filesystem::path(spec).parent_path() / fixture;
        return load_scripted(fixture);
    }
    if (type != "http") throw BackendConfigError("unknown backend type '" + type + "'");
    HttpBackendConfig cfg;
    cfg.endpoint = kv["endpoint"];
    cfg.model = kv["model"];
    cfg.api_key_env = kv["api_key_env"];
    try {
        if (kv.count("retries")) cfg.retries = std::stoi(kv["retries"]);
        if (kv.count("timeout")) cfg.timeout_seconds = std::stod(kv["timeout"]);
    } catch (const std::exception&) {
        throw BackendConfigError("retries/timeout must be numeric");
    }
    return std::make_unique<HttpBackend>(cfg);
}

}  // namespace orsynth
