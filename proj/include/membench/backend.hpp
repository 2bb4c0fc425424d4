#pragma once

#include "membench/templates.hpp"
#include "membench/trace.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace membench {

/// Identifies which attempt (and step) a judge request belongs to. Replay
/// mocks key canned replies on it.
struct RequestContext {
    std::string task_id;
    int attempt_index = 0;
    std::optional<int> step_index;
};

struct JudgeRequest {
    JudgeRole role = JudgeRole::triage;
    std::string system_text;
    std::string user_text;
    std::vector<const CompositeImage*> images;
    RequestContext context;
};

struct JudgeResponse {
    std::string text;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;
    double cost = 0.0;
};

/// (system_text, user_text, images) -> raw reply text. Implementations must be
/// safe to call from several threads. Transport failures raise BackendError.
class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;
    virtual JudgeResponse complete(const JudgeRequest& request) = 0;
    virtual std::string model_id() const = 0;
};

/// Mock that accepts every attempt at triage and gives generic valid replies
/// for the other roles.
class AlwaysSuccessBackend final : public JudgeBackend {
public:
    JudgeResponse complete(const JudgeRequest& request) override;
    std::string model_id() const override { return "mock:always_success"; }
};

/// One canned reply. Entries with a task_id (and optionally attempt/step)
/// are keyed and reusable; unkeyed entries are consumed in order per role and
/// the last unkeyed entry of a role repeats once the queue runs dry.
struct ReplayEntry {
    JudgeRole role = JudgeRole::triage;
    std::string reply;
    std::optional<std::string> task_id;
    std::optional<int> attempt_index;
    std::optional<int> step_index;
    bool transport_error = false;  // simulate a transport failure instead of replying
};

nlohmann::json to_json(const ReplayEntry& e);
ReplayEntry replay_entry_from_json(const nlohmann::json& j);

/// Replay-mock transcript: one JSON object per line.
std::vector<ReplayEntry> load_transcript(const std::filesystem::path& path);
void save_transcript(const std::vector<ReplayEntry>& entries, const std::filesystem::path& path);

struct LoggedRequest {
    JudgeRole role = JudgeRole::triage;
    std::string system_text;
    std::string user_text;
    RequestContext context;
    std::vector<std::vector<int>> image_members;
};

class ReplayBackend final : public JudgeBackend {
public:
    explicit ReplayBackend(std::vector<ReplayEntry> entries, std::string name = "mock:replay");

    JudgeResponse complete(const JudgeRequest& request) override;
    std::string model_id() const override { return name_; }

    /// Requests served so far, in arrival order.
    std::vector<LoggedRequest> requests() const;
    std::size_t call_count() const;

private:
    std::string name_;
    std::vector<ReplayEntry> keyed_;
    std::map<JudgeRole, std::deque<ReplayEntry>> queues_;
    mutable std::mutex mutex_;
    std::vector<LoggedRequest> log_;
};

/// Routes each role to its own backend, falling back to a default.
class RoleRoutedBackend final : public JudgeBackend {
public:
    explicit RoleRoutedBackend(std::shared_ptr<JudgeBackend> fallback);
    void route(JudgeRole role, std::shared_ptr<JudgeBackend> backend);

    JudgeResponse complete(const JudgeRequest& request) override;
    std::string model_id() const override;

private:
    std::shared_ptr<JudgeBackend> fallback_;
    std::map<JudgeRole, std::shared_ptr<JudgeBackend>> routes_;
};

/// OpenAI-compatible chat-completions adapter over HTTP(S).
struct HttpBackendConfig {
    std::string model;
    std::string endpoint;     // e.g. https://api.openai.com/v1
    std::string api_key_env;  // name of the environment variable holding the key
    double price_per_1k_input = 0.0;
    double price_per_1k_output = 0.0;
    std::chrono::seconds timeout{120};
};

class HttpChatBackend final : public JudgeBackend {
public:
    explicit HttpChatBackend(HttpBackendConfig config);
    JudgeResponse complete(const JudgeRequest& request) override;
    std::string model_id() const override { return config_.model; }

private:
    HttpBackendConfig config_;
};

/// Builds a backend from a spec string:
///   mock:always_success | mock:replay:<transcript path> | <profile.json path>
/// A profile maps roles to model identifiers, endpoints and credential
/// environment variables. Throws Error("judge profile not found: ...") when the
/// spec names no known mock and no readable profile.
std::shared_ptr<JudgeBackend> make_backend(const std::string& spec);

/// Backend profile: role -> model config. Model ids prefixed "mock:" resolve to
/// the mocks above; anything else uses HttpChatBackend.
std::shared_ptr<JudgeBackend> load_backend_profile(const std::filesystem::path& path);

}  // namespace membench
