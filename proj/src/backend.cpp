#include "membench/backend.hpp"

#include "membench/error.hpp"
#include "membench/util.hpp"

#include <fstream>
#include <sstream>

namespace membench {

namespace fs = std::filesystem;
using nlohmann::json;

JudgeResponse AlwaysSuccessBackend::complete(const JudgeRequest& request) {
    JudgeResponse r;
    switch (request.role) {
        case JudgeRole::triage:
            r.text = R"({"reason":"Final screens show every task requirement satisfied.","decision":"Success"})";
            break;
        case JudgeRole::step_descriptor:
            r.text = R"({"action_description":"The user performed the logged action.","ui_description":"The app screen relevant to the task is visible."})";
            break;
        case JudgeRole::semantic:
        case JudgeRole::visual:
            r.text = R"({"decision":1,"reason":"The workflow satisfies the task."})";
            break;
        case JudgeRole::irr_analyzer:
            r.text = R"({"total_information_units":1,"correctly_used_units":1,"irr_percentage":100,"analysis_reason":"All information used."})";
            break;
        case JudgeRole::failure_classifier:
            r.text = R"({"label":"Other","reason":"No classification available."})";
            break;
    }
    return r;
}

json to_json(const ReplayEntry& e) {
    json j = {{"role", std::string(to_string(e.role))}, {"reply", e.reply}};
    if (e.task_id) j["task_id"] = *e.task_id;
    if (e.attempt_index) j["attempt_index"] = *e.attempt_index;
    if (e.step_index) j["step_index"] = *e.step_index;
    if (e.transport_error) j["transport_error"] = true;
    return j;
}

ReplayEntry replay_entry_from_json(const json& j) {
    ReplayEntry e;
    try {
        e.role = judge_role_from_string(j.at("role").get<std::string>());
        const json& reply = j.contains("reply") ? j["reply"] : json("");
        // Replies may be given as JSON objects for readability.
        e.reply = reply.is_string() ? reply.get<std::string>() : reply.dump();
        if (j.contains("task_id")) e.task_id = j["task_id"].get<std::string>();
        if (j.contains("attempt_index")) e.attempt_index = j["attempt_index"].get<int>();
        if (j.contains("step_index")) e.step_index = j["step_index"].get<int>();
        e.transport_error = j.value("transport_error", false);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("bad transcript entry: ") + ex.what());
    }
    return e;
}

std::vector<ReplayEntry> load_transcript(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read transcript " + path.string());
    std::vector<ReplayEntry> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(replay_entry_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

void save_transcript(const std::vector<ReplayEntry>& entries, const fs::path& path) {
    std::ostringstream os;
    for (const auto& e : entries) os << to_json(e).dump() << '\n';
    write_text_file(path, os.str());
}

ReplayBackend::ReplayBackend(std::vector<ReplayEntry> entries, std::string name) : name_(std::move(name)) {
    for (auto& e : entries) {
        if (e.task_id)
            keyed_.push_back(std::move(e));
        else
            queues_[e.role].push_back(std::move(e));
    }
}

JudgeResponse ReplayBackend::complete(const JudgeRequest& request) {
    std::lock_guard lock(mutex_);
    LoggedRequest logged{request.role, request.system_text, request.user_text, request.context, {}};
    for (const CompositeImage* img : request.images) logged.image_members.push_back(img->member_steps);
    log_.push_back(std::move(logged));

    const ReplayEntry* best = nullptr;
    int best_score = -1;
    for (const auto& e : keyed_) {
        if (e.role != request.role || *e.task_id != request.context.task_id) continue;
        if (e.attempt_index && *e.attempt_index != request.context.attempt_index) continue;
        if (e.step_index && e.step_index != request.context.step_index) continue;
        const int score = (e.attempt_index ? 2 : 0) + (e.step_index ? 1 : 0);
        if (score > best_score) {
            best = &e;
            best_score = score;
        }
    }
    ReplayEntry chosen;
    if (best) {
        chosen = *best;
    } else {
        auto it = queues_.find(request.role);
        if (it == queues_.end() || it->second.empty()) {
            throw BackendError(name_ + ": no canned reply for role " + std::string(to_string(request.role)) +
                               " (task " + request.context.task_id + ")");
        }
        chosen = it->second.front();
        if (it->second.size() > 1) it->second.pop_front();
    }
    if (chosen.transport_error) throw BackendError(name_ + ": simulated transport failure");
    JudgeResponse r;
    r.text = chosen.reply;
    return r;
}

std::vector<LoggedRequest> ReplayBackend::requests() const {
    std::lock_guard lock(mutex_);
    return log_;
}

std::size_t ReplayBackend::call_count() const {
    std::lock_guard lock(mutex_);
    return log_.size();
}

RoleRoutedBackend::RoleRoutedBackend(std::shared_ptr<JudgeBackend> fallback) : fallback_(std::move(fallback)) {}

void RoleRoutedBackend::route(JudgeRole role, std::shared_ptr<JudgeBackend> backend) {
    routes_[role] = std::move(backend);
}

JudgeResponse RoleRoutedBackend::complete(const JudgeRequest& request) {
    auto it = routes_.find(request.role);
    JudgeBackend* b = it != routes_.end() ? it->second.get() : fallback_.get();
    if (!b) throw BackendError("no backend configured for role " + std::string(to_string(request.role)));
    return b->complete(request);
}

std::string RoleRoutedBackend::model_id() const {
    std::string id = fallback_ ? fallback_->model_id() : std::string("none");
    for (const auto& [role, b] : routes_) id += "," + std::string(to_string(role)) + "=" + b->model_id();
    return id;
}

namespace {

std::shared_ptr<JudgeBackend> make_mock(const std::string& spec, const fs::path& base) {
    if (spec == "mock:always_success") return std::make_shared<AlwaysSuccessBackend>();
    const std::string replay_prefix = "mock:replay:";
    if (spec.rfind(replay_prefix, 0) == 0) {
        fs::path p = spec.substr(replay_prefix.size());
        if (p.is_relative() && !base.empty()) p = base / p;
        return std::make_shared<ReplayBackend>(load_transcript(p), spec);
    }
    return nullptr;
}

std::shared_ptr<JudgeBackend> backend_from_role_config(const json& cfg, const fs::path& base) {
    const std::string model = cfg.at("model").get<std::string>();
    if (model.rfind("mock:", 0) == 0) {
        auto b = make_mock(model, base);
        if (!b) throw Error("unknown mock backend '" + model + "'");
        return b;
    }
    HttpBackendConfig hc;
    hc.model = model;
    hc.endpoint = cfg.value("endpoint", std::string("https://api.openai.com/v1"));
    hc.api_key_env = cfg.value("api_key_env", std::string{});
    hc.price_per_1k_input = cfg.value("price_per_1k_input", 0.0);
    hc.price_per_1k_output = cfg.value("price_per_1k_output", 0.0);
    hc.timeout = std::chrono::seconds(cfg.value("timeout_s", 120));
    return std::make_shared<HttpChatBackend>(hc);
}

}  // namespace

std::shared_ptr<JudgeBackend> load_backend_profile(const fs::path& path) {
    json profile;
    try {
        profile = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError("bad judge profile " + path.string() + ": " + e.what());
    }
    const fs::path base = path.parent_path();
    std::shared_ptr<JudgeBackend> fallback;
    if (profile.contains("default")) fallback = backend_from_role_config(profile["default"], base);
    auto routed = std::make_shared<RoleRoutedBackend>(fallback);
    if (profile.contains("roles")) {
        for (auto it = profile["roles"].begin(); it != profile["roles"].end(); ++it) {
            routed->route(judge_role_from_string(it.key()), backend_from_role_config(it.value(), base));
        }
    }
    return routed;
}

std::shared_ptr<JudgeBackend> make_backend(const std::string& spec) {
    if (auto mock = make_mock(spec, {})) return mock;
    if (spec.rfind("mock:", 0) == 0) throw Error("judge profile not found: unknown mock '" + spec + "'");
    if (!fs::is_regular_file(spec)) throw Error("judge profile not found: " + spec);
    return load_backend_profile(spec);
}

}  // namespace membench
