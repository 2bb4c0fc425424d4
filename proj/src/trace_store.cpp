#include "membench/error.hpp"
#include "membench/trace.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <regex>
#include <sstream>

namespace membench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::pair<ActionKind, std::string_view>, 9> action_names{{
    {ActionKind::click, "click"},
    {ActionKind::long_press, "long_press"},
    {ActionKind::type_text, "type_text"},
    {ActionKind::swipe, "swipe"},
    {ActionKind::open_app, "open_app"},
    {ActionKind::navigate_back, "navigate_back"},
    {ActionKind::wait, "wait"},
    {ActionKind::terminate, "terminate"},
    {ActionKind::other, "other"},
}};

constexpr std::array<std::pair<Termination, std::string_view>, 4> termination_names{{
    {Termination::agent_terminated, "agent_terminated"},
    {Termination::step_limit_exceeded, "step_limit_exceeded"},
    {Termination::token_budget_exceeded, "token_budget_exceeded"},
    {Termination::harness_error, "harness_error"},
}};

}  // namespace

std::string_view to_string(ActionKind kind) {
    for (const auto& [k, n] : action_names)
        if (k == kind) return n;
    return "other";
}

ActionKind action_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : action_names)
        if (n == name) return k;
    throw ParseError("unknown action_kind '" + std::string(name) + "'");
}

std::string_view to_string(Termination t) {
    for (const auto& [k, n] : termination_names)
        if (k == t) return n;
    return "harness_error";
}

Termination termination_from_string(std::string_view name) {
    for (const auto& [k, n] : termination_names)
        if (n == name) return k;
    throw ParseError("unknown termination '" + std::string(name) + "'");
}

void AttemptRecord::recompute_totals() {
    agent_steps = static_cast<int>(steps.size());
    total_time_ms = 0;
    total_tokens = 0;
    total_cost.reset();
    bool all_costed = !steps.empty();
    double cost = 0.0;
    for (const auto& s : steps) {
        total_time_ms += s.wall_time_ms;
        if (s.tokens) total_tokens += s.tokens->total();
        if (s.api_cost)
            cost += *s.api_cost;
        else
            all_costed = false;
    }
    if (all_costed) total_cost = cost;
}

bool AttemptRecord::has_token_accounting() const {
    return std::all_of(steps.begin(), steps.end(), [](const StepRecord& s) { return s.tokens.has_value(); });
}

void validate_attempt(const AttemptRecord& a) {
    AttemptRecord folded = a;
    folded.recompute_totals();
    if (folded.agent_steps != a.agent_steps || folded.total_time_ms != a.total_time_ms ||
        folded.total_tokens != a.total_tokens || folded.total_cost != a.total_cost) {
        throw ValidationError("attempt " + a.task_id + "/" + std::to_string(a.attempt_index) +
                              ": totals do not match per-step values");
    }
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        if (a.steps[i].step_index != static_cast<int>(i)) {
            throw ValidationError("attempt " + a.task_id + ": step indices must be 0.." +
                                  std::to_string(a.steps.size() - 1));
        }
        if (a.steps[i].action_kind == ActionKind::terminate && i + 1 != a.steps.size()) {
            throw ValidationError("attempt " + a.task_id + ": terminate must be the final step");
        }
    }
}

json step_to_json(const StepRecord& s) {
    json j = json::object();
    j["step_index"] = s.step_index;
    j["action_kind"] = std::string(to_string(s.action_kind));
    j["action_detail"] = s.action_detail;
    j["touch_point"] = s.touch_point ? json::array({s.touch_point->x, s.touch_point->y}) : json(nullptr);
    j["has_after"] = s.screenshot_after.has_value();
    j["ui_tree"] = s.ui_tree ? json(*s.ui_tree) : json(nullptr);
    j["thought"] = s.thought ? json(*s.thought) : json(nullptr);
    j["wall_time_ms"] = s.wall_time_ms;
    if (s.tokens) {
        j["tokens_in"] = s.tokens->in;
        j["tokens_out"] = s.tokens->out;
    } else {
        j["tokens_in"] = nullptr;
        j["tokens_out"] = nullptr;
    }
    j["api_cost"] = s.api_cost ? json(*s.api_cost) : json(nullptr);
    return j;
}

StepRecord step_from_json(const json& j) {
    try {
        StepRecord s;
        s.step_index = j.at("step_index").get<int>();
        s.action_kind = action_kind_from_string(j.at("action_kind").get<std::string>());
        s.action_detail = j.value("action_detail", std::string{});
        if (j.contains("touch_point") && j["touch_point"].is_array()) {
            s.touch_point = Point{j["touch_point"].at(0).get<int>(), j["touch_point"].at(1).get<int>()};
        }
        if (j.contains("ui_tree") && j["ui_tree"].is_string()) s.ui_tree = j["ui_tree"].get<std::string>();
        if (j.contains("thought") && j["thought"].is_string()) s.thought = j["thought"].get<std::string>();
        s.wall_time_ms = j.value("wall_time_ms", std::int64_t{0});
        if (j.contains("tokens_in") && !j["tokens_in"].is_null()) {
            s.tokens = TokenCount{j["tokens_in"].get<std::int64_t>(), j.value("tokens_out", std::int64_t{0})};
        }
        if (j.contains("api_cost") && !j["api_cost"].is_null()) s.api_cost = j["api_cost"].get<double>();
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad step record: ") + e.what());
    }
}

TraceStore::TraceStore(fs::path root) : root_(std::move(root)) {}

fs::path TraceStore::attempt_dir(const AttemptKey& key) const {
    return root_ / key.task_id / ("attempt_" + std::to_string(key.attempt_index));
}

void TraceStore::write_meta(const AttemptRecord& r, bool closed) const {
    json meta = {{"task_id", r.task_id},
                 {"attempt_index", r.attempt_index},
                 {"status", closed ? "closed" : "open"}};
    if (closed) {
        meta["termination"] = std::string(to_string(r.termination));
        meta["agent_steps"] = r.agent_steps;
        meta["total_time_ms"] = r.total_time_ms;
        meta["total_tokens"] = r.total_tokens;
        meta["total_cost"] = r.total_cost ? json(*r.total_cost) : json(nullptr);
        meta["start_observation_hash"] = r.start_observation_hash;
        meta["error"] = r.error;
    }
    std::ofstream out(attempt_dir({r.task_id, r.attempt_index}) / "meta", std::ios::trunc | std::ios::binary);
    out << meta.dump(2) << '\n';
    if (!out) throw StoreError("cannot write meta for " + r.task_id);
}

void TraceStore::open_attempt(const AttemptKey& key) {
    if (!is_safe_identifier(key.task_id)) throw StoreError("unsafe task_id '" + key.task_id + "'");
    if (key.attempt_index < 1) throw StoreError("attempt_index must be >= 1");
    std::lock_guard lock(mutex_);
    const fs::path dir = attempt_dir(key);
    if (open_.count(key)) throw StoreError("attempt already open: " + dir.string());
    if (fs::exists(dir / "meta")) throw StoreError("attempt already closed: " + dir.string());
    std::error_code ec;
    fs::create_directories(dir / "steps", ec);
    if (ec) throw StoreError("cannot create " + dir.string() + ": " + ec.message());
    std::ofstream(dir / "actions", std::ios::trunc);
    OpenAttempt oa;
    oa.record.task_id = key.task_id;
    oa.record.attempt_index = key.attempt_index;
    write_meta(oa.record, false);
    open_.emplace(key, std::move(oa));
}

void TraceStore::record_step(const AttemptKey& key, const StepRecord& step) {
    std::unique_lock lock(mutex_);
    auto it = open_.find(key);
    if (it == open_.end()) {
        if (fs::exists(attempt_dir(key) / "meta")) throw StoreError("attempt already closed");
        throw StoreError("attempt is not open");
    }
    AttemptRecord& rec = it->second.record;
    lock.unlock();  // the attempt has a single writer; only the map needs the lock

    const int expected = rec.steps.empty() ? 0 : rec.steps.back().step_index + 1;
    if (step.step_index != expected) {
        throw StoreError("out-of-order step index " + std::to_string(step.step_index) + " (expected " +
                         std::to_string(expected) + ")");
    }
    if (!rec.steps.empty() && rec.steps.back().action_kind == ActionKind::terminate) {
        throw StoreError("no steps may follow terminate");
    }
    if (step.screenshot_before.empty()) throw StoreError("step has no before-action screenshot");

    const fs::path dir = attempt_dir(key);
    const std::string stem = std::to_string(step.step_index);
    try {
        write_binary_file(dir / "steps" / (stem + "_before.png"), step.screenshot_before);
        if (step.screenshot_after) write_binary_file(dir / "steps" / (stem + "_after.png"), *step.screenshot_after);
    } catch (const Error& e) {
        throw StoreError(e.what());
    }
    std::ofstream out(dir / "actions", std::ios::app | std::ios::binary);
    out << step_to_json(step).dump() << '\n';
    out.flush();
    if (!out) throw StoreError("write failure appending to " + (dir / "actions").string());
    rec.steps.push_back(step);
}

AttemptRecord TraceStore::close_attempt(const AttemptKey& key, Termination termination,
                                        const std::string& start_observation_hash, const std::string& error) {
    std::lock_guard lock(mutex_);
    auto it = open_.find(key);
    if (it == open_.end()) throw StoreError("attempt is not open");
    AttemptRecord rec = std::move(it->second.record);
    open_.erase(it);
    rec.termination = termination;
    rec.start_observation_hash = start_observation_hash;
    rec.error = error;
    rec.recompute_totals();
    write_meta(rec, true);
    return rec;
}

void TraceStore::write_attempt(const AttemptRecord& attempt) {
    const AttemptKey key{attempt.task_id, attempt.attempt_index};
    open_attempt(key);
    for (const auto& s : attempt.steps) record_step(key, s);
    close_attempt(key, attempt.termination, attempt.start_observation_hash, attempt.error);
}

AttemptRecord TraceStore::read_attempt(const AttemptKey& key) const {
    const fs::path dir = attempt_dir(key);
    json meta;
    try {
        meta = json::parse(read_text_file(dir / "meta"));
    } catch (const std::exception& e) {
        throw StoreError("corrupt store: cannot read " + (dir / "meta").string() + ": " + e.what());
    }
    if (meta.value("status", "") != "closed") throw StoreError("attempt is not closed: " + dir.string());

    AttemptRecord rec;
    try {
        rec.task_id = meta.at("task_id").get<std::string>();
        rec.attempt_index = meta.at("attempt_index").get<int>();
        rec.termination = termination_from_string(meta.at("termination").get<std::string>());
        rec.start_observation_hash = meta.value("start_observation_hash", std::string{});
        rec.error = meta.value("error", std::string{});

        std::istringstream lines(read_text_file(dir / "actions"));
        std::string line;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            StepRecord s = step_from_json(j);
            const std::string stem = std::to_string(s.step_index);
            s.screenshot_before = read_binary_file(dir / "steps" / (stem + "_before.png"));
            if (j.value("has_after", false)) s.screenshot_after = read_binary_file(dir / "steps" / (stem + "_after.png"));
            rec.steps.push_back(std::move(s));
        }
        rec.recompute_totals();
        if (rec.agent_steps != meta.at("agent_steps").get<int>() ||
            rec.total_tokens != meta.at("total_tokens").get<std::int64_t>() ||
            rec.total_time_ms != meta.at("total_time_ms").get<std::int64_t>()) {
            throw StoreError("meta totals disagree with actions");
        }
        validate_attempt(rec);
    } catch (const StoreError& e) {
        throw StoreError("corrupt store at " + dir.string() + ": " + e.what());
    } catch (const std::exception& e) {
        throw StoreError("corrupt store at " + dir.string() + ": " + e.what());
    }
    return rec;
}

std::vector<AttemptKey> TraceStore::list_attempts() const {
    std::vector<AttemptKey> keys;
    if (!fs::is_directory(root_)) return keys;
    static const std::regex attempt_re("attempt_([0-9]+)");
    for (const auto& task_dir : fs::directory_iterator(root_)) {
        if (!task_dir.is_directory()) continue;
        for (const auto& a : fs::directory_iterator(task_dir.path())) {
            std::smatch m;
            const std::string name = a.path().filename().string();
            if (!a.is_directory() || !std::regex_match(name, m, attempt_re)) continue;
            if (!fs::exists(a.path() / "meta")) continue;
            keys.push_back({task_dir.path().filename().string(), std::stoi(m[1].str())});
        }
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

}  // namespace membench
