#include "membench/simkit.hpp"

#include "membench/error.hpp"
#include "membench/image.hpp"
#include "membench/judge.hpp"
#include "membench/protocol.hpp"
#include "membench/util.hpp"

#include <algorithm>
#include <deque>

namespace membench::simkit {

using nlohmann::json;
namespace proto = membench::protocol;

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

constexpr std::array<std::pair<Injection, std::string_view>, 6> injection_names{{
    {Injection::none, "none"},
    {Injection::drop_one_unit, "drop_one_unit"},
    {Injection::abandon_goal_midway, "abandon_goal_midway"},
    {Injection::truncate_output, "truncate_output"},
    {Injection::succeed_on_attempt_n, "succeed_on_attempt_n"},
    {Injection::overrun, "overrun"},
}};

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

Point next_button(const WorldSpec& w) { return {w.width / 2, w.height - 50}; }

Action goto_screen(const WorldSpec& w, int screen) {
    return {ActionKind::click, "goto S" + std::to_string(screen), next_button(w)};
}

// Clicks needed before the output step on the correct path.
int click_count(const TaskSpec& task, bool has_units) {
    return std::max(0, task.golden_steps - 1 - (has_units ? 1 : 0));
}

std::vector<Action> correct_script(const TaskSpec& task, const WorldSpec& w, const std::vector<std::string>& units,
                                   std::optional<std::vector<std::string>> output) {
    std::vector<Action> s;
    const int clicks = click_count(task, !units.empty());
    for (int i = 1; i <= clicks; ++i) s.push_back(goto_screen(w, i));
    if (!units.empty()) s.push_back({ActionKind::type_text, output ? join(*output, " ") : join(units, " "), {}});
    return s;
}

std::vector<Action> abandon_script(const TaskSpec& task, const WorldSpec& w, const std::vector<std::string>& units) {
    std::vector<Action> s;
    const int clicks = click_count(task, !units.empty()) / 2;
    for (int i = 1; i <= clicks; ++i) s.push_back(goto_screen(w, i));
    return s;
}

Action action_from_json(const json& j) {
    Action a;
    a.kind = action_kind_from_string(j.at("action_kind").get<std::string>());
    a.detail = j.value("action_detail", std::string{});
    if (j.contains("touch_point")) a.touch_point = Point{j["touch_point"].at(0).get<int>(), j["touch_point"].at(1).get<int>()};
    return a;
}

json action_to_json(const Action& a) {
    json j = {{"action_kind", std::string(to_string(a.kind))}, {"action_detail", a.detail}};
    if (a.touch_point) j["touch_point"] = {a.touch_point->x, a.touch_point->y};
    return j;
}

TaskScript script_from_json(const json& j, TaskScript base) {
    if (j.contains("injection")) base.injection = injection_from_string(j["injection"].get<std::string>());
    if (j.contains("success_attempt")) base.success_attempt = j["success_attempt"].get<int>();
    if (j.contains("units")) base.units = j["units"].get<std::vector<std::string>>();
    if (j.contains("script")) {
        std::vector<Action> s;
        for (const auto& a : j["script"]) s.push_back(action_from_json(a));
        base.script = std::move(s);
        base.script_succeeds = j.value("script_succeeds", true);
    }
    return base;
}

json script_to_json(const TaskScript& t) {
    json j = {{"injection", std::string(to_string(t.injection))}, {"success_attempt", t.success_attempt}};
    if (t.units) j["units"] = *t.units;
    if (t.script) {
        j["script"] = json::array();
        for (const auto& a : *t.script) j["script"].push_back(action_to_json(a));
        j["script_succeeds"] = t.script_succeeds;
    }
    return j;
}

Rgb app_color(const std::string& app, std::uint64_t seed) {
    const std::uint64_t h = fnv1a(app + "#" + std::to_string(seed));
    return {static_cast<std::uint8_t>(60 + h % 120), static_cast<std::uint8_t>(60 + (h >> 8) % 120),
            static_cast<std::uint8_t>(60 + (h >> 16) % 120)};
}

}  // namespace

std::string_view to_string(Injection i) {
    for (const auto& [k, n] : injection_names)
        if (k == i) return n;
    return "none";
}

Injection injection_from_string(std::string_view s) {
    for (const auto& [k, n] : injection_names)
        if (n == s) return k;
    throw ParseError("unknown failure injection '" + std::string(s) + "'");
}

const TaskScript& WorldSpec::script_for(const std::string& task_id) const {
    auto it = tasks.find(task_id);
    return it == tasks.end() ? defaults : it->second;
}

std::vector<std::string> profile_names() {
    return {"scripted_ok",  "scripted_retry", "scripted_pmh",  "scripted_procmh",
            "scripted_omh", "scripted_timeout", "scripted_heavy"};
}

WorldSpec world_from_profile(const std::string& profile) {
    WorldSpec w;
    w.world_id = profile;
    if (profile == "scripted_ok") {
        w.defaults.injection = Injection::none;
    } else if (profile == "scripted_retry") {
        w.defaults.injection = Injection::succeed_on_attempt_n;
        w.defaults.success_attempt = 2;
    } else if (profile == "scripted_pmh") {
        w.defaults.injection = Injection::drop_one_unit;
    } else if (profile == "scripted_procmh") {
        w.defaults.injection = Injection::abandon_goal_midway;
    } else if (profile == "scripted_omh") {
        w.defaults.injection = Injection::truncate_output;
    } else if (profile == "scripted_timeout") {
        w.defaults.injection = Injection::overrun;
    } else if (profile == "scripted_heavy") {
        w.defaults.injection = Injection::none;
        w.tokens_in_per_step = 41760;
        w.tokens_out_per_step = 0;
    } else {
        throw Error("unknown simkit agent profile '" + profile + "'");
    }
    return w;
}

WorldSpec world_from_json(const json& j) {
    try {
        WorldSpec w = j.contains("profile") ? world_from_profile(j["profile"].get<std::string>()) : WorldSpec{};
        w.world_id = j.value("world_id", w.world_id);
        if (j.contains("default")) w.defaults = script_from_json(j["default"], w.defaults);
        if (j.contains("tasks"))
            for (auto it = j["tasks"].begin(); it != j["tasks"].end(); ++it)
                w.tasks[it.key()] = script_from_json(it.value(), w.defaults);
        w.tokens_in_per_step = j.value("tokens_in_per_step", w.tokens_in_per_step);
        w.tokens_out_per_step = j.value("tokens_out_per_step", w.tokens_out_per_step);
        w.cost_per_step = j.value("cost_per_step", w.cost_per_step);
        w.tick_ms = j.value("tick_ms", w.tick_ms);
        if (j.contains("screen")) {
            w.width = j["screen"].value("width", w.width);
            w.height = j["screen"].value("height", w.height);
        }
        if (w.width < 120 || w.height < 160) throw ValidationError("world screen must be at least 120x160");
        return w;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad world spec: ") + e.what());
    }
}

json to_json(const WorldSpec& w) {
    json tasks = json::object();
    for (const auto& [id, t] : w.tasks) tasks[id] = script_to_json(t);
    return {{"world_id", w.world_id},
            {"default", script_to_json(w.defaults)},
            {"tasks", tasks},
            {"tokens_in_per_step", w.tokens_in_per_step},
            {"tokens_out_per_step", w.tokens_out_per_step},
            {"cost_per_step", w.cost_per_step},
            {"tick_ms", w.tick_ms},
            {"screen", {{"width", w.width}, {"height", w.height}}}};
}

WorldSpec load_world_spec(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return world_from_json(j);
}

std::vector<std::string> information_units(const TaskSpec& task, const WorldSpec& world, std::uint64_t seed) {
    const TaskScript& ts = world.script_for(task.task_id);
    if (ts.units) return *ts.units;
    const int count = task.total_information_units.value_or(task.memory_intensive ? 2 : 0);
    std::vector<std::string> units;
    for (int k = 1; k <= count; ++k) {
        const std::uint64_t h = fnv1a(task.task_id + "/" + std::to_string(k) + "/" + std::to_string(seed));
        units.push_back("U" + std::to_string(k) + "-" + std::to_string(1000 + h % 9000));
    }
    return units;
}

std::vector<Action> agent_script(const TaskSpec& task, const WorldSpec& world, std::uint64_t seed, int attempt_index,
                                 std::optional<int> step_limit) {
    const TaskScript& ts = world.script_for(task.task_id);
    if (ts.script) return *ts.script;
    const auto units = information_units(task, world, seed);
    switch (ts.injection) {
        case Injection::none:
            return correct_script(task, world, units, std::nullopt);
        case Injection::drop_one_unit: {
            if (units.empty()) return correct_script(task, world, units, std::nullopt);
            std::vector<std::string> kept(units.begin(), units.end() - 1);
            return correct_script(task, world, units, kept);
        }
        case Injection::truncate_output:
            if (units.empty()) return correct_script(task, world, units, std::nullopt);
            return correct_script(task, world, units, std::vector<std::string>{"N/A"});
        case Injection::abandon_goal_midway:
            return abandon_script(task, world, units);
        case Injection::succeed_on_attempt_n:
            if (attempt_index >= ts.success_attempt) return correct_script(task, world, units, std::nullopt);
            return abandon_script(task, world, units);
        case Injection::overrun: {
            const int limit = step_limit.value_or(max_rounds(task)) + 5;
            std::vector<Action> s;
            for (int i = 1; i <= task.golden_steps && static_cast<int>(s.size()) < limit; ++i)
                s.push_back(goto_screen(world, i));
            while (static_cast<int>(s.size()) < limit) s.push_back({ActionKind::wait, "wait 1s", {}});
            return s;
        }
    }
    return {};
}

bool attempt_succeeds(const TaskSpec& task, const WorldSpec& world, int attempt_index) {
    const TaskScript& ts = world.script_for(task.task_id);
    if (ts.script) return ts.script_succeeds;
    switch (ts.injection) {
        case Injection::none: return true;
        case Injection::drop_one_unit:
        case Injection::truncate_output: return information_units(task, world, 0).empty();
        case Injection::abandon_goal_midway: return false;
        case Injection::succeed_on_attempt_n: return attempt_index >= ts.success_attempt;
        case Injection::overrun: return false;
    }
    return false;
}

// ---- environment ----

ScriptedEnvironment::ScriptedEnvironment(WorldSpec world, std::uint64_t seed, std::string isolation_key)
    : world_(std::move(world)), seed_(seed), key_(std::move(isolation_key)) {}

void ScriptedEnvironment::prepare_task(const TaskSpec& task) {
    task_ = task;
    units_ = information_units(task, world_, seed_);
    state_ = {};
    saved_ = {};
}

void ScriptedEnvironment::snapshot() { saved_ = state_; }

void ScriptedEnvironment::restore_snapshot() { state_ = saved_; }

Observation ScriptedEnvironment::observe() {
    if (!task_) throw Error("simkit environment has no task loaded");
    const TaskSpec& task = *task_;
    const int last = task.golden_steps;
    const std::size_t app_idx =
        std::min(task.apps.size() - 1, static_cast<std::size_t>(state_.screen) * task.apps.size() / (last + 1));
    const std::string& app = task.apps[app_idx];

    Image img(world_.width, world_.height, Rgb{245, 245, 240});
    img.fill_rect(0, 0, world_.width, 36, app_color(app, seed_));
    draw_text(img, 8, 11, app, 2, colors::white);
    draw_text(img, 8, 48, task.task_id + " S" + std::to_string(state_.screen), 2, Rgb{40, 40, 40});

    const int clicks = click_count(task, !units_.empty());
    int y = 84;
    for (std::size_t k = 0; k < units_.size(); ++k) {
        const int shown_on = static_cast<int>((k + 1) * static_cast<std::size_t>(clicks) / (units_.size() + 1));
        if (shown_on != state_.screen) continue;
        draw_text(img, 8, y, "UNIT " + std::to_string(k + 1) + ": " + units_[k], 2, Rgb{20, 60, 120});
        y += 20;
    }
    if (!state_.output.empty()) {
        draw_text(img, 8, 200, "OUTPUT:", 2, Rgb{40, 40, 40});
        const int per_line = std::max(1, (world_.width - 16) / 12);
        for (std::size_t off = 0, line = 0; off < state_.output.size(); off += per_line, ++line)
            draw_text(img, 8, 220 + static_cast<int>(line) * 18, state_.output.substr(off, per_line), 2, Rgb{40, 40, 40});
    }
    const Point b = next_button(world_);
    img.fill_rect(b.x - 50, b.y - 20, 100, 40, Rgb{70, 110, 200});
    draw_text(img, b.x - text_width("NEXT", 2) / 2, b.y - 7, "NEXT", 2, colors::white);

    Observation obs;
    obs.screenshot_png = encode_png(img);
    obs.ui_tree = json{{"app", app}, {"screen", "S" + std::to_string(state_.screen)}, {"output", state_.output}}.dump();
    return obs;
}

void ScriptedEnvironment::act(const Action& action) {
    if (!task_) throw Error("simkit environment has no task loaded");
    switch (action.kind) {
        case ActionKind::click: {
            const std::string& d = action.detail;
            int target = -1;
            if (d.rfind("goto S", 0) == 0) {
                try {
                    std::size_t used = 0;
                    target = std::stoi(d.substr(6), &used);
                    if (used != d.size() - 6) target = -1;
                } catch (const std::exception&) {
                    target = -1;
                }
            }
            if (target < 0 || target > task_->golden_steps) throw Error("unknown screen in action '" + d + "'");
            if (std::abs(target - state_.screen) != 1)
                throw Error("no transition from S" + std::to_string(state_.screen) + " to S" + std::to_string(target));
            state_.screen = target;
            break;
        }
        case ActionKind::navigate_back:
            if (state_.screen > 0) --state_.screen;
            break;
        case ActionKind::type_text:
            state_.output = action.detail;
            break;
        case ActionKind::terminate:
            throw Error("terminate is not an environment action");
        default:
            break;
    }
}

ScriptedEnvironmentFactory::ScriptedEnvironmentFactory(WorldSpec world, std::uint64_t seed)
    : world_(std::move(world)), seed_(seed) {}

std::unique_ptr<EnvironmentDriver> ScriptedEnvironmentFactory::create_from_image(const std::string& image,
                                                                                 const std::string& isolation_key) {
    if (image != simkit::image_id && image != "default")
        throw Error("simkit cannot boot image '" + image + "'");
    return std::make_unique<ScriptedEnvironment>(world_, seed_, isolation_key);
}

// ---- agent ----

ScriptedAgent::ScriptedAgent(Suite suite, WorldSpec world, std::uint64_t seed)
    : suite_(std::move(suite)), world_(std::move(world)), seed_(seed) {}

std::vector<std::string> ScriptedAgent::handle(const std::string& line) {
    const proto::HarnessMessage msg = proto::decode_harness_message(line);
    if (const auto* task = std::get_if<proto::TaskMessage>(&msg)) {
        const TaskSpec* spec = suite_.find(task->task_id);
        if (!spec) throw ProtocolError("scripted agent has no task '" + task->task_id + "'");
        script_ = agent_script(*spec, world_, seed_, task->attempt_index, task->step_limit);
        cursor_ = 0;
        in_attempt_ = true;
        return {};
    }
    if (!in_attempt_) throw ProtocolError("observation before task message");
    proto::Usage usage{TokenCount{world_.tokens_in_per_step, world_.tokens_out_per_step}, world_.cost_per_step};
    if (cursor_ < script_.size() && script_[cursor_].kind != ActionKind::terminate) {
        const Action& a = script_[cursor_++];
        return {proto::encode(proto::ActionMessage{a.kind, a.detail, a.touch_point, std::nullopt, usage})};
    }
    in_attempt_ = false;
    return {proto::encode(proto::TerminateMessage{proto::TerminateStatus::done, usage})};
}

namespace {

class ScriptedSession final : public AgentSession {
public:
    ScriptedSession(ScriptedAgent agent, std::string id) : agent_(std::move(agent)), id_(std::move(id)) {}

    void send(const std::string& line) override {
        for (auto& r : agent_.handle(line)) outbox_.push_back(std::move(r));
    }

    std::string receive() override {
        if (outbox_.empty()) throw ProtocolError("scripted agent has nothing to send");
        std::string line = std::move(outbox_.front());
        outbox_.pop_front();
        return line;
    }

    std::string session_id() const override { return id_; }

private:
    ScriptedAgent agent_;
    std::string id_;
    std::deque<std::string> outbox_;
};

}  // namespace

ScriptedAgentEndpoint::ScriptedAgentEndpoint(Suite suite, WorldSpec world, std::uint64_t seed)
    : suite_(std::move(suite)), world_(std::move(world)), seed_(seed) {}

std::unique_ptr<AgentSession> ScriptedAgentEndpoint::connect(const std::string& isolation_key) {
    return std::make_unique<ScriptedSession>(ScriptedAgent(suite_, world_, seed_), "simkit/" + isolation_key);
}

// ---- judge transcript ----

std::vector<ReplayEntry> fixture_transcript(const Suite& suite, const WorldSpec& world, const BudgetPolicy& budget,
                                            std::uint64_t seed) {
    std::vector<ReplayEntry> out;
    for (const auto& task : suite.tasks) {
        const TaskScript& ts = world.script_for(task.task_id);
        const auto units = information_units(task, world, seed);
        for (int n = 1; n <= budget.k; ++n) {
            auto add = [&](JudgeRole role, const json& reply) {
                ReplayEntry e;
                e.role = role;
                e.reply = reply.dump();
                e.task_id = task.task_id;
                e.attempt_index = n;
                out.push_back(std::move(e));
            };
            if (attempt_succeeds(task, world, n)) {
                add(JudgeRole::triage, {{"reason", "The final screens show the task completed with all required values."},
                                        {"decision", "Success"}});
                break;
            }
            const std::optional<int> limit =
                budget.mode == BudgetMode::steps_per_episode ? std::optional<int>(max_rounds(task)) : std::nullopt;
            const auto script = agent_script(task, world, seed, n, limit);
            const bool drop = !ts.script && ts.injection == Injection::drop_one_unit && !units.empty();

            add(JudgeRole::triage, {{"reason", "Earlier steps cannot be verified from the final screens."},
                                    {"decision", "Uncertain"}});
            add(JudgeRole::step_descriptor,
                {{"action_description", "The user advanced through the " + task.apps.front() + " workflow."},
                 {"ui_description", "A screen of task " + task.task_id + " with the NEXT button at the bottom."}});
            if (drop) {
                const int last = static_cast<int>(script.size()) - 1;  // the output step
                std::vector<int> req;
                if (last >= 1) req.push_back(last - 1);
                req.push_back(last);
                add(JudgeRole::semantic, {{"decision", -1},
                                          {"reason", "The typed output cannot be checked from the descriptions."},
                                          {"required_steps", req}});
                add(JudgeRole::visual, {{"decision", 0}, {"reason", "The final output is missing one required value."}});
            } else {
                add(JudgeRole::semantic, {{"decision", 0}, {"reason", "The workflow stops before the task is complete."}});
            }
            if (task.memory_intensive) {
                const int t = task.total_information_units.value_or(static_cast<int>(units.size()));
                const int c = drop ? std::min(t, static_cast<int>(units.size()) - 1) : 0;
                add(JudgeRole::irr_analyzer, {{"total_information_units", t},
                                              {"correctly_used_units", c},
                                              {"irr_percentage", irr_percentage(c, t)},
                                              {"analysis_reason", std::to_string(c) + " of " + std::to_string(t) +
                                                                      " information units used correctly."}});
            }
            std::string label = "Other";
            if (!ts.script) {
                if (ts.injection == Injection::abandon_goal_midway || ts.injection == Injection::succeed_on_attempt_n)
                    label = "ProcMH";
                else if (ts.injection == Injection::truncate_output)
                    label = "OMH";
            }
            add(JudgeRole::failure_classifier, {{"label", label}, {"reason", "Scripted failure injection."}});
        }
    }
    return out;
}

Fixture make_fixture(const Suite& suite, const WorldSpec& world, const BudgetPolicy& budget, std::uint64_t seed) {
    for (const auto& [id, ts] : world.tasks)
        if (!suite.find(id)) throw ValidationError("world spec names unknown task '" + id + "'");
    for (const auto& task : suite.tasks) {
        for (int n = 1; n <= budget.k; ++n) {
            ScriptedEnvironment env(world, seed, "validate");
            env.prepare_task(task);
            const std::optional<int> limit =
                budget.mode == BudgetMode::steps_per_episode ? std::optional<int>(max_rounds(task)) : std::nullopt;
            for (const Action& a : agent_script(task, world, seed, n, limit)) {
                if (a.kind == ActionKind::terminate) break;
                try {
                    env.act(a);
                } catch (const Error& e) {
                    throw ValidationError("agent script for " + task.task_id + " attempt " + std::to_string(n) +
                                          " references unknown screen: " + e.what());
                }
            }
            if (attempt_succeeds(task, world, n)) break;
        }
    }
    Fixture f;
    f.environments = std::make_shared<ScriptedEnvironmentFactory>(world, seed);
    f.agent = std::make_shared<ScriptedAgentEndpoint>(suite, world, seed);
    f.transcript = fixture_transcript(suite, world, budget, seed);
    return f;
}

}  // namespace membench::simkit
