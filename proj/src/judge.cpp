#include "membench/judge.hpp"

#include "membench/error.hpp"

#include <algorithm>
#include <array>
#include <future>
#include <sstream>
#include <thread>

namespace membench {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Decision, std::string_view>, 3> decision_names{{
    {Decision::success, "success"},
    {Decision::failure, "failure"},
    {Decision::evaluation_error, "evaluation_error"},
}};

constexpr std::array<std::pair<FailureMode, std::string_view>, 7> mode_names{{
    {FailureMode::ExecutionTimeout, "ExecutionTimeout"},
    {FailureMode::PMH, "PMH"},
    {FailureMode::ProcMH, "ProcMH"},
    {FailureMode::OMH, "OMH"},
    {FailureMode::KD, "KD"},
    {FailureMode::IM, "IM"},
    {FailureMode::Other, "Other"},
}};

const std::string reask_suffix = "\n\nRespond with only the JSON object.";

ImageSummary summarize(const CompositeImage& img) {
    return {img.layout, img.member_steps, img.pixels.width(), img.pixels.height()};
}

class Pipeline {
public:
    Pipeline(const TaskSpec& task, const AttemptRecord& attempt, JudgeBackend& backend,
             const TemplateStore& templates, const JudgeOptions& options)
        : task_(task), attempt_(attempt), backend_(backend), templates_(templates), options_(options) {}

    JudgeExchange call(JudgeRole role, const Bindings& bindings, const std::vector<const CompositeImage*>& images,
                       std::optional<int> step_index = std::nullopt) const {
        return run_exchange(role, bindings, images, {attempt_.task_id, attempt_.attempt_index, step_index}, backend_,
                            templates_, options_);
    }

    Verdict run() {
        Verdict v;
        if (attempt_.steps.empty()) {
            v.decision = Decision::evaluation_error;
            v.decided_at_stage = 1;
            v.reason = "attempt has no recorded steps";
            return finish(v);
        }

        // Stage 1: triage over the final screens and raw logs.
        const CompositeImage last_n = compose_last_n(attempt_, options_.last_n);
        JudgeExchange tri = call(JudgeRole::triage,
                                 {{"task_description", task_.description},
                                  {"total_steps", std::to_string(attempt_.steps.size())},
                                  {"action_logs", format_action_log(attempt_)}},
                                 {&last_n});
        v.exchanges.push_back(tri);
        if (tri.parsed.is_null()) return error(v, 1, "triage", tri);
        if (tri.parsed["decision"] == "Success") {
            v.decision = Decision::success;
            v.decided_at_stage = 1;
            v.reason = tri.parsed["reason"].get<std::string>();
            return finish(v);
        }

        // Stage 2: describe every step, then judge the text plus the final screens.
        std::vector<JudgeExchange> descs = describe_steps();
        std::vector<std::pair<int, json>> described;
        for (auto& d : descs) {
            v.exchanges.push_back(d);
            if (d.parsed.is_null()) return error(v, 2, "step descriptor", d);
            described.emplace_back(*d.step_index, d.parsed);
        }
        formatted_steps_ = format_steps(described);

        JudgeExchange sem = call(JudgeRole::semantic,
                                 {{"task_description", task_.description}, {"formatted_steps", formatted_steps_}},
                                 {&last_n});
        v.exchanges.push_back(sem);
        if (sem.parsed.is_null()) return error(v, 2, "semantic", sem);
        const int sd = sem.parsed["decision"].get<int>();
        v.reason = sem.parsed["reason"].get<std::string>();
        if (sd != -1) {
            v.decision = sd == 1 ? Decision::success : Decision::failure;
            v.decided_at_stage = 2;
            return finish(v);
        }

        // Stage 3: only the screenshots the semantic judge asked for.
        std::vector<int> valid;
        for (const auto& s : sem.parsed["required_steps"]) {
            const int idx = s.get<int>();
            auto it = std::find_if(attempt_.steps.begin(), attempt_.steps.end(),
                                   [&](const StepRecord& r) { return r.step_index == idx; });
            if (it == attempt_.steps.end() || it->screenshot_before.empty())
                v.warnings.push_back("ignoring requested step " + std::to_string(idx) + " (not in attempt)");
            else
                valid.push_back(idx);
        }
        if (valid.empty()) {
            v.decision = Decision::evaluation_error;
            v.decided_at_stage = 3;
            v.reason = "visual judge: none of the requested steps exist";
            return finish(v);
        }
        const CompositeImage requested = compose_requested(attempt_, valid);
        JudgeExchange vis = call(JudgeRole::visual,
                                 {{"task_description", task_.description}, {"formatted_steps", formatted_steps_}},
                                 {&requested});
        v.exchanges.push_back(vis);
        if (vis.parsed.is_null()) return error(v, 3, "visual", vis);
        v.decision = vis.parsed["decision"].get<int>() == 1 ? Decision::success : Decision::failure;
        v.decided_at_stage = 3;
        v.reason = vis.parsed["reason"].get<std::string>();
        return finish(v);
    }

private:
    std::vector<JudgeExchange> describe_steps() const {
        const std::size_t n = attempt_.steps.size();
        std::vector<JudgeExchange> out(n);
        auto one = [&](std::size_t i) {
            const StepRecord& step = attempt_.steps[i];
            const CompositeImage panel = compose_before_after(step);
            out[i] = call(JudgeRole::step_descriptor,
                          {{"task_description", task_.description},
                           {"log_action", std::string(to_string(step.action_kind))},
                           {"log_detail", step.action_detail}},
                          {&panel}, step.step_index);
        };
        const std::size_t width = static_cast<std::size_t>(std::max(1, options_.descriptor_concurrency));
        if (width == 1) {
            for (std::size_t i = 0; i < n; ++i) one(i);
            return out;
        }
        for (std::size_t base = 0; base < n; base += width) {
            std::vector<std::future<void>> batch;
            for (std::size_t i = base; i < std::min(n, base + width); ++i)
                batch.push_back(std::async(std::launch::async, one, i));
            for (auto& f : batch) f.get();
        }
        return out;
    }

    Verdict& error(Verdict& v, int stage, const std::string& what, const JudgeExchange& ex) {
        v.decision = Decision::evaluation_error;
        v.decided_at_stage = stage;
        v.reason = what + ": " + (ex.error.empty() ? std::string("no usable reply") : ex.error);
        return finish(v);
    }

    Verdict& finish(Verdict& v) {
        if (v.decision == Decision::success) {
            v.irr = compute_irr(task_, v.decision, nullptr);
        } else if (task_.memory_intensive) {
            if (v.decision == Decision::failure && formatted_steps_.empty()) formatted_steps_ = describe_from_log();
            if (v.decision == Decision::failure) {
                JudgeExchange an = call(JudgeRole::irr_analyzer,
                                        {{"task_description", task_.description},
                                         {"failure_reason", v.reason},
                                         {"steps_text", formatted_steps_}},
                                        {});
                v.exchanges.push_back(an);
                v.irr = compute_irr(task_, v.decision, an.parsed.is_null() ? nullptr : &an.parsed);
                if (an.parsed.is_null()) v.irr->analysis_reason = "analyzer failed: " + an.error;
            } else {
                v.irr = compute_irr(task_, Decision::failure, nullptr);
            }
        }
        return v;
    }

    // Fallback step text when no step descriptions exist (failures decided
    // before Stage 2 ran, e.g. budget overrides).
    std::string describe_from_log() const {
        std::ostringstream os;
        bool first = true;
        for (const auto& s : attempt_.steps) {
            if (!first) os << '\n';
            first = false;
            os << "Step " << s.step_index << ": " << to_string(s.action_kind) << ' ' << s.action_detail;
        }
        return os.str();
    }

    const TaskSpec& task_;
    const AttemptRecord& attempt_;
    JudgeBackend& backend_;
    const TemplateStore& templates_;
    const JudgeOptions& options_;
    std::string formatted_steps_;
};

json exchange_to_json(const JudgeExchange& ex) {
    json images = json::array();
    for (const auto& i : ex.images)
        images.push_back({{"layout", std::string(to_string(i.layout))},
                          {"member_steps", i.member_steps},
                          {"width", i.width},
                          {"height", i.height}});
    json j = {{"role", std::string(to_string(ex.role))},
              {"system_text", ex.system_text},
              {"user_text", ex.user_text},
              {"images", images},
              {"raw_reply", ex.raw_reply},
              {"parsed", ex.parsed},
              {"transport_attempts", ex.transport_attempts},
              {"reasks", ex.reasks},
              {"tokens_in", ex.tokens_in},
              {"tokens_out", ex.tokens_out},
              {"cost", ex.cost}};
    if (ex.step_index) j["step_index"] = *ex.step_index;
    if (!ex.error.empty()) j["error"] = ex.error;
    return j;
}

CompositeLayout layout_from_string(const std::string& s) {
    for (auto l : {CompositeLayout::last_n_strip, CompositeLayout::before_after_panel, CompositeLayout::requested_strip})
        if (to_string(l) == s) return l;
    throw ParseError("unknown composite layout '" + s + "'");
}

JudgeExchange exchange_from_json(const json& j) {
    JudgeExchange ex;
    ex.role = judge_role_from_string(j.at("role").get<std::string>());
    if (j.contains("step_index")) ex.step_index = j["step_index"].get<int>();
    ex.system_text = j.value("system_text", std::string{});
    ex.user_text = j.value("user_text", std::string{});
    for (const auto& i : j.value("images", json::array()))
        ex.images.push_back({layout_from_string(i.at("layout").get<std::string>()),
                             i.at("member_steps").get<std::vector<int>>(), i.value("width", 0), i.value("height", 0)});
    ex.raw_reply = j.value("raw_reply", std::string{});
    ex.parsed = j.value("parsed", json());
    ex.transport_attempts = j.value("transport_attempts", 0);
    ex.reasks = j.value("reasks", 0);
    ex.tokens_in = j.value("tokens_in", std::int64_t{0});
    ex.tokens_out = j.value("tokens_out", std::int64_t{0});
    ex.cost = j.value("cost", 0.0);
    ex.error = j.value("error", std::string{});
    return ex;
}

}  // namespace

JudgeExchange run_exchange(JudgeRole role, const Bindings& bindings, const std::vector<const CompositeImage*>& images,
                           const RequestContext& context, JudgeBackend& backend, const TemplateStore& templates,
                           const JudgeOptions& options) {
    const RenderedPrompt prompt = templates.render(role, bindings);
    JudgeExchange ex;
    ex.role = role;
    ex.step_index = context.step_index;
    ex.system_text = prompt.system_text;
    ex.user_text = prompt.user_text;
    for (const CompositeImage* img : images) ex.images.push_back(summarize(*img));

    JudgeRequest req{role, prompt.system_text, prompt.user_text, images, context};
    for (int ask = 0; ask < 2; ++ask) {
        if (ask == 1) {
            req.user_text += reask_suffix;
            ex.reasks = 1;
        }
        std::optional<JudgeResponse> resp;
        const int max_tries = std::max(1, options.transport_attempts);
        for (int t = 0; t < max_tries && !resp; ++t) {
            ++ex.transport_attempts;
            try {
                resp = backend.complete(req);
            } catch (const BackendError& e) {
                ex.error = e.what();
                if (t + 1 < max_tries && options.backoff_base.count() > 0)
                    std::this_thread::sleep_for(options.backoff_base * (1 << t));
            }
        }
        if (!resp) return ex;
        ex.raw_reply = resp->text;
        ex.tokens_in += resp->tokens_in;
        ex.tokens_out += resp->tokens_out;
        ex.cost += resp->cost;
        try {
            ex.parsed = extract_reply(role, resp->text);
            ex.error.clear();
            return ex;
        } catch (const SchemaError& e) {
            ex.error = e.what();
        }
    }
    return ex;
}

std::string_view to_string(Decision d) {
    for (const auto& [k, n] : decision_names)
        if (k == d) return n;
    return "failure";
}

Decision decision_from_string(std::string_view s) {
    for (const auto& [k, n] : decision_names)
        if (n == s) return k;
    throw ParseError("unknown decision '" + std::string(s) + "'");
}

std::string_view to_string(FailureMode m) {
    for (const auto& [k, n] : mode_names)
        if (k == m) return n;
    return "Other";
}

FailureMode failure_mode_from_string(std::string_view s) {
    for (const auto& [k, n] : mode_names)
        if (n == s) return k;
    throw ParseError("unknown failure mode '" + std::string(s) + "'");
}

std::string_view to_string(LabelBasis b) { return b == LabelBasis::mechanical ? "mechanical" : "judge_assisted"; }

int irr_percentage(int correct, int total) {
    if (total <= 0) return 0;
    // round half up of 100*C/T
    return static_cast<int>((200LL * correct + total) / (2LL * total));
}

IrrResult compute_irr(const TaskSpec& task, Decision decision, const json* analyzer_reply) {
    IrrResult r;
    if (decision == Decision::success) {
        r.total_information_units = task.total_information_units.value_or(0);
        r.correctly_used_units = r.total_information_units;
        r.percentage = 100;
        r.analysis_reason = "task succeeded; all required information processed";
        return r;
    }
    if (!analyzer_reply) {
        r.total_information_units = task.total_information_units.value_or(0);
        r.evaluation_error = true;
        r.analysis_reason = "no analyzer result";
        return r;
    }
    const json& a = *analyzer_reply;
    const int t_a = a.at("total_information_units").get<int>();
    int c = a.at("correctly_used_units").get<int>();
    r.analysis_reason = a.value("analysis_reason", std::string{});
    // The analyzer reports 0% for implicit-decision and early failures even
    // when it counted some units; keep its call.
    if (a.at("irr_percentage").get<double>() == 0) c = 0;
    if (task.total_information_units) {
        r.total_information_units = *task.total_information_units;
        r.correctly_used_units = std::min(c, r.total_information_units);
    } else if (c > t_a) {
        r.total_information_units = t_a;
        r.correctly_used_units = 0;
        r.evaluation_error = true;
        r.analysis_reason = "analyzer reported more correct units than required (" + std::to_string(c) + " > " +
                            std::to_string(t_a) + ")";
        return r;
    } else {
        r.total_information_units = t_a;
        r.correctly_used_units = c;
    }
    r.percentage = irr_percentage(r.correctly_used_units, r.total_information_units);
    return r;
}

std::string format_steps(const std::vector<std::pair<int, json>>& descriptions) {
    auto sorted = descriptions;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out;
    for (const auto& [idx, d] : sorted) {
        if (!out.empty()) out += '\n';
        out += "Step " + std::to_string(idx) + ": " + d.at("action_description").get<std::string>() +
               " | UI: " + d.at("ui_description").get<std::string>();
    }
    return out;
}

std::string format_action_log(const AttemptRecord& attempt) {
    std::string out;
    for (const auto& s : attempt.steps) {
        if (!out.empty()) out += '\n';
        out += "Step " + std::to_string(s.step_index) + ": " + std::string(to_string(s.action_kind));
        if (!s.action_detail.empty()) out += " " + s.action_detail;
        if (s.touch_point) out += " at (" + std::to_string(s.touch_point->x) + ", " + std::to_string(s.touch_point->y) + ")";
    }
    return out;
}

Verdict evaluate_attempt(const TaskSpec& task, const AttemptRecord& attempt, JudgeBackend& backend,
                         const TemplateStore& templates, const JudgeOptions& options) {
    return Pipeline(task, attempt, backend, templates, options).run();
}

json to_json(const Verdict& v) {
    json j = {{"decision", std::string(to_string(v.decision))},
              {"decided_at_stage", v.decided_at_stage},
              {"reason", v.reason},
              {"budget_override", v.budget_override}};
    if (v.irr) {
        j["irr"] = {{"total_information_units", v.irr->total_information_units},
                    {"correctly_used_units", v.irr->correctly_used_units},
                    {"percentage", v.irr->percentage},
                    {"analysis_reason", v.irr->analysis_reason},
                    {"evaluation_error", v.irr->evaluation_error}};
    }
    if (v.label) {
        j["label"] = {{"mode", std::string(to_string(v.label->mode))},
                      {"basis", std::string(to_string(v.label->basis))},
                      {"rationale", v.label->rationale}};
    }
    j["warnings"] = v.warnings;
    j["exchanges"] = json::array();
    for (const auto& ex : v.exchanges) j["exchanges"].push_back(exchange_to_json(ex));
    return j;
}

Verdict verdict_from_json(const json& j) {
    Verdict v;
    try {
        v.decision = decision_from_string(j.at("decision").get<std::string>());
        v.decided_at_stage = j.at("decided_at_stage").get<int>();
        v.reason = j.value("reason", std::string{});
        v.budget_override = j.value("budget_override", false);
        if (j.contains("irr")) {
            const json& i = j["irr"];
            v.irr = IrrResult{i.at("total_information_units").get<int>(), i.at("correctly_used_units").get<int>(),
                              i.at("percentage").get<int>(), i.value("analysis_reason", std::string{}),
                              i.value("evaluation_error", false)};
        }
        if (j.contains("label")) {
            const json& l = j["label"];
            v.label = FailureLabel{failure_mode_from_string(l.at("mode").get<std::string>()),
                                   l.at("basis") == "mechanical" ? LabelBasis::mechanical : LabelBasis::judge_assisted,
                                   l.value("rationale", std::string{})};
        }
        v.warnings = j.value("warnings", std::vector<std::string>{});
        for (const auto& ex : j.value("exchanges", json::array())) v.exchanges.push_back(exchange_from_json(ex));
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad verdict record: ") + e.what());
    }
    return v;
}

}  // namespace membench
