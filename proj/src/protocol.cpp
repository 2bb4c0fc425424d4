#include "membench/protocol.hpp"

#include "membench/error.hpp"

namespace membench::protocol {

using nlohmann::json;

namespace {

void put_usage(json& j, const Usage& u) {
    if (u.tokens) {
        j["tokens_in"] = u.tokens->in;
        j["tokens_out"] = u.tokens->out;
    }
    if (u.api_cost) j["api_cost"] = *u.api_cost;
}

Usage get_usage(const json& j) {
    Usage u;
    if (j.contains("tokens_in") || j.contains("tokens_out")) {
        TokenCount t{j.value("tokens_in", std::int64_t{0}), j.value("tokens_out", std::int64_t{0})};
        if (t.in < 0 || t.out < 0) throw ProtocolError("token counts must be nonnegative");
        u.tokens = t;
    }
    if (j.contains("api_cost") && !j["api_cost"].is_null()) {
        u.api_cost = j["api_cost"].get<double>();
        if (*u.api_cost < 0) throw ProtocolError("api_cost must be nonnegative");
    }
    return u;
}

json parse_object(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("malformed message: ") + e.what());
    }
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
        throw ProtocolError("message must be an object with a string 'type'");
    }
    return j;
}

}  // namespace

std::string encode(const TaskMessage& m) {
    json j = {{"type", "task"}, {"task_id", m.task_id}, {"goal", m.goal}, {"attempt_index", m.attempt_index}};
    if (m.previous_outcome)
        j["previous_outcome"] = *m.previous_outcome == Outcome::success ? "success" : "failure";
    else
        j["previous_outcome"] = nullptr;
    j["step_limit"] = m.step_limit ? json(*m.step_limit) : json(nullptr);
    return j.dump();
}

std::string encode(const ObservationMessage& m) {
    json j = {{"type", "observation"}, {"step_index", m.step_index}, {"screenshot_b64", m.screenshot_b64}};
    if (m.ui_tree) j["ui_tree"] = *m.ui_tree;
    return j.dump();
}

std::string encode(const ActionMessage& m) {
    json j = {{"type", "action"},
              {"action_kind", std::string(to_string(m.action_kind))},
              {"action_detail", m.action_detail}};
    if (m.touch_point) j["touch_point"] = {m.touch_point->x, m.touch_point->y};
    if (m.thought) j["thought"] = *m.thought;
    put_usage(j, m.usage);
    return j.dump();
}

std::string encode(const TerminateMessage& m) {
    json j = {{"type", "terminate"}, {"status", m.status == TerminateStatus::done ? "done" : "infeasible"}};
    put_usage(j, m.usage);
    return j.dump();
}

std::string encode(const HarnessMessage& m) {
    return std::visit([](const auto& v) { return encode(v); }, m);
}

std::string encode(const AgentMessage& m) {
    return std::visit([](const auto& v) { return encode(v); }, m);
}

HarnessMessage decode_harness_message(std::string_view line) {
    const json j = parse_object(line);
    const std::string type = j["type"].get<std::string>();
    try {
        if (type == "task") {
            TaskMessage m;
            m.task_id = j.at("task_id").get<std::string>();
            m.goal = j.at("goal").get<std::string>();
            m.attempt_index = j.at("attempt_index").get<int>();
            if (j.contains("previous_outcome") && !j["previous_outcome"].is_null()) {
                const std::string o = j["previous_outcome"].get<std::string>();
                if (o == "success")
                    m.previous_outcome = Outcome::success;
                else if (o == "failure")
                    m.previous_outcome = Outcome::failure;
                else
                    throw ProtocolError("previous_outcome must be success, failure or null");
            }
            if (j.contains("step_limit") && !j["step_limit"].is_null()) m.step_limit = j["step_limit"].get<int>();
            return m;
        }
        if (type == "observation") {
            ObservationMessage m;
            m.step_index = j.at("step_index").get<int>();
            m.screenshot_b64 = j.at("screenshot_b64").get<std::string>();
            if (j.contains("ui_tree") && j["ui_tree"].is_string()) m.ui_tree = j["ui_tree"].get<std::string>();
            return m;
        }
    } catch (const json::exception& e) {
        throw ProtocolError("bad " + type + " message: " + e.what());
    }
    throw ProtocolError("unexpected harness message type '" + type + "'");
}

AgentMessage decode_agent_message(std::string_view line) {
    const json j = parse_object(line);
    const std::string type = j["type"].get<std::string>();
    try {
        if (type == "action") {
            ActionMessage m;
            try {
                m.action_kind = action_kind_from_string(j.at("action_kind").get<std::string>());
            } catch (const ParseError& e) {
                throw ProtocolError(e.what());
            }
            if (m.action_kind == ActionKind::terminate) {
                throw ProtocolError("terminate must be sent as a terminate message");
            }
            m.action_detail = j.value("action_detail", std::string{});
            if (j.contains("touch_point") && !j["touch_point"].is_null()) {
                const auto& tp = j["touch_point"];
                if (!tp.is_array() || tp.size() != 2) throw ProtocolError("touch_point must be [x, y]");
                m.touch_point = Point{tp[0].get<int>(), tp[1].get<int>()};
            }
            if (j.contains("thought") && j["thought"].is_string()) m.thought = j["thought"].get<std::string>();
            m.usage = get_usage(j);
            return m;
        }
        if (type == "terminate") {
            TerminateMessage m;
            const std::string status = j.value("status", std::string{"done"});
            if (status == "done")
                m.status = TerminateStatus::done;
            else if (status == "infeasible")
                m.status = TerminateStatus::infeasible;
            else
                throw ProtocolError("terminate status must be done or infeasible");
            m.usage = get_usage(j);
            return m;
        }
    } catch (const json::exception& e) {
        throw ProtocolError("bad " + type + " message: " + e.what());
    }
    throw ProtocolError("unexpected agent message type '" + type + "'");
}

}  // namespace membench::protocol
