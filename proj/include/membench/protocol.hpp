#pragma once

// Agent wire protocol: one JSON object per line.
//
//   harness -> agent   {"type":"task", ...}, {"type":"observation", ...}
//   agent -> harness   {"type":"action", ...}, {"type":"terminate", ...}
//
// Agents may add "tokens_in", "tokens_out" and "api_cost" to action and
// terminate messages to report their own consumption.

#include "membench/trace.hpp"

#include <optional>
#include <string>
#include <variant>

namespace membench::protocol {

enum class Outcome { success, failure };

struct TaskMessage {
    std::string task_id;
    std::string goal;
    int attempt_index = 1;
    std::optional<Outcome> previous_outcome;
    std::optional<int> step_limit;
    bool operator==(const TaskMessage&) const = default;
};

struct ObservationMessage {
    int step_index = 0;
    std::string screenshot_b64;
    std::optional<std::string> ui_tree;
    bool operator==(const ObservationMessage&) const = default;
};

struct Usage {
    std::optional<TokenCount> tokens;
    std::optional<double> api_cost;
    bool operator==(const Usage&) const = default;
};

struct ActionMessage {
    ActionKind action_kind = ActionKind::other;
    std::string action_detail;
    std::optional<Point> touch_point;
    std::optional<std::string> thought;
    Usage usage;
    bool operator==(const ActionMessage&) const = default;
};

enum class TerminateStatus { done, infeasible };

struct TerminateMessage {
    TerminateStatus status = TerminateStatus::done;
    Usage usage;
    bool operator==(const TerminateMessage&) const = default;
};

using HarnessMessage = std::variant<TaskMessage, ObservationMessage>;
using AgentMessage = std::variant<ActionMessage, TerminateMessage>;

std::string encode(const TaskMessage& m);
std::string encode(const ObservationMessage& m);
std::string encode(const ActionMessage& m);
std::string encode(const TerminateMessage& m);
std::string encode(const HarnessMessage& m);
std::string encode(const AgentMessage& m);

/// Throws ProtocolError on malformed or unexpected messages.
HarnessMessage decode_harness_message(std::string_view line);
AgentMessage decode_agent_message(std::string_view line);

}  // namespace membench::protocol
