#include "membench/error.hpp"
#include "membench/protocol.hpp"

#include <gtest/gtest.h>

using namespace membench;
using namespace membench::protocol;

TEST(Protocol, HarnessMessagesRoundTrip) {
    const TaskMessage t{"task-1", "do things", 2, Outcome::failure, 15};
    EXPECT_EQ(std::get<TaskMessage>(decode_harness_message(encode(t))), t);
    const TaskMessage plain{"task-1", "g", 1, std::nullopt, std::nullopt};
    EXPECT_EQ(std::get<TaskMessage>(decode_harness_message(encode(plain))), plain);
    const ObservationMessage o{3, "aGVsbG8=", std::string("{\"a\":1}")};
    EXPECT_EQ(std::get<ObservationMessage>(decode_harness_message(encode(o))), o);
}

TEST(Protocol, AgentMessagesRoundTrip) {
    ActionMessage a;
    a.action_kind = ActionKind::click;
    a.action_detail = "goto S2";
    a.touch_point = Point{135, 430};
    a.thought = "next";
    a.usage = {TokenCount{1200, 150}, 0.002};
    EXPECT_EQ(std::get<ActionMessage>(decode_agent_message(encode(a))), a);
    const TerminateMessage t{TerminateStatus::infeasible, {}};
    EXPECT_EQ(std::get<TerminateMessage>(decode_agent_message(encode(t))), t);
    for (const AgentMessage& m : {AgentMessage{a}, AgentMessage{t}}) EXPECT_EQ(decode_agent_message(encode(m)), m);
}

TEST(Protocol, EncodingIsOneLine) {
    ActionMessage a;
    a.action_detail = "line1\nline2";
    EXPECT_EQ(encode(a).find('\n'), std::string::npos);
}

TEST(Protocol, MalformedMessagesRejected) {
    EXPECT_THROW(decode_agent_message("not json"), ProtocolError);
    EXPECT_THROW(decode_agent_message(R"({"type":"task","task_id":"x"})"), ProtocolError);
    EXPECT_THROW(decode_agent_message(R"({"type":"action","action_kind":"fly"})"), ProtocolError);
    EXPECT_THROW(decode_harness_message(R"({"type":"action","action_kind":"click"})"), ProtocolError);
    EXPECT_THROW(decode_harness_message(R"([1,2])"), ProtocolError);
}
