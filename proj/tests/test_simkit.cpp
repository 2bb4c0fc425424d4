#include "membench/error.hpp"
#include "membench/protocol.hpp"
#include "membench/simkit.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <regex>

using namespace membench;
using namespace membench::simkit;
using membench::testing::make_task;

TEST(Simkit, InformationUnitsAreDeterministicAndSized) {
    const WorldSpec w = world_from_profile("scripted_ok");
    const TaskSpec t = make_task("m", 10, true, 3);
    const auto u = information_units(t, w, 5);
    ASSERT_EQ(u.size(), 3u);
    EXPECT_EQ(u, information_units(t, w, 5));
    EXPECT_NE(u, information_units(t, w, 6));
    for (const auto& s : u) EXPECT_TRUE(std::regex_match(s, std::regex(R"(U[1-3]-[1-9][0-9]{3})"))) << s;
    EXPECT_EQ(information_units(make_task("m", 10, true), w, 5).size(), 2u);
    EXPECT_TRUE(information_units(make_task("s", 10), w, 5).empty());
}

TEST(Simkit, CorrectScriptUsesGoldenStepsIncludingTerminate) {
    const WorldSpec w = world_from_profile("scripted_ok");
    for (int g : {2, 5, 17}) {
        const TaskSpec t = make_task("m", g, true, 2);
        const auto s = agent_script(t, w, 1, 1, max_rounds(t));
        EXPECT_EQ(static_cast<int>(s.size()) + 1, g) << g;
    }
    for (int g : {1, 4}) EXPECT_EQ(static_cast<int>(agent_script(make_task("s", g), w, 1, 1, std::nullopt).size()) + 1, g);
}

TEST(Simkit, ScriptedEnvironmentFollowsScreenGraph) {
    ScriptedEnvironment env(world_from_profile("scripted_ok"), 1, "port:5554");
    env.prepare_task(make_task("t", 3));
    env.snapshot();
    const auto start = env.observe();
    env.act({ActionKind::click, "goto S1", Point{135, 430}});
    EXPECT_EQ(env.screen(), 1);
    EXPECT_THROW(env.act({ActionKind::click, "goto S3", {}}), Error);
    EXPECT_THROW(env.act({ActionKind::click, "goto S9", {}}), Error);
    env.act({ActionKind::wait, "wait 1s", {}});
    env.act({ActionKind::type_text, "hello", {}});
    EXPECT_NE(env.observe().ui_tree, start.ui_tree);
    env.restore_snapshot();
    const auto again = env.observe();
    EXPECT_EQ(again.screenshot_png, start.screenshot_png);
    EXPECT_EQ(again.ui_tree, start.ui_tree);
    const Image img = decode_png(start.screenshot_png);
    EXPECT_EQ(img.width(), 270);
    EXPECT_EQ(img.height(), 480);
}

TEST(Simkit, RendererAvoidsCompositeMarkerColours) {
    ScriptedEnvironment env(world_from_profile("scripted_ok"), 1, "k");
    env.prepare_task(make_task("t", 4, true, 2));
    for (int s = 0; s < 4; ++s) {
        const Image img = decode_png(env.observe().screenshot_png);
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x) {
                const Rgb c = img.at(x, y);
                ASSERT_FALSE(c == colors::red || c == colors::green || c == colors::divider);
            }
        env.act({ActionKind::click, "goto S" + std::to_string(s + 1), {}});
    }
}

TEST(Simkit, WorldSpecJsonRoundTrip) {
    WorldSpec w = load_world_spec(membench::testing::fixtures_dir() / "worlds" / "mixed.json");
    EXPECT_EQ(w.tasks.size(), 6u);
    EXPECT_EQ(w.script_for("task-02").success_attempt, 3);
    EXPECT_EQ(w.script_for("task-01").injection, Injection::none);
    w.tasks["x"].script = std::vector<Action>{{ActionKind::click, "goto S1", Point{1, 2}}};
    const WorldSpec back = world_from_json(to_json(w));
    EXPECT_EQ(to_json(back), to_json(w));
    EXPECT_THROW(world_from_profile("nope"), Error);
    EXPECT_THROW(world_from_json(nlohmann::json{{"screen", {{"width", 10}}}}), ValidationError);
}

TEST(Simkit, FixtureRejectsUnknownTasksAndBadScripts) {
    const Suite suite = load_suite(membench::testing::fixtures_dir() / "suite.jsonl");
    WorldSpec w;
    w.tasks["ghost"] = {};
    EXPECT_THROW(make_fixture(suite, w, {}, 1), ValidationError);
    WorldSpec bad;
    TaskScript ts;
    ts.script = std::vector<Action>{{ActionKind::click, "goto S4", {}}};
    bad.tasks["notes-copy-01"] = ts;
    try {
        make_fixture(suite, bad, {}, 1);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("unknown screen"), std::string::npos);
    }
}

TEST(Simkit, ScriptedAgentSpeaksProtocol) {
    const Suite suite = load_suite(membench::testing::fixtures_dir() / "suite.jsonl");
    ScriptedAgent agent(suite, world_from_profile("scripted_heavy"), 1);
    EXPECT_THROW(agent.handle(protocol::encode(protocol::ObservationMessage{0, "", std::nullopt})), ProtocolError);
    EXPECT_TRUE(agent.handle(protocol::encode(protocol::TaskMessage{"notes-copy-02", "g", 1, std::nullopt, 15})).empty());
    int actions = 0;
    for (int i = 0;; ++i) {
        const auto out = agent.handle(protocol::encode(protocol::ObservationMessage{i, "", std::nullopt}));
        ASSERT_EQ(out.size(), 1u);
        const auto msg = protocol::decode_agent_message(out[0]);
        if (const auto* a = std::get_if<protocol::ActionMessage>(&msg)) {
            EXPECT_EQ(a->usage.tokens->in, 41760);
            ++actions;
            continue;
        }
        break;
    }
    EXPECT_EQ(actions + 1, 10);
}

TEST(Simkit, TranscriptCoversEveryJudgedAttempt) {
    const Suite suite = load_suite(membench::testing::fixtures_dir() / "suite.jsonl");
    const auto t = fixture_transcript(suite, world_from_profile("scripted_retry"), {}, 1);
    std::size_t triage = 0, classifier = 0;
    for (const auto& e : t) {
        EXPECT_TRUE(e.task_id);
        triage += e.role == JudgeRole::triage;
        classifier += e.role == JudgeRole::failure_classifier;
    }
    EXPECT_EQ(triage, 12u);
    EXPECT_EQ(classifier, 6u);
}
