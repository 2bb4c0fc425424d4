#include "membench/error.hpp"
#include "membench/suite.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

using namespace membench;
using membench::testing::fixtures_dir;

namespace {

Suite parse(const std::string& text) {
    std::istringstream in(text);
    return parse_suite(in, "test");
}

const std::string header = R"({"schema_version":1,"suite_id":"t"})" "\n";

}  // namespace

TEST(Suite, FixtureHasSixTasksAndThreeMirrorPairs) {
    const Suite s = load_suite(fixtures_dir() / "suite.jsonl");
    ASSERT_EQ(s.tasks.size(), 6u);
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& t : s.tasks) {
        ASSERT_TRUE(t.mirror_id);
        edges.insert(std::minmax(t.task_id, *t.mirror_id));
    }
    EXPECT_EQ(edges.size(), 3u);
    EXPECT_EQ(suite_stats(s).mirror_pairs, 3u);
}

TEST(Suite, EmptyTaskListRejected) {
    try {
        parse(header);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("suite must contain"), std::string::npos);
    }
}

TEST(Suite, AsymmetricMirrorRejected) {
    const std::string text = header +
                             R"({"task_id":"A","description":"a","apps":["x"],"golden_steps":3})" "\n"
                             R"({"task_id":"B","description":"b","apps":["x"],"golden_steps":3,"mirror_id":"A"})" "\n";
    EXPECT_THROW(parse(text), ValidationError);
}

TEST(Suite, DanglingMirrorDuplicateIdAndZeroStepsRejected) {
    EXPECT_THROW(parse(header + R"({"task_id":"A","description":"a","apps":["x"],"golden_steps":3,"mirror_id":"Z"})" "\n"),
                 ValidationError);
    EXPECT_THROW(parse(header + R"({"task_id":"A","description":"a","apps":["x"],"golden_steps":3})" "\n" +
                       R"({"task_id":"A","description":"a","apps":["x"],"golden_steps":3})" "\n"),
                 ValidationError);
    EXPECT_THROW(parse(header + R"({"task_id":"A","description":"a","apps":["x"],"golden_steps":0})" "\n"),
                 ValidationError);
    EXPECT_THROW(parse(header + R"({"task_id":"A","description":"a","apps":["a","b","c","d","e"],"golden_steps":2})" "\n"),
                 ValidationError);
}

TEST(Suite, ParseErrorCarriesLineNumber) {
    try {
        parse(header + "{not json}\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("test:2"), std::string::npos) << e.what();
    }
}

TEST(Suite, ClassifyDifficultyBoundaries) {
    EXPECT_EQ(classify_difficulty(1), Difficulty::easy);
    EXPECT_EQ(classify_difficulty(20), Difficulty::easy);
    EXPECT_EQ(classify_difficulty(21), Difficulty::medium);
    EXPECT_EQ(classify_difficulty(40), Difficulty::medium);
    EXPECT_EQ(classify_difficulty(41), Difficulty::hard);
    EXPECT_EQ(classify_difficulty(160), Difficulty::hard);
    EXPECT_THROW(classify_difficulty(0), std::invalid_argument);
}

TEST(SuiteProperty, DifficultyIsMonotoneAndPartitions) {
    Difficulty prev = Difficulty::easy;
    std::map<Difficulty, int> seen;
    for (int g = 1; g <= 500; ++g) {
        const Difficulty d = classify_difficulty(g);
        EXPECT_GE(static_cast<int>(d), static_cast<int>(prev));
        prev = d;
        ++seen[d];
    }
    EXPECT_EQ(seen[Difficulty::easy], 20);
    EXPECT_EQ(seen[Difficulty::medium], 20);
    EXPECT_EQ(seen[Difficulty::hard], 460);
}

TEST(Suite, StatsOnFixtureAreThirds) {
    const SuiteStats st = suite_stats(load_suite(fixtures_dir() / "suite.jsonl"));
    ASSERT_EQ(st.by_difficulty.size(), 3u);
    for (const auto& b : st.by_difficulty) {
        EXPECT_EQ(b.count, 2u);
        EXPECT_NEAR(b.percent, 100.0 / 3, 1e-9);
    }
}

TEST(Suite, StatsSingleTaskIsHundredPercent) {
    Suite s;
    s.tasks.push_back(membench::testing::make_task("only", 7));
    const SuiteStats st = suite_stats(s);
    ASSERT_EQ(st.by_difficulty.size(), 3u);
    EXPECT_EQ(st.by_difficulty[0].key, "Easy");
    EXPECT_DOUBLE_EQ(st.by_difficulty[0].percent, 100.0);
    EXPECT_EQ(st.by_difficulty[1].count, 0u);
    EXPECT_DOUBLE_EQ(st.by_difficulty[2].percent, 0.0);
}

TEST(Suite, ReferenceCompositionPercentages) {
    // 48 / 42 / 38 of 128 tasks.
    Suite s;
    for (int i = 0; i < 128; ++i) {
        const int g = i < 48 ? 10 : i < 90 ? 30 : 50;
        s.tasks.push_back(membench::testing::make_task("t" + std::to_string(i), g));
    }
    const SuiteStats st = suite_stats(s);
    char buf[3][16];
    for (int i = 0; i < 3; ++i) std::snprintf(buf[i], sizeof buf[i], "%.1f", st.by_difficulty[i].percent);
    EXPECT_STREQ(buf[0], "37.5");
    EXPECT_STREQ(buf[1], "32.8");
    EXPECT_STREQ(buf[2], "29.7");
}

TEST(SuiteProperty, RoundTripAndPartitionOnRandomSuites) {
    std::mt19937 rng(11);
    for (int round = 0; round < 50; ++round) {
        Suite s;
        s.suite_id = "rand" + std::to_string(round);
        const int n = 1 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) {
            TaskSpec t = membench::testing::make_task("t" + std::to_string(i), 1 + static_cast<int>(rng() % 160),
                                                      rng() % 2 == 0);
            if (t.memory_intensive && rng() % 2) t.total_information_units = 1 + static_cast<int>(rng() % 5);
            t.categories = {{"main" + std::to_string(rng() % 3), "sub"}};
            t.extra["future_field"] = static_cast<int>(rng() % 7);
            s.tasks.push_back(t);
        }
        for (int i = 0; i + 1 < n; i += 2)
            if (rng() % 2) {
                s.tasks[i].mirror_id = s.tasks[i + 1].task_id;
                s.tasks[i + 1].mirror_id = s.tasks[i].task_id;
            }
        std::ostringstream out;
        write_suite(out, s);
        const Suite back = parse(out.str());
        EXPECT_EQ(back, s);
        EXPECT_EQ(back.memory_task_count() + back.standard_task_count(), back.tasks.size());
        double total = 0;
        for (const auto& b : suite_stats(back).by_difficulty) total += b.percent;
        EXPECT_NEAR(total, 100.0, 1e-9);
    }
}
