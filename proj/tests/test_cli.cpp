#include "membench/commands.hpp"
#include "membench/error.hpp"
#include "membench/util.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace membench;
using membench::testing::fixtures_dir;
using membench::testing::TempDir;

namespace {

cli::RunConfig config(const TempDir& dir, const std::string& agent) {
    cli::RunConfig c;
    c.suite = (fixtures_dir() / "suite.jsonl").string();
    c.agent = agent;
    c.judge = "mock:fixture";
    c.out = dir.path.string();
    c.run_id = "r";
    c.seed = 3;
    return c;
}

}  // namespace

TEST(Cli, ValidateAndStats) {
    std::ostringstream out;
    EXPECT_EQ(cli::cmd_validate((fixtures_dir() / "suite.jsonl").string(), ReportFormat::txt, out), 0);
    EXPECT_EQ(out.str(), "ok: suite 'fixture-6' with 6 tasks\n");
    std::ostringstream stats;
    cli::cmd_stats((fixtures_dir() / "suite.jsonl").string(), ReportFormat::csv, stats);
    EXPECT_NE(stats.str().find("difficulty,Easy,2,33.3"), std::string::npos) << stats.str();
    EXPECT_THROW(cli::cmd_validate("/nonexistent.jsonl", ReportFormat::txt, out), ParseError);
}

TEST(Cli, RunWritesStoreAndReports) {
    TempDir dir("cli");
    std::ostringstream out;
    EXPECT_EQ(cli::cmd_run(config(dir, "simkit:scripted_retry"), out), 0);
    const auto run = dir.path / "r";
    for (const char* f : {"run.json", "suite.jsonl", "world.json", "reports/leaderboard.csv", "reports/failures.json",
                          "notes-copy-01/attempt_2/verdict", "notes-copy-01/attempt_1/steps/0_before.png"})
        EXPECT_TRUE(std::filesystem::exists(run / f)) << f;
    EXPECT_NE(out.str().find("simkit:scripted_retry"), std::string::npos);
    // Refuses to overwrite.
    EXPECT_THROW(cli::cmd_run(config(dir, "simkit:scripted_retry"), out), Error);
}

TEST(Cli, RunRejectsBadConfiguration) {
    TempDir dir("cli");
    std::ostringstream out;
    auto c = config(dir, "simkit:scripted_ok");
    c.env = "android";
    EXPECT_THROW(cli::cmd_run(c, out), Error);
    c = config(dir, "robot");
    EXPECT_THROW(cli::cmd_run(c, out), Error);
    c = config(dir, "simkit:scripted_ok");
    c.judge = "/no/such/profile.json";
    try {
        cli::cmd_run(c, out);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("judge profile not found"), std::string::npos) << e.what();
    }
    c = config(dir, "simkit:scripted_ok");
    c.k = 0;
    EXPECT_THROW(cli::cmd_run(c, out), Error);
}

TEST(Cli, EvaluateReprocessScoreReport) {
    TempDir dir("cli");
    std::ostringstream out;
    cli::cmd_run(config(dir, "simkit:scripted_retry"), out);
    const auto run = (dir.path / "r").string();
    const std::string before = read_text_file(dir.path / "r" / "reports" / "short_term.csv");

    std::ostringstream ev;
    EXPECT_EQ(cli::cmd_evaluate(run, "mock:fixture", "", ReportFormat::txt, ev), 0);
    EXPECT_EQ(read_text_file(dir.path / "r" / "reports" / "short_term.csv"), before);

    std::ostringstream ev2;
    cli::cmd_evaluate(run, "mock:always_success", "", ReportFormat::csv, ev2);
    EXPECT_NE(ev2.str().find("simkit:scripted_retry,100.0,100.0"), std::string::npos) << ev2.str();
    cli::cmd_evaluate(run, "mock:fixture", "", ReportFormat::csv, ev2);

    std::ostringstream rp;
    cli::cmd_reprocess(run, BudgetMode::steps_per_episode, 9507, ReportFormat::csv, rp);
    EXPECT_TRUE(std::filesystem::exists(dir.path / "r" / "reports" / "budget_steps" / "compute_normalized.txt"));
    EXPECT_NE(rp.str().find(",0.0,0.0,0.0,"), std::string::npos) << rp.str();

    const auto labels = dir.path / "labels.jsonl";
    {
        std::ofstream f(labels);
        for (const char* t : {"notes-copy-01", "notes-copy-02", "shop-compare-01", "shop-compare-02", "trip-plan-01",
                              "trip-plan-02"}) {
            f << R"({"trajectory_id":")" << t << R"(/attempt_1","label":"failure"})" << '\n';
            f << R"({"trajectory_id":")" << t << R"(/attempt_2","label":"success"})" << '\n';
        }
    }
    std::ostringstream sc;
    cli::cmd_score(run, labels.string(), ReportFormat::csv, sc);
    EXPECT_NE(sc.str().find("12,6,0,0,6,100.0,100.0,100.0"), std::string::npos) << sc.str();

    std::ostringstream rep;
    cli::cmd_report({run, run}, (dir.path / "combined").string(), ReportFormat::txt, rep);
    EXPECT_TRUE(std::filesystem::exists(dir.path / "combined" / "cross_app.json"));
}

TEST(Cli, ExternalAgentCommand) {
    TempDir dir("cli");
    std::ostringstream out;
    auto c = config(dir, std::string("cmd:") + MEMBENCH_SIMAGENT + " --suite " + (fixtures_dir() / "suite.jsonl").string() +
                             " --profile scripted_ok --seed 3");
    c.world = (fixtures_dir() / "worlds" / "retry.json").string();
    c.world.clear();
    EXPECT_EQ(cli::cmd_run(c, out), 0);
    EXPECT_NE(out.str().find("100.0"), std::string::npos) << out.str();
}

TEST(Cli, MajorityHarnessErrorsExitThree) {
    TempDir dir("cli");
    std::ostringstream out;
    EXPECT_EQ(cli::cmd_run(config(dir, "cmd:/bin/true"), out), 3);
}
