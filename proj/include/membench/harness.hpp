#pragma once

#include "membench/backend.hpp"
#include "membench/budget.hpp"
#include "membench/environment.hpp"
#include "membench/judge.hpp"
#include "membench/run.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace membench {

/// Milliseconds since an arbitrary origin.
using Clock = std::function<std::int64_t()>;
/// Produces the clock used for one attempt. Tests inject fake clocks so timing
/// fields are reproducible.
using ClockFactory = std::function<Clock(const AttemptKey&)>;

ClockFactory steady_clock_factory();
/// Each reading advances by `tick_ms`, starting from 0 for every attempt.
ClockFactory fake_clock_factory(std::int64_t tick_ms);

struct RunOptions {
    BudgetPolicy budget;
    int workers = 1;
    std::string image_id = "default";
    std::string run_id = "run";
    std::string agent_name;
    std::string judge_name;
    std::uint64_t seed = 0;
    // Trace-store root (runs/<run_id>); no files are written when empty.
    std::filesystem::path run_dir;
    ClockFactory clock;
    JudgeOptions judge_options;
    // Optional failure-mode classifier for IRR = 0 failures.
    std::shared_ptr<JudgeBackend> classifier;
    // Safety net for unlimited budgets.
    int hard_step_cap = 1000;
};

/// Groups of suite indices executed back to back on one worker: a task and its
/// mirror partner form one unit, in suite order.
std::vector<std::vector<std::size_t>> schedule_units(const Suite& suite);

/// Executes every task for up to k attempts (stopping at the first judged
/// success), restoring the environment snapshot before each attempt.
RunResult run_benchmark(const Suite& suite, AgentEndpoint& agent, EnvironmentFactory& environments,
                        JudgeBackend& judge, const RunOptions& options);

/// Judges one recorded attempt the way run_benchmark does: harness errors are
/// not sent to the judge, budget stops are forced to failure, failures get a
/// failure-mode label.
Verdict judge_attempt(const TaskSpec& task, const AttemptRecord& attempt, JudgeBackend& judge,
                      const JudgeOptions& options, JudgeBackend* classifier);

/// Re-judges every stored attempt of a run without touching trajectories.
RunResult reevaluate_run(const RunResult& run, JudgeBackend& judge, const JudgeOptions& options,
                         JudgeBackend* classifier = nullptr);

}  // namespace membench
