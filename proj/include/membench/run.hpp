#pragma once

#include "membench/budget.hpp"
#include "membench/judge.hpp"
#include "membench/suite.hpp"
#include "membench/trace.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace membench {

struct AttemptResult {
    AttemptRecord attempt;
    Verdict verdict;
};

struct TaskRun {
    std::string task_id;
    std::vector<AttemptResult> attempts;  // attempt_index 1..n, n <= k
};

struct RunResult {
    std::string run_id;
    std::string agent;
    std::string judge;
    BudgetPolicy budget;
    std::uint64_t seed = 0;
    Suite suite;
    std::vector<TaskRun> tasks;  // suite order
};

/// Turns an attempt that ran out of budget into a failure: a judge success is
/// overridden, token overruns get IRR 0, and the label becomes ExecutionTimeout.
void apply_budget_stop(const TaskSpec& task, Termination stop, Verdict& verdict);

/// Relabels every attempt that violates `budget` as a budget failure.
/// Identity for unlimited budgets. Throws ValidationError in tokens mode when
/// an attempt lacks token accounting.
RunResult reprocess_with_budget(const RunResult& run, const BudgetPolicy& budget);

/// runs/<run_id>/ layout: run.json, suite.jsonl, <task>/attempt_<n>/{meta,
/// actions, verdict, steps/}, reports/.
void save_run(const RunResult& run, const std::filesystem::path& run_dir, bool write_attempts = true);
/// Writes only the verdict files and run.json (trajectories untouched).
void save_verdicts(const RunResult& run, const std::filesystem::path& run_dir);
/// Throws StoreError for missing or corrupt stores.
RunResult load_run(const std::filesystem::path& run_dir);

}  // namespace membench
