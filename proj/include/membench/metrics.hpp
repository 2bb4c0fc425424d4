#pragma once

#include "membench/suite.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace membench {

using Rational = boost::multiprecision::cpp_rational;

struct RunResult;

struct AttemptOutcome {
    bool success = false;
    // Exact C/T; absent when the attempt carries no IRR.
    std::optional<Rational> irr;
    int agent_steps = 0;
    int golden_steps = 1;
    std::int64_t time_ms = 0;
    std::int64_t tokens = 0;
    std::optional<Rational> cost;
};

struct TaskOutcome {
    std::string task_id;
    bool memory_intensive = false;
    Difficulty difficulty = Difficulty::easy;
    int app_count = 1;
    std::vector<AttemptOutcome> attempts;

    /// Least 1-based attempt index with a success, if any.
    std::optional<int> first_success_attempt() const;
};

/// One TaskOutcome per suite task, built from verdicts (IRR as exact C/T).
std::vector<TaskOutcome> outcomes_from_run(const RunResult& run);

/// 100 * S_k / N. Throws std::invalid_argument for an empty set.
Rational pass_at_k_sr(const std::vector<TaskOutcome>& outcomes, int k);

/// Mean attempt-1 IRR over memory-intensive tasks, as a percentage. Tasks
/// whose first attempt has no IRR are skipped. Throws std::invalid_argument
/// when no memory task qualifies.
Rational irr_mean(const std::vector<TaskOutcome>& outcomes);

/// SR_m / SR_s on attempt-1 success; absent when SR_s = 0. Throws
/// std::invalid_argument when either subset is empty.
std::optional<Rational> mtpr(const std::vector<TaskOutcome>& outcomes);

struct FrrResult {
    std::size_t first_attempt_failures = 0;  // N_f
    std::vector<std::size_t> recoveries;     // recoveries[i] = R_i for i in 2..k (indices 0,1 unused)
    std::optional<Rational> frr;              // percent; absent when N_f = 0
};

/// 100 * (1/N_f) * sum_{i=2..k} R_i / (i-1). Throws std::invalid_argument for k < 2.
FrrResult frr(const std::vector<TaskOutcome>& outcomes, int k);

struct Efficiency {
    std::optional<Rational> step_ratio;         // r-bar over successful tasks
    std::optional<Rational> seconds_per_step;   // tau-bar over all attempts with A > 0
    std::optional<Rational> cost_per_step;      // c-bar; absent if any cost is unrecorded
};

Efficiency efficiency_means(const std::vector<TaskOutcome>& outcomes);

struct MetricsSummary {
    int k = 3;
    std::size_t tasks = 0;
    Rational sr_at_1 = 0;
    Rational sr_at_k = 0;
    std::map<Difficulty, Rational> sr_at_1_by_difficulty;
    std::map<Difficulty, Rational> sr_at_k_by_difficulty;
    std::map<int, Rational> sr_at_1_by_app_count;
    std::map<int, Rational> sr_at_k_by_app_count;
    std::optional<Rational> irr;   // absent without memory tasks
    std::optional<Rational> mtpr;
    FrrResult frr;                 // frr.frr absent when k < 2 or N_f = 0
    Efficiency efficiency;
};

MetricsSummary summarize(const std::vector<TaskOutcome>& outcomes, int k);

/// Decimal rendering with round-half-up (away from zero) at `decimals` places.
std::string format_fixed(const Rational& value, int decimals);
inline std::string format_percent(const Rational& v) { return format_fixed(v, 1); }
inline std::string format_ratio(const Rational& v) { return format_fixed(v, 2); }
Rational to_rational(double v);

// ---- evaluator validation ----

struct EvaluatorScore {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::optional<Rational> precision;  // percent; absent when TP + FP = 0
    std::optional<Rational> recall;     // percent; absent when TP + FN = 0
    std::optional<Rational> f1;         // percent
    Rational mean_cost = 0;             // judge cost per trajectory
};

struct JudgedTrajectory {
    bool predicted_success = false;
    double judge_cost = 0.0;
};

/// Success is the positive class. Throws std::invalid_argument when the id
/// sets differ.
EvaluatorScore score_evaluator(const std::map<std::string, JudgedTrajectory>& verdicts,
                               const std::map<std::string, bool>& human_labels);

/// Score straight from confusion counts.
EvaluatorScore score_confusion(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn = 0);

/// Labels file: one {"trajectory_id": "<task>/attempt_<n>", "label": "success"|"failure"} per line.
std::map<std::string, bool> load_labels(const std::string& path);

/// Trajectory ids and predictions for every attempt in a run.
std::map<std::string, JudgedTrajectory> judged_trajectories(const RunResult& run);

}  // namespace membench
