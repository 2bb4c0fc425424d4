#pragma once

#include "membench/suite.hpp"
#include "membench/trace.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace membench {

enum class BudgetMode { steps_per_episode, tokens_per_episode, unlimited };

std::string_view to_string(BudgetMode m);
BudgetMode budget_mode_from_string(std::string_view s);

inline constexpr std::int64_t default_reference_tokens_per_step = 9507;

struct BudgetPolicy {
    BudgetMode mode = BudgetMode::steps_per_episode;
    int k = 3;
    std::int64_t reference_tokens_per_step = default_reference_tokens_per_step;
    bool operator==(const BudgetPolicy&) const = default;
};

/// floor(golden_steps * 1.4 + 1), computed in integers.
int max_rounds(int golden_steps);
inline int max_rounds(const TaskSpec& task) { return max_rounds(task.golden_steps); }

/// golden_steps * reference_tokens_per_step.
std::int64_t max_tokens(int golden_steps, std::int64_t reference_tokens_per_step = default_reference_tokens_per_step);
inline std::int64_t max_tokens(const TaskSpec& task, const BudgetPolicy& b) {
    return max_tokens(task.golden_steps, b.reference_tokens_per_step);
}

/// Checks an in-progress attempt whose latest step has just been appended.
/// Returns the stop reason once the attempt is over budget (strictly more
/// steps than max_rounds, or strictly more tokens than max_tokens).
std::optional<Termination> enforce_budget(const TaskSpec& task, const AttemptRecord& attempt,
                                          const BudgetPolicy& budget);

/// Same test applied to a finished attempt's totals.
std::optional<Termination> budget_violation(const TaskSpec& task, const AttemptRecord& attempt,
                                            const BudgetPolicy& budget);

}  // namespace membench
