#include "membench/budget.hpp"

#include "membench/error.hpp"
#include "membench/run.hpp"

#include <stdexcept>

namespace membench {

std::string_view to_string(BudgetMode m) {
    switch (m) {
        case BudgetMode::steps_per_episode: return "steps";
        case BudgetMode::tokens_per_episode: return "tokens";
        case BudgetMode::unlimited: return "unlimited";
    }
    return "steps";
}

BudgetMode budget_mode_from_string(std::string_view s) {
    if (s == "steps" || s == "steps_per_episode") return BudgetMode::steps_per_episode;
    if (s == "tokens" || s == "tokens_per_episode") return BudgetMode::tokens_per_episode;
    if (s == "unlimited") return BudgetMode::unlimited;
    throw ParseError("unknown budget mode '" + std::string(s) + "' (expected steps, tokens or unlimited)");
}

int max_rounds(int golden_steps) {
    if (golden_steps < 1) throw std::invalid_argument("golden_steps must be >= 1");
    return golden_steps * 14 / 10 + 1;
}

std::int64_t max_tokens(int golden_steps, std::int64_t reference_tokens_per_step) {
    if (golden_steps < 1) throw std::invalid_argument("golden_steps must be >= 1");
    return static_cast<std::int64_t>(golden_steps) * reference_tokens_per_step;
}

std::optional<Termination> enforce_budget(const TaskSpec& task, const AttemptRecord& attempt,
                                          const BudgetPolicy& budget) {
    switch (budget.mode) {
        case BudgetMode::unlimited:
            return std::nullopt;
        case BudgetMode::steps_per_episode:
            if (static_cast<int>(attempt.steps.size()) > max_rounds(task)) return Termination::step_limit_exceeded;
            return std::nullopt;
        case BudgetMode::tokens_per_episode: {
            std::int64_t used = 0;
            for (const auto& s : attempt.steps)
                if (s.tokens) used += s.tokens->total();
            if (used > max_tokens(task, budget)) return Termination::token_budget_exceeded;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<Termination> budget_violation(const TaskSpec& task, const AttemptRecord& attempt,
                                            const BudgetPolicy& budget) {
    switch (budget.mode) {
        case BudgetMode::unlimited:
            return std::nullopt;
        case BudgetMode::steps_per_episode:
            if (attempt.agent_steps > max_rounds(task)) return Termination::step_limit_exceeded;
            return std::nullopt;
        case BudgetMode::tokens_per_episode:
            if (attempt.total_tokens > max_tokens(task, budget)) return Termination::token_budget_exceeded;
            return std::nullopt;
    }
    return std::nullopt;
}

void apply_budget_stop(const TaskSpec& task, Termination stop, Verdict& verdict) {
    if (verdict.decision == Decision::success) {
        verdict.decision = Decision::failure;
        verdict.budget_override = true;
        verdict.reason = "exceeded " + std::string(stop == Termination::token_budget_exceeded ? "token" : "step") +
                         " budget (judge: " + verdict.reason + ")";
        // A success IRR of 100% no longer applies once the attempt fails.
        if (verdict.irr) {
            verdict.irr->correctly_used_units = 0;
            verdict.irr->percentage = 0;
            verdict.irr->analysis_reason = "attempt exceeded its budget";
        }
    }
    if (stop == Termination::token_budget_exceeded) {
        IrrResult irr = verdict.irr.value_or(IrrResult{task.total_information_units.value_or(0), 0, 0, {}, false});
        irr.correctly_used_units = 0;
        irr.percentage = 0;
        irr.analysis_reason = "IRR set to 0: attempt exceeded its token budget";
        verdict.irr = irr;
    }
    verdict.label = FailureLabel{FailureMode::ExecutionTimeout, LabelBasis::mechanical,
                                 "termination " + std::string(to_string(stop))};
}

RunResult reprocess_with_budget(const RunResult& run, const BudgetPolicy& budget) {
    RunResult out = run;
    out.budget = budget;
    if (budget.mode == BudgetMode::unlimited) {
        out.budget = run.budget;
        return out;
    }
    for (auto& tr : out.tasks) {
        const TaskSpec& task = out.suite.at(tr.task_id);
        for (auto& ar : tr.attempts) {
            if (budget.mode == BudgetMode::tokens_per_episode && !ar.attempt.has_token_accounting()) {
                throw ValidationError("reprocess: attempt " + tr.task_id + "/attempt_" +
                                      std::to_string(ar.attempt.attempt_index) + " has no token accounting");
            }
            if (auto stop = budget_violation(task, ar.attempt, budget)) {
                ar.attempt.termination = *stop;
                apply_budget_stop(task, *stop, ar.verdict);
            }
        }
    }
    return out;
}

}  // namespace membench
