#include "membench/budget.hpp"
#include "membench/error.hpp"
#include "membench/run.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace membench;
using membench::testing::make_attempt;
using membench::testing::make_task;

TEST(Budget, ReferenceConstants) {
    EXPECT_EQ(max_rounds(10), 15);
    EXPECT_EQ(max_tokens(10), 95070);
    EXPECT_EQ(max_rounds(1), 2);
    EXPECT_EQ(max_rounds(5), 8);
}

TEST(BudgetProperty, MaxRoundsMatchesFloorFormula) {
    for (int g = 1; g <= 1000; ++g) {
        // Independent oracle in floating point with a guard for exact multiples.
        const int oracle = static_cast<int>(std::floor(g * 1.4 + 1 + 1e-9));
        ASSERT_EQ(max_rounds(g), oracle) << g;
        ASSERT_EQ(max_tokens(g), static_cast<std::int64_t>(g) * 9507);
    }
}

TEST(Budget, StepLimitIsStrict) {
    const TaskSpec t = make_task("t", 10);
    BudgetPolicy b;
    EXPECT_FALSE(enforce_budget(t, make_attempt("t", 15), b));
    EXPECT_EQ(enforce_budget(t, make_attempt("t", 16), b), Termination::step_limit_exceeded);
    b.mode = BudgetMode::unlimited;
    EXPECT_FALSE(enforce_budget(t, make_attempt("t", 500), b));
}

TEST(Budget, TokenLimitIsStrict) {
    const TaskSpec t = make_task("t", 1);
    BudgetPolicy b{BudgetMode::tokens_per_episode, 3, 220};
    AttemptRecord a = make_attempt("t", 2);  // 2 x 110 tokens
    EXPECT_FALSE(enforce_budget(t, a, b));
    a.steps[1].tokens->out += 1;
    a.recompute_totals();
    EXPECT_EQ(enforce_budget(t, a, b), Termination::token_budget_exceeded);
    EXPECT_EQ(budget_violation(t, a, b), Termination::token_budget_exceeded);
}

TEST(Budget, ModeNames) {
    EXPECT_EQ(budget_mode_from_string("steps"), BudgetMode::steps_per_episode);
    EXPECT_EQ(budget_mode_from_string("tokens"), BudgetMode::tokens_per_episode);
    EXPECT_EQ(budget_mode_from_string("unlimited"), BudgetMode::unlimited);
    EXPECT_ANY_THROW(budget_mode_from_string("minutes"));
}

TEST(Budget, BudgetStopOverridesSuccessAndZeroesIrr) {
    const TaskSpec t = make_task("t", 3, true, 4);
    Verdict v;
    v.decision = Decision::success;
    v.decided_at_stage = 1;
    v.reason = "looks done";
    v.irr = IrrResult{4, 4, 100, "", false};
    apply_budget_stop(t, Termination::token_budget_exceeded, v);
    EXPECT_EQ(v.decision, Decision::failure);
    EXPECT_TRUE(v.budget_override);
    ASSERT_TRUE(v.irr);
    EXPECT_EQ(v.irr->percentage, 0);
    EXPECT_EQ(v.irr->correctly_used_units, 0);
    ASSERT_TRUE(v.label);
    EXPECT_EQ(v.label->mode, FailureMode::ExecutionTimeout);
}

TEST(Budget, ReprocessUnlimitedIsIdentityAndTokensNeedAccounting) {
    RunResult run;
    run.suite.tasks = {make_task("t", 2)};
    AttemptResult ar{make_attempt("t", 2), {}};
    ar.verdict.decision = Decision::success;
    run.tasks = {{"t", {ar}}};
    const RunResult same = reprocess_with_budget(run, {BudgetMode::unlimited, 3, 9507});
    EXPECT_TRUE(same.tasks[0].attempts[0].verdict.is_success());

    run.tasks[0].attempts[0].attempt.steps[0].tokens.reset();
    EXPECT_THROW(reprocess_with_budget(run, {BudgetMode::tokens_per_episode, 3, 9507}), ValidationError);
}
