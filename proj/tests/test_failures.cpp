#include "membench/backend.hpp"
#include "membench/failures.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace membench;
using membench::testing::make_attempt;
using membench::testing::make_task;
using membench::testing::reply;

namespace {

Verdict failed(std::optional<IrrResult> irr = std::nullopt) {
    Verdict v;
    v.decision = Decision::failure;
    v.decided_at_stage = 2;
    v.reason = "wrong output";
    v.irr = irr;
    return v;
}

IrrResult irr(int t, int c) { return {t, c, irr_percentage(c, t), "r", false}; }

JudgeOptions fast() {
    JudgeOptions o;
    o.backoff_base = std::chrono::milliseconds(0);
    return o;
}

ReplayBackend classifier_says(const std::string& label) {
    return ReplayBackend({reply(JudgeRole::failure_classifier, {{"label", label}, {"reason", "because"}})});
}

}  // namespace

TEST(FailureLabel, BudgetStopIsTimeout) {
    AttemptRecord a = make_attempt("t", 3);
    a.termination = Termination::step_limit_exceeded;
    EXPECT_EQ(label_failure(make_task("t", 1), a, failed()).mode, FailureMode::ExecutionTimeout);
    a.termination = Termination::token_budget_exceeded;
    Verdict v = failed();
    v.decision = Decision::success;  // budget stop beats a judge success
    EXPECT_EQ(label_failure(make_task("t", 1), a, v).mode, FailureMode::ExecutionTimeout);
}

TEST(FailureLabel, PartialIrrIsPmh) {
    const FailureLabel l = label_failure(make_task("m", 5, true), make_attempt("m", 3), failed(irr(3, 2)));
    EXPECT_EQ(l.mode, FailureMode::PMH);
    EXPECT_EQ(l.basis, LabelBasis::mechanical);
}

TEST(FailureLabel, SuccessInBudgetThrows) {
    Verdict v = failed();
    v.decision = Decision::success;
    EXPECT_THROW(label_failure(make_task("t", 5), make_attempt("t", 3), v), std::invalid_argument);
}

TEST(FailureLabel, NoClassifierIsOther) {
    EXPECT_EQ(label_failure(make_task("m", 5, true), make_attempt("m", 3), failed(irr(3, 0))).mode, FailureMode::Other);
}

TEST(FailureLabel, ClassifierLabelsKeptOnlyWhenIrrIsZero) {
    auto b = classifier_says("ProcMH");
    const FailureLabel l = label_failure(make_task("m", 5, true), make_attempt("m", 3), failed(irr(3, 0)), &b,
                                         TemplateStore::builtin(), fast());
    EXPECT_EQ(l.mode, FailureMode::ProcMH);
    EXPECT_EQ(l.basis, LabelBasis::judge_assisted);

    // IRR 100 on a failed attempt (all units used, goal missed) cannot be a memory-loss mode.
    auto o = classifier_says("OMH");
    EXPECT_EQ(label_failure(make_task("m", 5, true), make_attempt("m", 3), failed(irr(3, 3)), &o,
                            TemplateStore::builtin(), fast())
                  .mode,
              FailureMode::Other);

    auto kd = classifier_says("KD");
    EXPECT_EQ(label_failure(make_task("m", 5, true), make_attempt("m", 3), failed(irr(3, 3)), &kd,
                            TemplateStore::builtin(), fast())
                  .mode,
              FailureMode::KD);
}

TEST(FailureLabel, ClassifierPromptGetsIrrSummary) {
    auto b = classifier_says("IM");
    label_failure(make_task("m", 5, true), make_attempt("m", 3), failed(irr(4, 0)), &b, TemplateStore::builtin(), fast());
    ASSERT_EQ(b.requests().size(), 1u);
    EXPECT_NE(b.requests()[0].user_text.find("0% (0 of 4 units)"), std::string::npos);
}

TEST(FailureLabel, MechanicalErrorsAreOther) {
    AttemptRecord a = make_attempt("t", 2);
    a.termination = Termination::harness_error;
    a.error = "agent hung up";
    auto b = classifier_says("KD");
    EXPECT_EQ(label_failure(make_task("t", 5), a, failed(), &b).mode, FailureMode::Other);
    Verdict e = failed();
    e.decision = Decision::evaluation_error;
    EXPECT_EQ(label_failure(make_task("t", 5), make_attempt("t", 2), e, &b).basis, LabelBasis::mechanical);
    EXPECT_EQ(b.call_count(), 0u);
}

TEST(Heatmap, PercentagesOverNonTimeoutFailures) {
    const std::vector<FailureLabel> labels{{FailureMode::ExecutionTimeout}, {FailureMode::PMH}, {FailureMode::PMH},
                                           {FailureMode::OMH},              {FailureMode::KD}};
    const auto rows = aggregate_failures({{"b-agent", labels}, {"a-agent", {}}});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].agent, "a-agent");
    const HeatmapRow& r = rows[1];
    EXPECT_EQ(r.failures, 5u);
    EXPECT_EQ(r.timeouts, 1u);
    EXPECT_EQ(r.timeout_rate, 20);
    EXPECT_EQ(r.mode_percent.at(FailureMode::PMH), 50);
    EXPECT_EQ(r.mode_percent.at(FailureMode::OMH), 25);
    EXPECT_EQ(r.mode_percent.at(FailureMode::ProcMH), 0);
    Rational total = 0;
    for (const auto& [m, p] : r.mode_percent) total += p;
    EXPECT_EQ(total, 100);
}
