#pragma once

#include "membench/backend.hpp"
#include "membench/suite.hpp"
#include "membench/templates.hpp"
#include "membench/trace.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace membench {

/// Locates the first balanced JSON object in `raw_reply` (surrounding prose and
/// code fences are ignored) and validates it against the role's reply schema.
/// Throws SchemaError naming the role and the offending field.
nlohmann::json extract_reply(JudgeRole role, std::string_view raw_reply);

struct ImageSummary {
    CompositeLayout layout = CompositeLayout::last_n_strip;
    std::vector<int> member_steps;
    int width = 0;
    int height = 0;
    bool operator==(const ImageSummary&) const = default;
};

struct JudgeExchange {
    JudgeRole role = JudgeRole::triage;
    std::optional<int> step_index;  // step_descriptor only
    std::string system_text;
    std::string user_text;
    std::vector<ImageSummary> images;
    std::string raw_reply;
    nlohmann::json parsed;  // null when the reply never validated
    int transport_attempts = 0;
    int reasks = 0;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;
    double cost = 0.0;
    std::string error;
};

struct IrrResult {
    int total_information_units = 0;  // T
    int correctly_used_units = 0;     // C
    int percentage = 0;               // round(100*C/T), 0..100
    std::string analysis_reason;
    // Set when the analyzer failed or contradicted itself; the verdict stands.
    bool evaluation_error = false;

    bool operator==(const IrrResult&) const = default;
};

enum class Decision { success, failure, evaluation_error };

std::string_view to_string(Decision d);
Decision decision_from_string(std::string_view s);

/// Failure-mode label attached to a verdict (filled by label_failure).
enum class FailureMode { ExecutionTimeout, PMH, ProcMH, OMH, KD, IM, Other };
enum class LabelBasis { mechanical, judge_assisted };

std::string_view to_string(FailureMode m);
FailureMode failure_mode_from_string(std::string_view s);
std::string_view to_string(LabelBasis b);

struct FailureLabel {
    FailureMode mode = FailureMode::Other;
    LabelBasis basis = LabelBasis::mechanical;
    std::string rationale;
    bool operator==(const FailureLabel&) const = default;
};

struct Verdict {
    Decision decision = Decision::failure;
    // 1..3 for judged attempts; 0 when the attempt never reached the judge.
    int decided_at_stage = 0;
    std::string reason;
    std::optional<IrrResult> irr;
    std::optional<FailureLabel> label;
    std::vector<JudgeExchange> exchanges;
    // Non-fatal problems, e.g. requested steps that do not exist.
    std::vector<std::string> warnings;
    // Set when the harness overrode the judge because the attempt ran out of budget.
    bool budget_override = false;

    bool is_success() const { return decision == Decision::success; }
};

nlohmann::json to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

struct JudgeOptions {
    int transport_attempts = 3;
    std::chrono::milliseconds backoff_base{200};
    // Parallel step-descriptor calls per attempt; 1 keeps them sequential.
    int descriptor_concurrency = 1;
    // Screenshots shown to triage and semantic judges.
    int last_n = 3;
};

/// Stage-aware IRR computation.
///   success                       -> 100%
///   failure with analyzer reply   -> round(100*C/T), suite T overriding the analyzer's
///   failure with no units handled -> 0%
/// An analyzer reply with C > T (and no suite T) marks the IRR field as an
/// evaluation error.
IrrResult compute_irr(const TaskSpec& task, Decision decision, const nlohmann::json* analyzer_reply);

/// Integer percentage stored for C of T.
int irr_percentage(int correct, int total);

/// One line per step: "Step i: <action_description> | UI: <ui_description>".
std::string format_steps(const std::vector<std::pair<int, nlohmann::json>>& descriptions);

/// Raw action-log lines used by the triage prompt.
std::string format_action_log(const AttemptRecord& attempt);

/// One judge exchange: renders the role's prompt, retries transport errors
/// with exponential backoff, and re-asks once when the reply does not
/// validate. On failure `parsed` is null and `error` says why.
JudgeExchange run_exchange(JudgeRole role, const Bindings& bindings, const std::vector<const CompositeImage*>& images,
                           const RequestContext& context, JudgeBackend& backend, const TemplateStore& templates,
                           const JudgeOptions& options);

/// Runs triage, then semantic analysis over step descriptions, then targeted
/// visual verification, stopping at the first definitive decision.
Verdict evaluate_attempt(const TaskSpec& task, const AttemptRecord& attempt, JudgeBackend& backend,
                         const TemplateStore& templates = TemplateStore::builtin(),
                         const JudgeOptions& options = {});

}  // namespace membench
