#include "membench/failures.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>

namespace membench {

using boost::multiprecision::cpp_int;

namespace {

std::string irr_summary(const TaskSpec& task, const Verdict& v) {
    if (!task.memory_intensive || !v.irr) return "not measured";
    if (v.irr->evaluation_error) return "unavailable (analyzer error); treated as 0%";
    return std::to_string(v.irr->percentage) + "% (" + std::to_string(v.irr->correctly_used_units) + " of " +
           std::to_string(v.irr->total_information_units) + " units)";
}

std::string steps_text(const AttemptRecord& attempt, const Verdict& v) {
    std::vector<std::pair<int, nlohmann::json>> described;
    for (const auto& ex : v.exchanges)
        if (ex.role == JudgeRole::step_descriptor && ex.step_index && !ex.parsed.is_null())
            described.emplace_back(*ex.step_index, ex.parsed);
    if (described.size() == attempt.steps.size() && !described.empty()) return format_steps(described);
    return format_action_log(attempt);
}

}  // namespace

const std::vector<FailureMode>& heatmap_modes() {
    static const std::vector<FailureMode> modes{FailureMode::PMH, FailureMode::ProcMH, FailureMode::OMH,
                                                FailureMode::KD,  FailureMode::IM,     FailureMode::Other};
    return modes;
}

FailureLabel label_failure(const TaskSpec& task, const AttemptRecord& attempt, const Verdict& verdict,
                           JudgeBackend* classifier, const TemplateStore& templates, const JudgeOptions& options) {
    if (is_budget_stop(attempt.termination))
        return {FailureMode::ExecutionTimeout, LabelBasis::mechanical,
                "termination " + std::string(to_string(attempt.termination))};
    if (verdict.is_success()) throw std::invalid_argument("label_failure called on a successful attempt");

    if (verdict.irr && !verdict.irr->evaluation_error) {
        const int c = verdict.irr->correctly_used_units;
        const int t = verdict.irr->total_information_units;
        if (t > 0 && c > 0 && c < t)
            return {FailureMode::PMH, LabelBasis::mechanical,
                    "IRR " + std::to_string(c) + "/" + std::to_string(t) + " is strictly between 0% and 100%"};
    }
    if (attempt.termination == Termination::harness_error)
        return {FailureMode::Other, LabelBasis::mechanical, "harness error: " + attempt.error};
    if (verdict.decision == Decision::evaluation_error)
        return {FailureMode::Other, LabelBasis::mechanical, "evaluation error: " + verdict.reason};
    if (!classifier) return {FailureMode::Other, LabelBasis::mechanical, "no classifier configured"};

    const JudgeExchange ex = run_exchange(JudgeRole::failure_classifier,
                                          {{"task_description", task.description},
                                           {"failure_reason", verdict.reason},
                                           {"irr_summary", irr_summary(task, verdict)},
                                           {"steps_text", steps_text(attempt, verdict)}},
                                          {}, {attempt.task_id, attempt.attempt_index, std::nullopt}, *classifier,
                                          templates, options);
    if (ex.parsed.is_null()) return {FailureMode::Other, LabelBasis::mechanical, "classifier failed: " + ex.error};

    FailureMode mode = failure_mode_from_string(ex.parsed["label"].get<std::string>());
    std::string why = ex.parsed["reason"].get<std::string>();
    const bool irr_zero = !verdict.irr || verdict.irr->evaluation_error || verdict.irr->correctly_used_units == 0;
    if ((mode == FailureMode::ProcMH || mode == FailureMode::OMH) && !irr_zero) {
        why = std::string(to_string(mode)) + " requires IRR = 0; classifier said: " + why;
        mode = FailureMode::Other;
    }
    return {mode, LabelBasis::judge_assisted, why};
}

std::vector<HeatmapRow> aggregate_failures(const std::map<std::string, std::vector<FailureLabel>>& labels_by_agent) {
    std::vector<HeatmapRow> rows;
    for (const auto& [agent, labels] : labels_by_agent) {
        HeatmapRow row;
        row.agent = agent;
        row.failures = labels.size();
        std::map<FailureMode, std::size_t> counts;
        for (const auto& l : labels) {
            if (l.mode == FailureMode::ExecutionTimeout)
                ++row.timeouts;
            else
                ++counts[l.mode];
        }
        if (row.failures) row.timeout_rate = Rational(cpp_int(100 * row.timeouts), cpp_int(row.failures));
        const std::size_t rest = row.failures - row.timeouts;
        if (rest) {
            for (FailureMode m : heatmap_modes())
                row.mode_percent[m] = Rational(cpp_int(100 * counts[m]), cpp_int(rest));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace membench
