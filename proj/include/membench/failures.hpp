#pragma once

#include "membench/backend.hpp"
#include "membench/judge.hpp"
#include "membench/metrics.hpp"
#include "membench/suite.hpp"
#include "membench/templates.hpp"
#include "membench/trace.hpp"

#include <map>
#include <string>
#include <vector>

namespace membench {

/// Mechanical rules first: budget terminations are ExecutionTimeout and
/// 0 < IRR < 100 is PMH. Remaining failures go to the classifier when one is
/// given (ProcMH/OMH are only kept when IRR is 0), otherwise Other.
/// Throws std::invalid_argument for a successful, in-budget attempt.
FailureLabel label_failure(const TaskSpec& task, const AttemptRecord& attempt, const Verdict& verdict,
                           JudgeBackend* classifier = nullptr,
                           const TemplateStore& templates = TemplateStore::builtin(),
                           const JudgeOptions& options = {});

struct HeatmapRow {
    std::string agent;
    std::size_t failures = 0;       // all labelled failures
    std::size_t timeouts = 0;       // ExecutionTimeout
    Rational timeout_rate = 0;      // percent of all failures
    // Percent of non-timeout failures per mode (PMH, ProcMH, OMH, KD, IM, Other).
    std::map<FailureMode, Rational> mode_percent;
};

/// Agent x mode distribution over non-timeout failures. Rows come out sorted
/// by agent name.
std::vector<HeatmapRow> aggregate_failures(const std::map<std::string, std::vector<FailureLabel>>& labels_by_agent);

/// Non-timeout modes in report column order.
const std::vector<FailureMode>& heatmap_modes();

}  // namespace membench
