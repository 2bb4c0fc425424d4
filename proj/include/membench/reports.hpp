#pragma once

#include "membench/failures.hpp"
#include "membench/metrics.hpp"
#include "membench/run.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace membench {

enum class ReportFormat { csv, json, txt };

std::string_view to_string(ReportFormat f);
ReportFormat report_format_from_string(std::string_view s);

struct AgentReport {
    std::string agent;
    MetricsSummary summary;
    std::vector<FailureLabel> labels;  // one per failed attempt
};

/// Metrics and failure labels of one run. Throws std::invalid_argument for a
/// run without tasks.
AgentReport agent_report(const RunResult& run);

struct Table {
    std::string name;
    std::string title;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table leaderboard_table(const std::vector<AgentReport>& agents);
Table short_term_table(const std::vector<AgentReport>& agents);
Table long_term_table(const std::vector<AgentReport>& agents);
Table cross_app_table(const std::vector<AgentReport>& agents);
Table failures_table(const std::vector<AgentReport>& agents);
/// Constrained minus baseline per agent: negative values mean degradation.
Table compute_normalized_table(const std::vector<std::pair<AgentReport, AgentReport>>& baseline_vs_constrained);

std::string render(const Table& table, ReportFormat format);

/// Writes <name>.<ext> for every standard table (and the delta table when
/// given) into `dir`. Returns the written paths in order.
std::vector<std::filesystem::path> emit_reports(
    const std::vector<AgentReport>& agents, const std::filesystem::path& dir, const std::vector<ReportFormat>& formats,
    const std::vector<std::pair<AgentReport, AgentReport>>& deltas = {});

}  // namespace membench
