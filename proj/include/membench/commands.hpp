#pragma once

#include "membench/budget.hpp"
#include "membench/reports.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace membench::cli {

struct RunConfig {
    std::string suite;
    std::string env = "simkit";
    std::string agent;       // simkit:<profile> | cmd:<command line>
    std::string judge;       // mock:always_success | mock:fixture | mock:replay:<path> | <profile.json>
    std::string classifier;  // empty | judge | <backend spec>
    std::string world;       // simkit world-spec file
    int k = 3;
    int workers = 1;
    BudgetMode budget = BudgetMode::steps_per_episode;
    std::int64_t reference_tokens = default_reference_tokens_per_step;
    std::string out = "runs";
    std::string run_id;
    std::uint64_t seed = 0;
    ReportFormat format = ReportFormat::txt;
};

/// Each command writes its human/machine output to `out` and returns the
/// process exit status. Errors are thrown as exceptions.
int cmd_validate(const std::string& suite, ReportFormat format, std::ostream& out);
int cmd_stats(const std::string& suite, ReportFormat format, std::ostream& out);
/// Exit status 3 when harness errors make up the majority of attempts.
int cmd_run(const RunConfig& config, std::ostream& out);
int cmd_evaluate(const std::string& run_dir, const std::string& judge, const std::string& classifier,
                 ReportFormat format, std::ostream& out);
int cmd_reprocess(const std::string& run_dir, BudgetMode mode, std::int64_t reference_tokens, ReportFormat format,
                  std::ostream& out);
int cmd_score(const std::string& run_dir, const std::string& labels, ReportFormat format, std::ostream& out);
int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir, ReportFormat format,
               std::ostream& out);

/// Directory a run is written to.
std::filesystem::path run_directory(const RunConfig& config);

}  // namespace membench::cli
