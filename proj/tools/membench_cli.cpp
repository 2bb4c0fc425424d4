#include "membench/commands.hpp"
#include "membench/error.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace membench;

namespace {

ReportFormat parse_format(const std::string& s) { return report_format_from_string(s); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"membench: memory-centric GUI agent benchmark harness"};
    app.require_subcommand(1);

    std::string suite, format = "txt", run_dir, labels, out_dir, judge, classifier, budget = "steps";
    std::vector<std::string> runs;
    std::int64_t reference_tokens = default_reference_tokens_per_step;
    cli::RunConfig rc;

    auto* validate = app.add_subcommand("validate", "Check a suite manifest");
    validate->add_option("--suite", suite, "Suite manifest (JSONL)")->required();
    validate->add_option("--format", format, "txt, csv or json");

    auto* stats = app.add_subcommand("stats", "Suite composition statistics");
    stats->add_option("--suite", suite, "Suite manifest (JSONL)")->required();
    stats->add_option("--format", format, "txt, csv or json");

    auto* run = app.add_subcommand("run", "Run an agent over a suite");
    run->add_option("--suite", rc.suite, "Suite manifest (JSONL)")->required();
    run->add_option("--env", rc.env, "Environment plugin");
    run->add_option("--agent", rc.agent, "simkit:<profile> or cmd:<command line>")->required();
    run->add_option("--judge", rc.judge, "Judge backend spec")->required();
    run->add_option("--classifier", rc.classifier, "Failure classifier backend: judge or a backend spec");
    run->add_option("--world", rc.world, "Simkit world spec (JSON)");
    run->add_option("-k", rc.k, "Attempts per task");
    run->add_option("--workers", rc.workers, "Parallel environment workers");
    run->add_option("--budget", budget, "steps, tokens or unlimited");
    run->add_option("--reference-tokens", rc.reference_tokens, "Reference tokens per golden step");
    run->add_option("--out", rc.out, "Output directory for runs");
    run->add_option("--run-id", rc.run_id, "Run identifier");
    run->add_option("--seed", rc.seed, "Seed");
    run->add_option("--format", format, "txt, csv or json");

    auto* evaluate = app.add_subcommand("evaluate", "Re-judge a stored run");
    evaluate->add_option("--run", run_dir, "Run directory")->required();
    evaluate->add_option("--judge", judge, "Judge backend spec")->required();
    evaluate->add_option("--classifier", classifier, "Failure classifier backend: judge or a backend spec");
    evaluate->add_option("--format", format, "txt, csv or json");

    auto* reprocess = app.add_subcommand("reprocess", "Apply a budget to a stored run");
    reprocess->add_option("--run", run_dir, "Run directory")->required();
    reprocess->add_option("--budget", budget, "steps, tokens or unlimited")->required();
    reprocess->add_option("--reference-tokens", reference_tokens, "Reference tokens per golden step");
    reprocess->add_option("--format", format, "txt, csv or json");

    auto* score = app.add_subcommand("score", "Score judge verdicts against human labels");
    score->add_option("--run", run_dir, "Run directory")->required();
    score->add_option("--labels", labels, "Labels (JSONL)")->required();
    score->add_option("--format", format, "txt, csv or json");

    auto* report = app.add_subcommand("report", "Render report tables for one or more runs");
    report->add_option("--run", runs, "Run directory (repeatable)")->required();
    report->add_option("--out", out_dir, "Report directory");
    report->add_option("--format", format, "txt, csv or json");

    CLI11_PARSE(app, argc, argv);

    try {
        const ReportFormat fmt = parse_format(format);
        if (*validate) return cli::cmd_validate(suite, fmt, std::cout);
        if (*stats) return cli::cmd_stats(suite, fmt, std::cout);
        if (*run) {
            rc.budget = budget_mode_from_string(budget);
            rc.format = fmt;
            return cli::cmd_run(rc, std::cout);
        }
        if (*evaluate) return cli::cmd_evaluate(run_dir, judge, classifier, fmt, std::cout);
        if (*reprocess)
            return cli::cmd_reprocess(run_dir, budget_mode_from_string(budget), reference_tokens, fmt, std::cout);
        if (*score) return cli::cmd_score(run_dir, labels, fmt, std::cout);
        if (*report) return cli::cmd_report(runs, out_dir, fmt, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
