#include "membench/commands.hpp"

#include "membench/backend.hpp"
#include "membench/error.hpp"
#include "membench/harness.hpp"
#include "membench/run.hpp"
#include "membench/simkit.hpp"
#include "membench/util.hpp"

#include <ostream>

namespace membench::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<ReportFormat> all_formats{ReportFormat::csv, ReportFormat::json, ReportFormat::txt};

struct Judges {
    std::shared_ptr<JudgeBackend> judge;
    std::shared_ptr<JudgeBackend> classifier;
};

Judges build_judges(const std::string& judge_spec, const std::string& classifier_spec, const Suite& suite,
                    const simkit::WorldSpec* world, const BudgetPolicy& budget, std::uint64_t seed) {
    if (judge_spec.empty()) throw Error("judge profile not found: no --judge given");
    Judges j;
    if (judge_spec == "mock:fixture") {
        if (!world) throw Error("judge profile not found: mock:fixture needs a simkit world");
        j.judge = std::make_shared<ReplayBackend>(simkit::fixture_transcript(suite, *world, budget, seed), "mock:fixture");
        // The fixture transcript carries classifier replies too.
        if (classifier_spec.empty()) j.classifier = j.judge;
    } else {
        j.judge = make_backend(judge_spec);
    }
    if (classifier_spec == "judge")
        j.classifier = j.judge;
    else if (!classifier_spec.empty())
        j.classifier = make_backend(classifier_spec);
    return j;
}

void print_table(const Table& t, ReportFormat f, std::ostream& out) { out << render(t, f); }

std::optional<simkit::WorldSpec> stored_world(const fs::path& run_dir) {
    if (!fs::exists(run_dir / "world.json")) return std::nullopt;
    return simkit::load_world_spec(run_dir / "world.json");
}

std::string default_run_id(const RunConfig& c) {
    std::string id;
    for (char ch : c.agent) id += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-') ? ch : '_';
    return id + "-seed" + std::to_string(c.seed);
}

}  // namespace

int cmd_validate(const std::string& suite_path, ReportFormat format, std::ostream& out) {
    const Suite suite = load_suite(suite_path);
    if (format == ReportFormat::json) {
        out << json{{"valid", true}, {"suite_id", suite.suite_id}, {"tasks", suite.tasks.size()}}.dump() << '\n';
    } else {
        out << "ok: suite '" << suite.suite_id << "' with " << suite.tasks.size() << " tasks\n";
    }
    return 0;
}

int cmd_stats(const std::string& suite_path, ReportFormat format, std::ostream& out) {
    const Suite suite = load_suite(suite_path);
    const SuiteStats stats = suite_stats(suite);
    if (format == ReportFormat::json) {
        out << to_json(stats).dump(2) << '\n';
        return 0;
    }
    Table t{"suite_stats", "Suite '" + suite.suite_id + "': " + std::to_string(stats.total) + " tasks, " +
                               std::to_string(stats.mirror_pairs) + " mirror pairs",
            {"Group", "Bucket", "Tasks", "Percent"}, {}};
    auto add = [&](const std::string& group, const std::vector<Bucket>& buckets) {
        for (const auto& b : buckets) {
            char pctbuf[32];
            std::snprintf(pctbuf, sizeof pctbuf, "%.1f", b.percent);
            t.rows.push_back({group, b.key, std::to_string(b.count), pctbuf});
        }
    };
    add("difficulty", stats.by_difficulty);
    add("apps", stats.by_app_count);
    add("memory", stats.by_memory);
    add("category", stats.by_category);
    print_table(t, format, out);
    return 0;
}

fs::path run_directory(const RunConfig& c) { return fs::path(c.out) / (c.run_id.empty() ? default_run_id(c) : c.run_id); }

int cmd_run(const RunConfig& c, std::ostream& out) {
    if (c.k < 1) throw Error("invalid -k: must be >= 1");
    if (c.workers < 1) throw Error("invalid --workers: must be >= 1");
    if (c.reference_tokens < 1) throw Error("invalid --reference-tokens: must be >= 1");
    if (c.env != "simkit") throw Error("unknown environment plugin '" + c.env + "' (available: simkit)");
    if (c.agent.empty()) throw Error("missing --agent");
    const Suite suite = load_suite(c.suite);

    const BudgetPolicy budget{c.budget, c.k, c.reference_tokens};
    std::optional<simkit::WorldSpec> world;
    std::shared_ptr<AgentEndpoint> agent;
    if (!c.world.empty()) world = simkit::load_world_spec(c.world);
    if (c.agent.rfind("simkit:", 0) == 0) {
        if (!world) world = simkit::world_from_profile(c.agent.substr(7));
    } else if (c.agent.rfind("cmd:", 0) == 0) {
        const auto argv = split_command_line(c.agent.substr(4));
        if (argv.empty()) throw Error("invalid --agent: empty command");
        agent = std::make_shared<StdioAgentEndpoint>(argv);
        if (!world) world = simkit::world_from_profile("scripted_ok");
    } else {
        throw Error("invalid --agent '" + c.agent + "' (expected simkit:<profile> or cmd:<command>)");
    }
    const simkit::Fixture fixture = simkit::make_fixture(suite, *world, budget, c.seed);
    if (!agent) agent = fixture.agent;

    const Judges judges = build_judges(c.judge, c.classifier, suite, &*world, budget, c.seed);

    const fs::path dir = run_directory(c);
    if (!is_safe_identifier(dir.filename().string())) throw Error("invalid --run-id '" + dir.filename().string() + "'");
    if (fs::exists(dir) && !fs::is_empty(dir)) throw Error("run directory already exists: " + dir.string());
    fs::create_directories(dir);
    write_text_file(dir / "world.json", simkit::to_json(*world).dump(2) + "\n");

    RunOptions opts;
    opts.budget = budget;
    opts.workers = c.workers;
    opts.image_id = simkit::image_id;
    opts.run_id = dir.filename().string();
    opts.agent_name = c.agent;
    opts.judge_name = c.judge;
    opts.seed = c.seed;
    opts.run_dir = dir;
    opts.clock = fake_clock_factory(world->tick_ms);
    opts.judge_options.backoff_base = std::chrono::milliseconds(c.judge.rfind("mock:", 0) == 0 ? 0 : 200);
    opts.classifier = judges.classifier;

    const RunResult run = run_benchmark(suite, *agent, *fixture.environments, *judges.judge, opts);
    const AgentReport report = agent_report(run);
    emit_reports({report}, dir / "reports", all_formats);
    print_table(leaderboard_table({report}), c.format, out);
    if (c.format == ReportFormat::txt) out << "run directory: " << dir.string() << '\n';

    std::size_t attempts = 0, harness_errors = 0;
    for (const auto& t : run.tasks)
        for (const auto& a : t.attempts) {
            ++attempts;
            if (a.attempt.termination == Termination::harness_error) ++harness_errors;
        }
    return 2 * harness_errors > attempts ? 3 : 0;
}

int cmd_evaluate(const std::string& run_dir, const std::string& judge, const std::string& classifier,
                 ReportFormat format, std::ostream& out) {
    const RunResult run = load_run(run_dir);
    std::size_t attempts = 0;
    for (const auto& t : run.tasks) attempts += t.attempts.size();
    if (attempts == 0) throw StoreError("run directory holds no attempts: " + run_dir);
    const auto world = stored_world(run_dir);
    const Judges judges = build_judges(judge, classifier, run.suite, world ? &*world : nullptr, run.budget, run.seed);
    JudgeOptions opts;
    opts.backoff_base = std::chrono::milliseconds(judge.rfind("mock:", 0) == 0 ? 0 : 200);
    RunResult judged = reevaluate_run(run, *judges.judge, opts, judges.classifier.get());
    judged.judge = judge;
    save_verdicts(judged, run_dir);
    const AgentReport report = agent_report(judged);
    emit_reports({report}, fs::path(run_dir) / "reports", all_formats);
    print_table(leaderboard_table({report}), format, out);
    return 0;
}

int cmd_reprocess(const std::string& run_dir, BudgetMode mode, std::int64_t reference_tokens, ReportFormat format,
                  std::ostream& out) {
    const RunResult run = load_run(run_dir);
    BudgetPolicy budget = run.budget;
    budget.mode = mode;
    budget.reference_tokens_per_step = reference_tokens;
    const RunResult constrained = reprocess_with_budget(run, budget);
    const AgentReport base = agent_report(run);
    const AgentReport now = agent_report(constrained);
    const fs::path dir = fs::path(run_dir) / "reports" / ("budget_" + std::string(to_string(mode)));
    emit_reports({now}, dir, all_formats, {{base, now}});
    print_table(compute_normalized_table({{base, now}}), format, out);
    return 0;
}

int cmd_score(const std::string& run_dir, const std::string& labels, ReportFormat format, std::ostream& out) {
    const RunResult run = load_run(run_dir);
    const EvaluatorScore s = score_evaluator(judged_trajectories(run), load_labels(labels));
    auto opt = [](const std::optional<Rational>& v) { return v ? format_percent(*v) : std::string("-"); };
    Table t{"evaluator_score", "Evaluator agreement with human labels (success = positive class)",
            {"Trajectories", "TP", "FP", "FN", "TN", "F1", "Precision", "Recall", "Cost/Trajectory"}, {}};
    t.rows.push_back({std::to_string(s.tp + s.fp + s.fn + s.tn), std::to_string(s.tp), std::to_string(s.fp),
                      std::to_string(s.fn), std::to_string(s.tn), opt(s.f1), opt(s.precision), opt(s.recall),
                      format_fixed(s.mean_cost, 4)});
    print_table(t, format, out);
    return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir, ReportFormat format,
               std::ostream& out) {
    if (run_dirs.empty()) throw Error("missing --run");
    std::vector<AgentReport> reports;
    for (const auto& d : run_dirs) reports.push_back(agent_report(load_run(d)));
    const fs::path dir = out_dir.empty() ? fs::path(run_dirs.front()) / "reports" : fs::path(out_dir);
    emit_reports(reports, dir, all_formats);
    for (const Table& t : {leaderboard_table(reports), short_term_table(reports), long_term_table(reports),
                           cross_app_table(reports), failures_table(reports)}) {
        print_table(t, format, out);
        if (format == ReportFormat::txt) out << '\n';
    }
    return 0;
}

}  // namespace membench::cli
