// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.
// Set MEMBENCH_UPDATE_GOLDEN=1 to rewrite the golden report files instead of comparing.
#include "membench/backend.hpp"
#include "membench/commands.hpp"
#include "membench/error.hpp"
#include "membench/harness.hpp"
#include "membench/judge.hpp"
#include "membench/metrics.hpp"
#include "membench/run.hpp"
#include "membench/util.hpp"
#include "metric_oracle.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

using namespace membench;
using membench::testing::fixtures_dir;
using membench::testing::golden_dir;
using membench::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Check {
    std::vector<std::string> problems;
    void expect(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }
    bool ok() const { return problems.empty(); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed1(double v) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << v;
    return os.str();
}

bool update_golden() {
    const char* v = std::getenv("MEMBENCH_UPDATE_GOLDEN");
    return v && std::string(v) == "1";
}

// Compares (or rewrites) every csv/txt report in `dir` against golden/<name>/.
void golden_compare(Check& c, const fs::path& dir, const std::string& name, const std::vector<std::string>& tables) {
    const fs::path gold = golden_dir() / name;
    for (const auto& t : tables)
        for (const char* ext : {".csv", ".txt"}) {
            const fs::path produced = dir / (t + ext);
            if (!fs::exists(produced)) {
                c.expect(false, "missing report " + produced.string());
                continue;
            }
            if (update_golden()) {
                fs::create_directories(gold);
                write_text_file(gold / (t + ext), read_text_file(produced));
                continue;
            }
            if (!fs::exists(gold / (t + ext))) {
                c.expect(false, "missing golden " + (gold / (t + ext)).string());
                continue;
            }
            c.expect(read_text_file(produced) == read_text_file(gold / (t + ext)),
                     "golden mismatch " + name + "/" + t + ext);
        }
}

const std::vector<std::string> standard_tables{"leaderboard", "short_term", "long_term", "cross_app", "failures"};

fs::path simkit_run(const fs::path& out, const std::string& suite, const std::string& world, const std::string& id,
                    int workers = 1) {
    cli::RunConfig c;
    c.suite = (fixtures_dir() / suite).string();
    c.agent = "simkit:" + world;
    c.world = (fixtures_dir() / "worlds" / (world + ".json")).string();
    c.judge = "mock:fixture";
    c.out = out.string();
    c.run_id = id;
    c.seed = 7;
    c.workers = workers;
    std::ostringstream sink;
    if (cli::cmd_run(c, sink) != 0) throw Error("run " + id + " reported harness errors");
    return cli::run_directory(c);
}

// ---- criteria ----

std::string metric_oracle(Check& c) {
    std::mt19937_64 rng(987654321);
    const auto t0 = std::chrono::steady_clock::now();
    int mismatches = 0;
    for (int round = 0; round < 500; ++round) {
        const int k = 1 + static_cast<int>(rng() % 5);
        const auto outcomes = membench::testing::random_outcomes(rng, k);
        if (const auto m = membench::testing::oracle_mismatch(outcomes, k)) {
            ++mismatches;
            c.expect(false, "set " + std::to_string(round) + ": " + *m);
        }
    }
    const double s = seconds_since(t0);
    c.expect(s < 10.0, "runtime " + fixed1(s) + " s exceeds 10 s");
    return "500 random outcome sets, " + std::to_string(mismatches) + " mismatches, " + fixed1(s) + " s";
}

std::string reference_constants(Check& c) {
    c.expect(classify_difficulty(20) == Difficulty::easy, "20 -> Easy");
    c.expect(classify_difficulty(21) == Difficulty::medium, "21 -> Medium");
    c.expect(classify_difficulty(41) == Difficulty::hard, "41 -> Hard");
    c.expect(max_rounds(10) == 15, "max_rounds(10) = 15");
    c.expect(max_tokens(10) == 95070, "max_tokens(10) = 95070");

    std::vector<TaskOutcome> v(2);
    v[0].attempts = {{false}, {true}};
    v[1].attempts = {{false}, {false}, {true}};
    const FrrResult f = frr(v, 3);
    // With N_f = 1 per recovery the contribution equals the weight.
    std::vector<TaskOutcome> only2{v[0]}, only3{v[1]};
    c.expect(*frr(only2, 3).frr == 100 && *frr(only3, 3).frr == 50, "FRR weights w2 = 1, w3 = 0.5");
    c.expect(*f.frr == 75, "FRR of the two-task set is 75");

    std::vector<TaskOutcome> irr(1);
    irr[0].memory_intensive = true;
    irr[0].attempts = {AttemptOutcome{false, Rational(7, 9)}};
    c.expect(format_percent(irr_mean(irr)) == "77.8", "IRR 7/9 -> 77.8");
    c.expect(compute_irr(membench::testing::make_task("m", 5, true, 9), Decision::success, nullptr).percentage == 100,
             "success -> IRR 100");

    std::vector<TaskOutcome> sr(128);
    for (int i = 0; i < 128; ++i) sr[i].attempts = {{i < 63}};
    c.expect(format_percent(pass_at_k_sr(sr, 3)) == "49.2", "63/128 -> 49.2");
    return "difficulty 20/21/41, max_rounds(10)=15, max_tokens(10)=95070, FRR w2=1 w3=0.5, IRR 7/9=77.8, "
           "success IRR=100, 63/128=49.2";
}

std::string pipeline_state_machine(Check& c) {
    using membench::testing::make_attempt;
    using membench::testing::make_task;
    using membench::testing::reply;
    const auto t0 = std::chrono::steady_clock::now();
    JudgeOptions opts;
    opts.backoff_base = std::chrono::milliseconds(0);
    const auto& tpl = TemplateStore::builtin();
    const ReplayEntry uncertain = reply(JudgeRole::triage, {{"reason", "r"}, {"decision", "Uncertain"}});
    const ReplayEntry desc = membench::testing::descriptor_replies().front();

    {
        ReplayBackend b({reply(JudgeRole::triage, {{"reason", "r"}, {"decision", "Success"}})});
        const Verdict v = evaluate_attempt(make_task("t", 5), make_attempt("t", 5), b, tpl, opts);
        c.expect(v.is_success() && v.exchanges.size() == 1 && b.call_count() == 1, "(a) triage success = 1 exchange");
    }
    {
        ReplayBackend b({uncertain, desc,
                         reply(JudgeRole::semantic, {{"reason", "r"}, {"decision", -1}, {"required_steps", {2, 4, 6}}}),
                         reply(JudgeRole::visual, {{"reason", "r"}, {"decision", 1}})});
        const Verdict v = evaluate_attempt(make_task("t", 5), make_attempt("t", 8), b, tpl, opts);
        const bool ok = !v.exchanges.empty() && v.exchanges.back().role == JudgeRole::visual &&
                        v.exchanges.back().images.size() == 1 &&
                        v.exchanges.back().images[0].member_steps == std::vector<int>{2, 4, 6};
        c.expect(ok && v.decided_at_stage == 3, "(b) visual composite members = [2,4,6]");
    }
    {
        ReplayBackend b({reply(JudgeRole::triage, {{"reason", "r"}, {"decision", "Failure"}})});
        const Verdict v = evaluate_attempt(make_task("t", 5), make_attempt("t", 3), b, tpl, opts);
        c.expect(v.decision == Decision::evaluation_error && v.exchanges[0].parsed.is_null() &&
                     v.exchanges[0].error.find("decision") != std::string::npos,
                 "(c) triage \"Failure\" is a schema violation");
    }
    {
        ReplayBackend b({uncertain, desc,
                         reply(JudgeRole::semantic, {{"reason", "r"}, {"decision", -1}, {"required_steps", {1}}}),
                         reply(JudgeRole::visual, {{"reason", "r"}, {"decision", 2}})});
        const Verdict v = evaluate_attempt(make_task("t", 5), make_attempt("t", 3), b, tpl, opts);
        c.expect(v.decision == Decision::evaluation_error && v.decided_at_stage == 3 &&
                     v.exchanges.back().parsed.is_null(),
                 "(d) non-binary visual reply is a schema violation");
    }
    {
        // Every way a memory task can fail must still yield an IRR.
        std::vector<std::vector<ReplayEntry>> scripts{
            {uncertain, desc, reply(JudgeRole::semantic, {{"reason", "r"}, {"decision", 0}}),
             reply(JudgeRole::irr_analyzer, {{"total_information_units", 3}, {"correctly_used_units", 1},
                                             {"irr_percentage", 33}, {"analysis_reason", "a"}})},
            {uncertain, desc, reply(JudgeRole::semantic, {{"reason", "r"}, {"decision", 0}}),
             ReplayEntry{JudgeRole::irr_analyzer, "garbage"}},
            {ReplayEntry{JudgeRole::triage, "garbage"}},
            {uncertain, desc, reply(JudgeRole::semantic, {{"reason", "r"}, {"decision", -1}, {"required_steps", {0}}}),
             reply(JudgeRole::visual, {{"reason", "r"}, {"decision", 0}}),
             reply(JudgeRole::irr_analyzer, {{"total_information_units", 2}, {"correctly_used_units", 0},
                                             {"irr_percentage", 0}, {"analysis_reason", "a"}})}};
        bool all = true;
        for (const auto& s : scripts) {
            ReplayBackend b(s);
            const Verdict v = evaluate_attempt(make_task("m", 5, true), make_attempt("m", 3), b, tpl, opts);
            all = all && !v.is_success() && v.irr.has_value();
        }
        c.expect(all, "(e) memory-task failure always carries an IrrResult");
    }
    const double s = seconds_since(t0);
    c.expect(s < 5.0, "runtime " + fixed1(s) + " s exceeds 5 s");
    return "cases (a)-(e) with replay mocks, " + fixed1(s) + " s";
}

std::string end_to_end(Check& c) {
    TempDir dir("acceptance-e2e");
    std::ostringstream detail;

    const RunResult retry = load_run(simkit_run(dir.path, "suite.jsonl", "retry", "retry"));
    bool shape = true;
    for (const auto& t : retry.tasks)
        shape = shape && t.attempts.size() == 2 && !t.attempts[0].verdict.is_success() &&
                t.attempts[1].verdict.is_success();
    const MetricsSummary rs = summarize(outcomes_from_run(retry), 3);
    c.expect(shape, "retry: attempts = [fail, success]");
    c.expect(rs.sr_at_1 == 0 && rs.sr_at_k == 100 && rs.frr.frr && *rs.frr.frr == 100,
             "retry: SR@1 = 0, SR@3 = 100, FRR = 100");
    golden_compare(c, dir.path / "retry" / "reports", "retry", standard_tables);
    detail << "retry SR@1=" << format_percent(rs.sr_at_1) << " SR@3=" << format_percent(rs.sr_at_k)
           << " FRR=" << (rs.frr.frr ? format_percent(*rs.frr.frr) : "-");

    const RunResult drop = load_run(simkit_run(dir.path, "suite.jsonl", "drop_unit", "drop_unit"));
    const auto& first = drop.tasks[0].attempts[0].verdict;  // notes-copy-01, T = 3
    const bool pmh = first.label && first.label->mode == FailureMode::PMH && first.irr &&
                     first.irr->total_information_units == 3 && first.irr->correctly_used_units == 2 &&
                     format_percent(Rational(100 * first.irr->correctly_used_units, first.irr->total_information_units)) == "66.7";
    c.expect(drop.tasks[0].task_id == "notes-copy-01" && pmh, "drop_one_unit: PMH with IRR 66.7 (T=3, C=2)");
    golden_compare(c, dir.path / "drop_unit" / "reports", "drop_unit", standard_tables);
    detail << "; drop_one_unit " << (first.label ? std::string(to_string(first.label->mode)) : "-") << " IRR "
           << (first.irr ? std::to_string(first.irr->correctly_used_units) + "/" +
                               std::to_string(first.irr->total_information_units)
                         : "-");

    const RunResult timeout = load_run(simkit_run(dir.path, "suite.jsonl", "timeout", "timeout"));
    bool all_timeout = true;
    for (const auto& t : timeout.tasks)
        for (const auto& a : t.attempts)
            all_timeout = all_timeout && !a.verdict.is_success() && a.verdict.label &&
                          a.verdict.label->mode == FailureMode::ExecutionTimeout;
    const MetricsSummary ts = summarize(outcomes_from_run(timeout), 3);
    c.expect(all_timeout && ts.sr_at_k == 0, "timeout: ExecutionTimeout and SR failure");
    golden_compare(c, dir.path / "timeout" / "reports", "timeout", standard_tables);
    detail << "; timeout SR@3=" << format_percent(ts.sr_at_k) << "; golden reports "
           << (update_golden() ? "rewritten" : "compared");
    return detail.str();
}

std::string determinism(Check& c) {
    TempDir a("acceptance-w1"), b("acceptance-w4");
    const fs::path r1 = simkit_run(a.path, "suite12.jsonl", "mixed", "det", 1);
    const fs::path r4 = simkit_run(b.path, "suite12.jsonl", "mixed", "det", 4);
    std::size_t files = 0, differing = 0;
    std::map<std::string, std::string> t1, t4;
    for (auto [root, tree] : {std::pair{r1, &t1}, std::pair{r4, &t4}})
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file()) (*tree)[fs::relative(e.path(), root).string()] = read_text_file(e.path());
    files = t1.size();
    for (const auto& [k, v] : t1)
        if (!t4.count(k) || t4.at(k) != v) ++differing;
    c.expect(t1.size() == t4.size() && differing == 0, "trace stores and reports identical for workers=1 vs 4");

    std::size_t attempts = 0;
    bool hashes = true;
    for (const auto& t : load_run(r4).tasks)
        for (const auto& at : t.attempts) {
            ++attempts;
            hashes = hashes && !at.attempt.start_observation_hash.empty() &&
                     at.attempt.start_observation_hash == t.attempts[0].attempt.start_observation_hash;
        }
    c.expect(hashes, "start-of-attempt observation hash equals attempt 1's");
    return std::to_string(files) + " files compared, " + std::to_string(differing) + " differ; " +
           std::to_string(attempts) + " attempt start hashes checked";
}

std::string compute_normalized(Check& c) {
    TempDir dir("acceptance-heavy");
    const fs::path run = simkit_run(dir.path, "suite.jsonl", "heavy", "heavy");
    const RunResult base = load_run(run);
    const RunResult constrained = reprocess_with_budget(base, {BudgetMode::tokens_per_episode, 3, 9507});
    std::size_t violating = 0;
    bool relabelled = true;
    for (std::size_t i = 0; i < base.tasks.size(); ++i) {
        const TaskSpec& task = base.suite.at(base.tasks[i].task_id);
        for (std::size_t j = 0; j < base.tasks[i].attempts.size(); ++j) {
            const auto& before = base.tasks[i].attempts[j];
            const auto& after = constrained.tasks[i].attempts[j];
            const std::int64_t per_step = before.attempt.total_tokens / std::max(1, before.attempt.agent_steps);
            c.expect(per_step == 41760, "agent consumed 41,760 tokens per step");
            if (before.attempt.total_tokens <= max_tokens(task.golden_steps, 9507)) continue;
            ++violating;
            relabelled = relabelled && !after.verdict.is_success() && after.verdict.budget_override == before.verdict.is_success() &&
                         after.attempt.termination == Termination::token_budget_exceeded && after.verdict.label &&
                         after.verdict.label->mode == FailureMode::ExecutionTimeout &&
                         (!task.memory_intensive || (after.verdict.irr && after.verdict.irr->percentage == 0 &&
                                                     after.verdict.irr->correctly_used_units == 0));
        }
    }
    const MetricsSummary s = summarize(outcomes_from_run(constrained), 3);
    c.expect(violating > 0 && relabelled, "violating attempts relabelled failure / ExecutionTimeout / IRR 0");
    c.expect(s.sr_at_k == 0 && s.irr && *s.irr == 0, "SR@3 and IRR collapse to 0");

    std::ostringstream sink;
    cli::cmd_reprocess(run.string(), BudgetMode::tokens_per_episode, 9507, ReportFormat::txt, sink);
    golden_compare(c, run / "reports" / "budget_tokens", "heavy_tokens", {"compute_normalized"});
    return std::to_string(violating) + " violating attempts relabelled; SR@3 " +
           format_percent(summarize(outcomes_from_run(base), 3).sr_at_k) + " -> " + format_percent(s.sr_at_k) +
           ", IRR -> " + (s.irr ? format_percent(*s.irr) : "-");
}

std::string evaluator_scorer(Check& c) {
    std::map<std::string, JudgedTrajectory> pred;
    std::map<std::string, bool> truth;
    for (int i = 0; i < 50; ++i) {
        const std::string id = "task-" + std::to_string(i) + "/attempt_1";
        pred[id] = {i < 49, 0.0};
        truth[id] = true;
    }
    const EvaluatorScore s = score_evaluator(pred, truth);
    const std::string f1 = format_percent(*s.f1), p = format_percent(*s.precision), r = format_percent(*s.recall);
    c.expect(s.tp == 49 && s.fp == 0 && s.fn == 1, "confusion TP=49 FP=0 FN=1");
    c.expect(f1 == "99.0" && p == "100.0" && r == "98.0", "F1 99.0 / P 100.0 / R 98.0");
    return "TP=49 FP=0 FN=1 -> F1 " + f1 + " / P " + p + " / R " + r;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<std::string(Check&)>>> criteria{
        {"metric formulas match the naive oracle", metric_oracle},
        {"reference constants reproduced exactly", reference_constants},
        {"judge pipeline state machine", pipeline_state_machine},
        {"end-to-end simkit runs with golden reports", end_to_end},
        {"determinism and isolation across workers", determinism},
        {"compute-normalized reprocess under token budget", compute_normalized},
        {"evaluator-validation scorer", evaluator_scorer},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        std::string detail;
        try {
            detail = criteria[i].second(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        std::cout << (c.ok() ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first;
        if (!detail.empty()) std::cout << ": " << detail;
        std::cout << '\n';
        for (const auto& p : c.problems) std::cout << "     - " << p << '\n';
        if (!c.ok()) ++failed;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed ? 1 : 0;
}
