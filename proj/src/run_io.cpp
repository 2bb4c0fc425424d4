#include "membench/error.hpp"
#include "membench/run.hpp"
#include "membench/util.hpp"

#include <fstream>

namespace membench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json run_header(const RunResult& run) {
    json tasks = json::array();
    for (const auto& t : run.tasks) tasks.push_back({{"task_id", t.task_id}, {"attempts", t.attempts.size()}});
    return {{"run_id", run.run_id},
            {"agent", run.agent},
            {"judge", run.judge},
            {"budget",
             {{"mode", std::string(to_string(run.budget.mode))},
              {"k", run.budget.k},
              {"reference_tokens_per_step", run.budget.reference_tokens_per_step}}},
            {"seed", run.seed},
            {"tasks", tasks}};
}

void write_verdict(const fs::path& attempt_dir, const Verdict& v) {
    write_text_file(attempt_dir / "verdict", to_json(v).dump(2) + "\n");
}

}  // namespace

void save_verdicts(const RunResult& run, const fs::path& run_dir) {
    TraceStore store(run_dir);
    for (const auto& t : run.tasks)
        for (const auto& a : t.attempts) write_verdict(store.attempt_dir({t.task_id, a.attempt.attempt_index}), a.verdict);
    write_text_file(run_dir / "run.json", run_header(run).dump(2) + "\n");
}

void save_run(const RunResult& run, const fs::path& run_dir, bool write_attempts) {
    fs::create_directories(run_dir);
    save_suite(run.suite, run_dir / "suite.jsonl");
    if (write_attempts) {
        TraceStore store(run_dir);
        for (const auto& t : run.tasks)
            for (const auto& a : t.attempts) store.write_attempt(a.attempt);
    }
    save_verdicts(run, run_dir);
}

RunResult load_run(const fs::path& run_dir) {
    if (!fs::is_regular_file(run_dir / "run.json")) throw StoreError("not a run directory: " + run_dir.string());
    RunResult run;
    json header;
    try {
        header = json::parse(read_text_file(run_dir / "run.json"));
        run.run_id = header.at("run_id").get<std::string>();
        run.agent = header.value("agent", std::string{});
        run.judge = header.value("judge", std::string{});
        const json& b = header.at("budget");
        run.budget.mode = budget_mode_from_string(b.at("mode").get<std::string>());
        run.budget.k = b.at("k").get<int>();
        run.budget.reference_tokens_per_step = b.value("reference_tokens_per_step", default_reference_tokens_per_step);
        run.seed = header.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw StoreError("corrupt store: bad run.json: " + std::string(e.what()));
    }
    try {
        run.suite = load_suite(run_dir / "suite.jsonl");
    } catch (const Error& e) {
        throw StoreError(std::string("corrupt store: ") + e.what());
    }

    TraceStore store(run_dir);
    const auto keys = store.list_attempts();
    for (const auto& task : run.suite.tasks) {
        TaskRun tr;
        tr.task_id = task.task_id;
        for (const auto& key : keys) {
            if (key.task_id != task.task_id) continue;
            AttemptResult ar;
            ar.attempt = store.read_attempt(key);
            const fs::path vpath = store.attempt_dir(key) / "verdict";
            if (fs::exists(vpath)) {
                try {
                    ar.verdict = verdict_from_json(json::parse(read_text_file(vpath)));
                } catch (const std::exception& e) {
                    throw StoreError("corrupt store: " + vpath.string() + ": " + e.what());
                }
            } else {
                ar.verdict.reason = "not judged";
            }
            tr.attempts.push_back(std::move(ar));
        }
        for (std::size_t i = 0; i < tr.attempts.size(); ++i) {
            if (tr.attempts[i].attempt.attempt_index != static_cast<int>(i) + 1)
                throw StoreError("corrupt store: attempts of " + task.task_id + " are not numbered 1..n");
        }
        run.tasks.push_back(std::move(tr));
    }
    return run;
}

}  // namespace membench
