#include "membench/harness.hpp"

#include "membench/error.hpp"
#include "membench/failures.hpp"
#include "membench/protocol.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace membench {

namespace proto = membench::protocol;

ClockFactory steady_clock_factory() {
    return [](const AttemptKey&) -> Clock {
        return [] {
            return std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now().time_since_epoch())
                .count();
        };
    };
}

ClockFactory fake_clock_factory(std::int64_t tick_ms) {
    return [tick_ms](const AttemptKey&) -> Clock {
        auto now = std::make_shared<std::int64_t>(-tick_ms);
        return [now, tick_ms] { return *now += tick_ms; };
    };
}

std::vector<std::vector<std::size_t>> schedule_units(const Suite& suite) {
    std::vector<std::vector<std::size_t>> units;
    std::set<std::size_t> placed;
    for (std::size_t i = 0; i < suite.tasks.size(); ++i) {
        if (placed.count(i)) continue;
        std::vector<std::size_t> unit{i};
        placed.insert(i);
        if (const auto& m = suite.tasks[i].mirror_id) {
            for (std::size_t j = i + 1; j < suite.tasks.size(); ++j) {
                if (suite.tasks[j].task_id == *m && !placed.count(j)) {
                    unit.push_back(j);
                    placed.insert(j);
                    break;
                }
            }
        }
        units.push_back(std::move(unit));
    }
    return units;
}

Verdict judge_attempt(const TaskSpec& task, const AttemptRecord& attempt, JudgeBackend& judge,
                      const JudgeOptions& options, JudgeBackend* classifier) {
    Verdict v;
    if (attempt.termination == Termination::harness_error) {
        v.decision = Decision::failure;
        v.decided_at_stage = 0;
        v.reason = "harness error: " + attempt.error;
        if (task.memory_intensive) v.irr = compute_irr(task, Decision::failure, nullptr);
    } else {
        v = evaluate_attempt(task, attempt, judge, TemplateStore::builtin(), options);
        if (is_budget_stop(attempt.termination)) apply_budget_stop(task, attempt.termination, v);
    }
    if (!v.is_success()) v.label = label_failure(task, attempt, v, classifier, TemplateStore::builtin(), options);
    return v;
}

RunResult reevaluate_run(const RunResult& run, JudgeBackend& judge, const JudgeOptions& options,
                         JudgeBackend* classifier) {
    RunResult out = run;
    out.judge = judge.model_id();
    for (auto& tr : out.tasks) {
        const TaskSpec& task = out.suite.at(tr.task_id);
        for (auto& ar : tr.attempts) ar.verdict = judge_attempt(task, ar.attempt, judge, options, classifier);
    }
    return out;
}

namespace {

class Worker {
public:
    Worker(int index, const Suite& suite, AgentEndpoint& agent, EnvironmentFactory& envs, JudgeBackend& judge,
           const RunOptions& options, TraceStore* store)
        : suite_(suite), agent_(agent), judge_(judge), options_(options), store_(store) {
        key_ = worker_isolation_key(index);
        env_ = envs.create_from_image(options.image_id, key_);
        if (!env_) throw Error("environment provisioning failed for " + key_);
        session_ = agent_.connect(key_);
    }

    TaskRun run_task(const TaskSpec& task) {
        TaskRun tr;
        tr.task_id = task.task_id;
        env_->prepare_task(task);
        env_->snapshot();
        std::optional<proto::Outcome> previous;
        for (int n = 1; n <= options_.budget.k; ++n) {
            env_->restore_snapshot();
            AttemptResult ar;
            ar.attempt = run_attempt(task, n, previous);
            ar.verdict = judge_attempt(task, ar.attempt, judge_, options_.judge_options, options_.classifier.get());
            const bool ok = ar.verdict.is_success();
            tr.attempts.push_back(std::move(ar));
            if (ok) break;
            previous = proto::Outcome::failure;
        }
        return tr;
    }

private:
    AttemptRecord run_attempt(const TaskSpec& task, int attempt_index, std::optional<proto::Outcome> previous) {
        const AttemptKey key{task.task_id, attempt_index};
        const Clock clock = options_.clock ? options_.clock(key) : steady_clock_factory()(key);
        AttemptRecord rec;
        rec.task_id = task.task_id;
        rec.attempt_index = attempt_index;
        if (store_) store_->open_attempt(key);

        auto append = [&](const StepRecord& step) {
            rec.steps.push_back(step);
            if (store_) store_->record_step(key, step);
        };

        Termination termination = Termination::agent_terminated;
        std::string error;
        try {
            proto::TaskMessage tm{task.task_id, task.description, attempt_index, previous, std::nullopt};
            if (options_.budget.mode == BudgetMode::steps_per_episode) tm.step_limit = max_rounds(task);
            session_->send(proto::encode(tm));

            Observation obs = env_->observe();
            rec.start_observation_hash = observation_hash(obs.screenshot_png, obs.ui_tree);
            for (int i = 0;; ++i) {
                if (options_.budget.mode == BudgetMode::unlimited && i >= options_.hard_step_cap) {
                    termination = Termination::harness_error;
                    error = "hard step cap of " + std::to_string(options_.hard_step_cap) + " reached";
                    break;
                }
                const std::int64_t t0 = clock();
                session_->send(proto::encode(proto::ObservationMessage{i, base64_encode(obs.screenshot_png), obs.ui_tree}));
                const proto::AgentMessage reply = proto::decode_agent_message(session_->receive());

                StepRecord step;
                step.step_index = i;
                step.screenshot_before = obs.screenshot_png;
                step.ui_tree = obs.ui_tree;
                if (const auto* term = std::get_if<proto::TerminateMessage>(&reply)) {
                    step.action_kind = ActionKind::terminate;
                    step.action_detail = term->status == proto::TerminateStatus::done ? "done" : "infeasible";
                    step.tokens = term->usage.tokens;
                    step.api_cost = term->usage.api_cost;
                    step.wall_time_ms = clock() - t0;
                    append(step);
                    if (auto stop = enforce_budget(task, rec, options_.budget)) termination = *stop;
                    break;
                }
                const auto& act = std::get<proto::ActionMessage>(reply);
                step.action_kind = act.action_kind;
                step.action_detail = act.action_detail;
                step.touch_point = act.touch_point;
                step.thought = act.thought;
                step.tokens = act.usage.tokens;
                step.api_cost = act.usage.api_cost;

                rec.steps.push_back(step);
                const auto stop = enforce_budget(task, rec, options_.budget);
                rec.steps.pop_back();
                if (stop) {
                    // The over-budget action is recorded but never executed.
                    step.wall_time_ms = clock() - t0;
                    append(step);
                    termination = *stop;
                    break;
                }
                env_->act(Action{act.action_kind, act.action_detail, act.touch_point});
                obs = env_->observe();
                step.screenshot_after = obs.screenshot_png;
                step.wall_time_ms = clock() - t0;
                append(step);
            }
        } catch (const ProtocolError& e) {
            termination = Termination::harness_error;
            error = std::string("protocol violation: ") + e.what();
            session_ = agent_.connect(key_);
        } catch (const Error& e) {
            termination = Termination::harness_error;
            error = e.what();
        }

        if (store_) return store_->close_attempt(key, termination, rec.start_observation_hash, error);
        rec.termination = termination;
        rec.error = error;
        rec.recompute_totals();
        return rec;
    }

    const Suite& suite_;
    AgentEndpoint& agent_;
    JudgeBackend& judge_;
    const RunOptions& options_;
    TraceStore* store_;
    std::string key_;
    std::unique_ptr<EnvironmentDriver> env_;
    std::unique_ptr<AgentSession> session_;
};

}  // namespace

RunResult run_benchmark(const Suite& suite, AgentEndpoint& agent, EnvironmentFactory& environments,
                        JudgeBackend& judge, const RunOptions& options) {
    if (options.workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (options.budget.k < 1) throw std::invalid_argument("k must be >= 1");
    validate_suite(suite);

    RunResult result;
    result.run_id = options.run_id;
    result.agent = options.agent_name.empty() ? agent.name() : options.agent_name;
    result.judge = options.judge_name.empty() ? judge.model_id() : options.judge_name;
    result.budget = options.budget;
    result.seed = options.seed;
    result.suite = suite;
    result.tasks.resize(suite.tasks.size());

    std::optional<TraceStore> store;
    if (!options.run_dir.empty()) {
        std::filesystem::create_directories(options.run_dir);
        store.emplace(options.run_dir);
    }

    std::deque<std::vector<std::size_t>> queue;
    for (auto& u : schedule_units(suite)) queue.push_back(std::move(u));
    std::mutex mutex;
    std::exception_ptr failure;
    std::atomic<bool> abort{false};

    auto work = [&](int index) {
        try {
            Worker worker(index, suite, agent, environments, judge, options, store ? &*store : nullptr);
            while (!abort) {
                std::vector<std::size_t> unit;
                {
                    std::lock_guard lock(mutex);
                    if (queue.empty()) return;
                    unit = std::move(queue.front());
                    queue.pop_front();
                }
                for (std::size_t idx : unit) result.tasks[idx] = worker.run_task(suite.tasks[idx]);
            }
        } catch (...) {
            std::lock_guard lock(mutex);
            if (!failure) failure = std::current_exception();
            abort = true;
        }
    };

    const int n = std::min<int>(options.workers, static_cast<int>(std::max<std::size_t>(1, queue.size())));
    if (n == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < n; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    if (store) save_run(result, options.run_dir, false);
    return result;
}

}  // namespace membench
