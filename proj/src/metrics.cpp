#include "membench/metrics.hpp"

#include "membench/run.hpp"

#include <cmath>
#include <stdexcept>

namespace membench {

namespace {

using boost::multiprecision::cpp_int;

Rational pct(std::size_t num, std::size_t den) { return Rational(cpp_int(num) * 100, cpp_int(den)); }

std::vector<TaskOutcome> filter(const std::vector<TaskOutcome>& in, auto pred) {
    std::vector<TaskOutcome> out;
    for (const auto& t : in)
        if (pred(t)) out.push_back(t);
    return out;
}

Rational sr_at_1_of(const std::vector<TaskOutcome>& v) {
    std::size_t s = 0;
    for (const auto& t : v)
        if (!t.attempts.empty() && t.attempts.front().success) ++s;
    return pct(s, v.size());
}

}  // namespace

std::optional<int> TaskOutcome::first_success_attempt() const {
    for (std::size_t i = 0; i < attempts.size(); ++i)
        if (attempts[i].success) return static_cast<int>(i) + 1;
    return std::nullopt;
}

Rational to_rational(double v) {
    return Rational(cpp_int(static_cast<long long>(std::llround(v * 1e9))), cpp_int(1000000000));
}

std::vector<TaskOutcome> outcomes_from_run(const RunResult& run) {
    std::vector<TaskOutcome> out;
    for (const auto& tr : run.tasks) {
        const TaskSpec& task = run.suite.at(tr.task_id);
        TaskOutcome o;
        o.task_id = task.task_id;
        o.memory_intensive = task.memory_intensive;
        o.difficulty = task.difficulty();
        o.app_count = task.app_count();
        for (const auto& ar : tr.attempts) {
            AttemptOutcome a;
            a.success = ar.verdict.is_success();
            if (ar.verdict.irr) {
                const IrrResult& irr = *ar.verdict.irr;
                if (a.success)
                    a.irr = Rational(1);
                else if (irr.total_information_units > 0)
                    a.irr = Rational(irr.correctly_used_units, irr.total_information_units);
                else
                    a.irr = Rational(0);
            }
            a.agent_steps = ar.attempt.agent_steps;
            a.golden_steps = task.golden_steps;
            a.time_ms = ar.attempt.total_time_ms;
            a.tokens = ar.attempt.total_tokens;
            if (ar.attempt.total_cost) a.cost = to_rational(*ar.attempt.total_cost);
            o.attempts.push_back(a);
        }
        out.push_back(std::move(o));
    }
    return out;
}

Rational pass_at_k_sr(const std::vector<TaskOutcome>& outcomes, int k) {
    if (outcomes.empty()) throw std::invalid_argument("pass@k: empty outcome set");
    if (k < 1) throw std::invalid_argument("pass@k: k must be >= 1");
    std::size_t s = 0;
    for (const auto& t : outcomes) {
        const auto first = t.first_success_attempt();
        if (first && *first <= k) ++s;
    }
    return pct(s, outcomes.size());
}

Rational irr_mean(const std::vector<TaskOutcome>& outcomes) {
    Rational sum = 0;
    std::size_t n = 0;
    for (const auto& t : outcomes) {
        if (!t.memory_intensive || t.attempts.empty() || !t.attempts.front().irr) continue;
        sum += *t.attempts.front().irr;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("IRR: no memory-intensive task with an attempt-1 IRR");
    return sum * 100 / Rational(cpp_int(n));
}

std::optional<Rational> mtpr(const std::vector<TaskOutcome>& outcomes) {
    const auto mem = filter(outcomes, [](const TaskOutcome& t) { return t.memory_intensive; });
    const auto std_ = filter(outcomes, [](const TaskOutcome& t) { return !t.memory_intensive; });
    if (mem.empty() || std_.empty()) throw std::invalid_argument("MTPR: needs both memory and standard tasks");
    const Rational srs = sr_at_1_of(std_);
    if (srs == 0) return std::nullopt;
    return sr_at_1_of(mem) / srs;
}

FrrResult frr(const std::vector<TaskOutcome>& outcomes, int k) {
    if (k < 2) throw std::invalid_argument("FRR: k must be >= 2");
    FrrResult r;
    r.recoveries.assign(static_cast<std::size_t>(k) + 1, 0);
    for (const auto& t : outcomes) {
        const auto first = t.first_success_attempt();
        if (first && *first == 1) continue;
        ++r.first_attempt_failures;
        if (first && *first <= k) ++r.recoveries[static_cast<std::size_t>(*first)];
    }
    if (r.first_attempt_failures == 0) return r;
    Rational sum = 0;
    for (int i = 2; i <= k; ++i) sum += Rational(cpp_int(r.recoveries[static_cast<std::size_t>(i)]), cpp_int(i - 1));
    r.frr = sum * 100 / Rational(cpp_int(r.first_attempt_failures));
    return r;
}

Efficiency efficiency_means(const std::vector<TaskOutcome>& outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("efficiency: empty outcome set");
    Efficiency e;
    Rational ratio_sum = 0;
    std::size_t successes = 0;
    Rational time_sum = 0, cost_sum = 0;
    std::size_t attempts = 0;
    bool cost_complete = true;
    for (const auto& t : outcomes) {
        if (const auto first = t.first_success_attempt()) {
            const AttemptOutcome& a = t.attempts[static_cast<std::size_t>(*first) - 1];
            ratio_sum += Rational(a.agent_steps, a.golden_steps);
            ++successes;
        }
        for (const auto& a : t.attempts) {
            if (a.agent_steps <= 0) continue;
            ++attempts;
            time_sum += Rational(cpp_int(a.time_ms), cpp_int(1000) * a.agent_steps);
            if (a.cost)
                cost_sum += *a.cost / a.agent_steps;
            else
                cost_complete = false;
        }
    }
    if (successes) e.step_ratio = ratio_sum / Rational(cpp_int(successes));
    if (attempts) {
        e.seconds_per_step = time_sum / Rational(cpp_int(attempts));
        if (cost_complete) e.cost_per_step = cost_sum / Rational(cpp_int(attempts));
    }
    return e;
}

MetricsSummary summarize(const std::vector<TaskOutcome>& outcomes, int k) {
    if (outcomes.empty()) throw std::invalid_argument("summary: empty outcome set");
    MetricsSummary s;
    s.k = k;
    s.tasks = outcomes.size();
    s.sr_at_1 = pass_at_k_sr(outcomes, 1);
    s.sr_at_k = pass_at_k_sr(outcomes, k);
    for (Difficulty d : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) {
        const auto sub = filter(outcomes, [d](const TaskOutcome& t) { return t.difficulty == d; });
        if (sub.empty()) continue;
        s.sr_at_1_by_difficulty[d] = pass_at_k_sr(sub, 1);
        s.sr_at_k_by_difficulty[d] = pass_at_k_sr(sub, k);
    }
    for (int apps = 1; apps <= 4; ++apps) {
        const auto sub = filter(outcomes, [apps](const TaskOutcome& t) { return t.app_count == apps; });
        if (sub.empty()) continue;
        s.sr_at_1_by_app_count[apps] = pass_at_k_sr(sub, 1);
        s.sr_at_k_by_app_count[apps] = pass_at_k_sr(sub, k);
    }
    bool has_mem = false, has_std = false, has_irr = false;
    for (const auto& t : outcomes) {
        (t.memory_intensive ? has_mem : has_std) = true;
        if (t.memory_intensive && !t.attempts.empty() && t.attempts.front().irr) has_irr = true;
    }
    if (has_irr) s.irr = irr_mean(outcomes);
    if (has_mem && has_std) s.mtpr = mtpr(outcomes);
    if (k >= 2) s.frr = frr(outcomes, k);
    s.efficiency = efficiency_means(outcomes);
    return s;
}

std::string format_fixed(const Rational& value, int decimals) {
    cpp_int scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    const bool negative = value < 0;
    const Rational x = (negative ? -value : value) * scale;
    const cpp_int num = boost::multiprecision::numerator(x);
    const cpp_int den = boost::multiprecision::denominator(x);
    const cpp_int rounded = (2 * num + den) / (2 * den);
    std::string digits = rounded.str();
    if (decimals > 0) {
        if (digits.size() <= static_cast<std::size_t>(decimals))
            digits.insert(0, static_cast<std::size_t>(decimals) + 1 - digits.size(), '0');
        digits.insert(digits.size() - static_cast<std::size_t>(decimals), ".");
    }
    if (negative && rounded != 0) digits.insert(0, "-");
    return digits;
}

}  // namespace membench
