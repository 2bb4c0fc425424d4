#include "membench/error.hpp"
#include "membench/metrics.hpp"
#include "membench/run.hpp"

#include <fstream>
#include <stdexcept>

namespace membench {

using boost::multiprecision::cpp_int;
using nlohmann::json;

EvaluatorScore score_confusion(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    EvaluatorScore s;
    s.tp = tp;
    s.fp = fp;
    s.fn = fn;
    s.tn = tn;
    if (tp + fp) s.precision = Rational(cpp_int(100 * tp), cpp_int(tp + fp));
    if (tp + fn) s.recall = Rational(cpp_int(100 * tp), cpp_int(tp + fn));
    if (2 * tp + fp + fn) s.f1 = Rational(cpp_int(200 * tp), cpp_int(2 * tp + fp + fn));
    return s;
}

EvaluatorScore score_evaluator(const std::map<std::string, JudgedTrajectory>& verdicts,
                               const std::map<std::string, bool>& human_labels) {
    for (const auto& [id, v] : verdicts)
        if (!human_labels.count(id)) throw std::invalid_argument("trajectory '" + id + "' has no human label");
    for (const auto& [id, l] : human_labels)
        if (!verdicts.count(id)) throw std::invalid_argument("labelled trajectory '" + id + "' has no verdict");
    if (verdicts.empty()) throw std::invalid_argument("no trajectories to score");

    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    Rational cost = 0;
    for (const auto& [id, v] : verdicts) {
        const bool truth = human_labels.at(id);
        if (v.predicted_success && truth) ++tp;
        else if (v.predicted_success) ++fp;
        else if (truth) ++fn;
        else ++tn;
        cost += to_rational(v.judge_cost);
    }
    EvaluatorScore s = score_confusion(tp, fp, fn, tn);
    s.mean_cost = cost / Rational(cpp_int(verdicts.size()));
    return s;
}

std::map<std::string, bool> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read labels file " + path);
    std::map<std::string, bool> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            const std::string id = j.at("trajectory_id").get<std::string>();
            const json& l = j.at("label");
            bool value;
            if (l.is_boolean())
                value = l.get<bool>();
            else if (l == "success")
                value = true;
            else if (l == "failure")
                value = false;
            else
                throw ParseError("label must be \"success\" or \"failure\"");
            if (!out.emplace(id, value).second) throw ParseError("duplicate trajectory id '" + id + "'");
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

std::map<std::string, JudgedTrajectory> judged_trajectories(const RunResult& run) {
    std::map<std::string, JudgedTrajectory> out;
    for (const auto& tr : run.tasks) {
        for (const auto& ar : tr.attempts) {
            JudgedTrajectory j;
            j.predicted_success = ar.verdict.is_success();
            for (const auto& ex : ar.verdict.exchanges) j.judge_cost += ex.cost;
            out[tr.task_id + "/attempt_" + std::to_string(ar.attempt.attempt_index)] = j;
        }
    }
    return out;
}

}  // namespace membench
