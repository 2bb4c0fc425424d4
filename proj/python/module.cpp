#include "membench/commands.hpp"
#include "membench/error.hpp"
#include "membench/judge.hpp"
#include "membench/metrics.hpp"
#include "membench/suite.hpp"
#include "membench/templates.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace membench;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict score_dict(const EvaluatorScore& s) {
    auto pct = [](const std::optional<Rational>& v) -> py::object {
        return v ? py::object(py::str(format_percent(*v))) : py::object(py::none());
    };
    py::dict d;
    d["tp"] = s.tp;
    d["fp"] = s.fp;
    d["fn"] = s.fn;
    d["tn"] = s.tn;
    d["precision"] = pct(s.precision);
    d["recall"] = pct(s.recall);
    d["f1"] = pct(s.f1);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of the membench GUI-agent benchmark harness";

    py::register_exception<Error>(m, "MembenchError", PyExc_RuntimeError);

    m.def("load_suite", [](const std::string& path) {
        const Suite s = load_suite(path);
        nlohmann::json tasks = nlohmann::json::array();
        for (const auto& t : s.tasks) tasks.push_back(task_to_json(t));
        return to_py({{"suite_id", s.suite_id}, {"schema_version", s.schema_version}, {"tasks", tasks}});
    }, py::arg("path"));
    m.def("suite_stats", [](const std::string& path) { return to_py(to_json(suite_stats(load_suite(path)))); },
          py::arg("path"));
    m.def("classify_difficulty", [](int g) { return std::string(to_string(classify_difficulty(g))); },
          py::arg("golden_steps"));
    m.def("max_rounds", [](int g) { return max_rounds(g); }, py::arg("golden_steps"));
    m.def("max_tokens", [](int g, std::int64_t ref) { return max_tokens(g, ref); }, py::arg("golden_steps"),
          py::arg("reference_tokens_per_step") = default_reference_tokens_per_step);
    m.def("irr_percentage", &irr_percentage, py::arg("correct"), py::arg("total"));

    m.def("render_prompt", [](const std::string& role, const std::map<std::string, std::string>& bindings) {
        const RenderedPrompt p = render_prompt(judge_role_from_string(role), bindings);
        return py::make_tuple(p.system_text, p.user_text);
    }, py::arg("role"), py::arg("bindings"));
    m.def("extract_reply", [](const std::string& role, const std::string& text) {
        return to_py(extract_reply(judge_role_from_string(role), text));
    }, py::arg("role"), py::arg("reply"));

    m.def("score_confusion", [](std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
        return score_dict(score_confusion(tp, fp, fn, tn));
    }, py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn") = 0);
    m.def("format_percent", [](std::int64_t num, std::int64_t den) { return format_percent(Rational(num, den) * 100); },
          py::arg("numerator"), py::arg("denominator"));

    m.def("run", [](const std::string& suite, const std::string& agent, const std::string& judge,
                    const std::string& out, const std::string& run_id, const std::string& world, int k, int workers,
                    const std::string& budget, std::uint64_t seed) {
        cli::RunConfig c;
        c.suite = suite;
        c.agent = agent;
        c.judge = judge;
        c.out = out;
        c.run_id = run_id;
        c.world = world;
        c.k = k;
        c.workers = workers;
        c.budget = budget_mode_from_string(budget);
        c.seed = seed;
        std::ostringstream os;
        int status = 0;
        {
            py::gil_scoped_release release;
            status = cli::cmd_run(c, os);
        }
        return py::make_tuple(status, cli::run_directory(c).string());
    }, py::arg("suite"), py::arg("agent"), py::arg("judge") = "mock:fixture", py::arg("out") = "runs",
       py::arg("run_id") = "", py::arg("world") = "", py::arg("k") = 3, py::arg("workers") = 1,
       py::arg("budget") = "steps", py::arg("seed") = 0);
    m.def("report", [](const std::vector<std::string>& runs, const std::string& fmt) {
        std::ostringstream os;
        cli::cmd_report(runs, "", report_format_from_string(fmt), os);
        return os.str();
    }, py::arg("runs"), py::arg("format") = "txt");
    m.def("reprocess", [](const std::string& run_dir, const std::string& budget, std::int64_t ref,
                          const std::string& fmt) {
        std::ostringstream os;
        cli::cmd_reprocess(run_dir, budget_mode_from_string(budget), ref, report_format_from_string(fmt), os);
        return os.str();
    }, py::arg("run_dir"), py::arg("budget"), py::arg("reference_tokens_per_step") = default_reference_tokens_per_step,
       py::arg("format") = "txt");

}
