#include "membench/reports.hpp"

#include "membench/error.hpp"
#include "membench/util.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <stdexcept>

namespace membench {

namespace fs = std::filesystem;

namespace {

const std::string missing = "-";

std::string pct(const std::optional<Rational>& v) { return v ? format_percent(*v) : missing; }

std::string ratio(const std::optional<Rational>& v) { return v ? format_ratio(*v) : missing; }

std::string seconds(const std::optional<Rational>& v) { return v ? format_fixed(*v, 1) : missing; }

std::string cost(const std::optional<Rational>& v) { return v ? format_fixed(*v, 4) : missing; }

std::string delta(const std::optional<Rational>& base, const std::optional<Rational>& now) {
    if (!base || !now) return missing;
    const Rational d = *now - *base;
    std::string s = format_percent(d);
    if (d > 0) s.insert(0, "+");
    return s;
}

std::optional<Rational> at(const std::map<Difficulty, Rational>& m, Difficulty d) {
    auto it = m.find(d);
    return it == m.end() ? std::nullopt : std::optional<Rational>(it->second);
}

std::optional<Rational> at(const std::map<int, Rational>& m, int n) {
    auto it = m.find(n);
    return it == m.end() ? std::nullopt : std::optional<Rational>(it->second);
}

int common_k(const std::vector<AgentReport>& agents) { return agents.empty() ? 3 : agents.front().summary.k; }

std::string sr_k(int k) { return "SR@" + std::to_string(k); }

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

}  // namespace

std::string_view to_string(ReportFormat f) {
    switch (f) {
        case ReportFormat::csv: return "csv";
        case ReportFormat::json: return "json";
        case ReportFormat::txt: return "txt";
    }
    return "txt";
}

ReportFormat report_format_from_string(std::string_view s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    if (s == "txt" || s == "table" || s == "text") return ReportFormat::txt;
    throw ParseError("unknown format '" + std::string(s) + "' (expected csv, json or txt)");
}

AgentReport agent_report(const RunResult& run) {
    if (run.tasks.empty()) throw std::invalid_argument("run has no tasks to report");
    AgentReport r;
    r.agent = run.agent;
    r.summary = summarize(outcomes_from_run(run), run.budget.k);
    for (const auto& tr : run.tasks)
        for (const auto& ar : tr.attempts)
            if (!ar.verdict.is_success())
                r.labels.push_back(ar.verdict.label.value_or(FailureLabel{FailureMode::Other, LabelBasis::mechanical, "unlabelled"}));
    return r;
}

Table leaderboard_table(const std::vector<AgentReport>& agents) {
    const int k = common_k(agents);
    Table t{"leaderboard", "Leaderboard (success rate %, pass@1 and pass@" + std::to_string(k) + ")", {}, {}};
    t.header = {"Agent", "SR@1", sr_k(k)};
    for (auto d : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) {
        t.header.push_back(std::string(to_string(d)) + " SR@1");
        t.header.push_back(std::string(to_string(d)) + " " + sr_k(k));
    }
    for (const auto& a : agents) {
        std::vector<std::string> row{a.agent, format_percent(a.summary.sr_at_1), format_percent(a.summary.sr_at_k)};
        for (auto d : {Difficulty::easy, Difficulty::medium, Difficulty::hard}) {
            row.push_back(pct(at(a.summary.sr_at_1_by_difficulty, d)));
            row.push_back(pct(at(a.summary.sr_at_k_by_difficulty, d)));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table short_term_table(const std::vector<AgentReport>& agents) {
    Table t{"short_term", "Short-term memory (pass@1)", {"Agent", "SR@1", "IRR", "MTPR", "Step Ratio", "Time/Step (s)", "Cost/Step"}, {}};
    for (const auto& a : agents) {
        const auto& s = a.summary;
        t.rows.push_back({a.agent, format_percent(s.sr_at_1), pct(s.irr), ratio(s.mtpr), ratio(s.efficiency.step_ratio),
                          seconds(s.efficiency.seconds_per_step), cost(s.efficiency.cost_per_step)});
    }
    return t;
}

Table long_term_table(const std::vector<AgentReport>& agents) {
    const int k = common_k(agents);
    Table t{"long_term", "Long-term memory (pass@" + std::to_string(k) + ")",
            {"Agent", sr_k(k), "FRR", "Step Ratio", "Time/Step (s)", "Cost/Step"}, {}};
    for (const auto& a : agents) {
        const auto& s = a.summary;
        t.rows.push_back({a.agent, format_percent(s.sr_at_k), pct(s.frr.frr), ratio(s.efficiency.step_ratio),
                          seconds(s.efficiency.seconds_per_step), cost(s.efficiency.cost_per_step)});
    }
    return t;
}

Table cross_app_table(const std::vector<AgentReport>& agents) {
    const int k = common_k(agents);
    Table t{"cross_app", "Success rate % by number of apps", {"Agent"}, {}};
    for (int n = 1; n <= 4; ++n) {
        t.header.push_back(std::to_string(n) + "-app SR@1");
        t.header.push_back(std::to_string(n) + "-app " + sr_k(k));
    }
    for (const auto& a : agents) {
        std::vector<std::string> row{a.agent};
        for (int n = 1; n <= 4; ++n) {
            row.push_back(pct(at(a.summary.sr_at_1_by_app_count, n)));
            row.push_back(pct(at(a.summary.sr_at_k_by_app_count, n)));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table failures_table(const std::vector<AgentReport>& agents) {
    Table t{"failures", "Failure modes (% of non-timeout failures; judge-assisted labels are approximate)",
            {"Agent", "Failures", "Timeout %"}, {}};
    for (FailureMode m : heatmap_modes()) t.header.push_back(std::string(to_string(m)) + " %");
    t.header.push_back("Judge-assisted");
    std::map<std::string, std::vector<FailureLabel>> by_agent;
    std::map<std::string, std::size_t> assisted;
    for (const auto& a : agents) {
        auto& v = by_agent[a.agent];
        v.insert(v.end(), a.labels.begin(), a.labels.end());
        for (const auto& l : a.labels)
            if (l.basis == LabelBasis::judge_assisted) ++assisted[a.agent];
    }
    for (const auto& row : aggregate_failures(by_agent)) {
        std::vector<std::string> r{row.agent, std::to_string(row.failures), format_percent(row.timeout_rate)};
        for (FailureMode m : heatmap_modes()) {
            auto it = row.mode_percent.find(m);
            r.push_back(it == row.mode_percent.end() ? missing : format_percent(it->second));
        }
        r.push_back(std::to_string(assisted[row.agent]));
        t.rows.push_back(std::move(r));
    }
    return t;
}

Table compute_normalized_table(const std::vector<std::pair<AgentReport, AgentReport>>& pairs) {
    const int k = pairs.empty() ? 3 : pairs.front().first.summary.k;
    const std::string sk = sr_k(k);
    Table t{"compute_normalized", "Compute-normalized evaluation (budgeted minus unconstrained; negative = degradation)",
            {"Agent", "SR@1", "SR@1 budget", "dSR@1", sk, sk + " budget", "d" + sk, "IRR", "IRR budget", "dIRR"},
            {}};
    for (const auto& [base, now] : pairs) {
        const auto& b = base.summary;
        const auto& n = now.summary;
        t.rows.push_back({base.agent, format_percent(b.sr_at_1), format_percent(n.sr_at_1), delta(b.sr_at_1, n.sr_at_1),
                          format_percent(b.sr_at_k), format_percent(n.sr_at_k), delta(b.sr_at_k, n.sr_at_k), pct(b.irr),
                          pct(n.irr), delta(b.irr, n.irr)});
    }
    return t;
}

std::string render(const Table& table, ReportFormat format) {
    std::ostringstream os;
    switch (format) {
        case ReportFormat::csv: {
            for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << csv_cell(table.header[i]);
            os << '\n';
            for (const auto& row : table.rows) {
                for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
                os << '\n';
            }
            break;
        }
        case ReportFormat::json: {
            nlohmann::ordered_json j;
            j["table"] = table.name;
            j["title"] = table.title;
            j["rows"] = nlohmann::ordered_json::array();
            for (const auto& row : table.rows) {
                nlohmann::ordered_json r;
                for (std::size_t i = 0; i < row.size() && i < table.header.size(); ++i) r[table.header[i]] = row[i];
                j["rows"].push_back(r);
            }
            os << j.dump(2) << '\n';
            break;
        }
        case ReportFormat::txt: {
            std::vector<std::size_t> width(table.header.size());
            for (std::size_t i = 0; i < width.size(); ++i) width[i] = table.header[i].size();
            for (const auto& row : table.rows)
                for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) width[i] = std::max(width[i], row[i].size());
            auto line = [&](const std::vector<std::string>& cells) {
                std::string out;
                for (std::size_t i = 0; i < width.size(); ++i) {
                    const std::string& c = i < cells.size() ? cells[i] : missing;
                    const std::string pad(width[i] - c.size(), ' ');
                    if (i) out += "  ";
                    out += i == 0 ? c + pad : pad + c;
                }
                while (!out.empty() && out.back() == ' ') out.pop_back();
                return out;
            };
            os << table.title << '\n';
            const std::string head = line(table.header);
            os << head << '\n' << std::string(head.size(), '-') << '\n';
            for (const auto& row : table.rows) os << line(row) << '\n';
            break;
        }
    }
    return os.str();
}

std::vector<fs::path> emit_reports(const std::vector<AgentReport>& agents, const fs::path& dir,
                                   const std::vector<ReportFormat>& formats,
                                   const std::vector<std::pair<AgentReport, AgentReport>>& deltas) {
    if (agents.empty()) throw std::invalid_argument("no runs to report");
    std::vector<Table> tables{leaderboard_table(agents), short_term_table(agents), long_term_table(agents),
                              cross_app_table(agents), failures_table(agents)};
    if (!deltas.empty()) tables.push_back(compute_normalized_table(deltas));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create report directory " + dir.string() + ": " + ec.message());
    std::vector<fs::path> written;
    for (const auto& t : tables) {
        for (ReportFormat f : formats) {
            const fs::path p = dir / (t.name + "." + std::string(to_string(f)));
            write_text_file(p, render(t, f));
            written.push_back(p);
        }
    }
    return written;
}

}  // namespace membench
