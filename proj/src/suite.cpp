#include "membench/suite.hpp"

#include "membench/error.hpp"
#include "membench/util.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace membench {

using nlohmann::json;

std::string_view to_string(Difficulty d) {
    switch (d) {
        case Difficulty::easy: return "Easy";
        case Difficulty::medium: return "Medium";
        case Difficulty::hard: return "Hard";
    }
    return "Easy";
}

Difficulty classify_difficulty(int golden_steps) {
    if (golden_steps < 1) {
        throw std::invalid_argument("golden_steps must be >= 1, got " + std::to_string(golden_steps));
    }
    if (golden_steps <= 20) return Difficulty::easy;
    if (golden_steps <= 40) return Difficulty::medium;
    return Difficulty::hard;
}

const TaskSpec* Suite::find(std::string_view task_id) const {
    auto it = std::find_if(tasks.begin(), tasks.end(),
                           [&](const TaskSpec& t) { return t.task_id == task_id; });
    return it == tasks.end() ? nullptr : &*it;
}

const TaskSpec& Suite::at(std::string_view task_id) const {
    if (const TaskSpec* t = find(task_id)) return *t;
    throw ValidationError("unknown task_id '" + std::string(task_id) + "'");
}

std::size_t Suite::memory_task_count() const {
    return static_cast<std::size_t>(
        std::count_if(tasks.begin(), tasks.end(), [](const TaskSpec& t) { return t.memory_intensive; }));
}

namespace {

const std::set<std::string> known_task_fields = {
    "task_id", "description", "apps", "golden_steps", "memory_intensive",
    "total_information_units", "mirror_id", "categories", "notes"};

template <typename T>
T require_field(const json& j, const char* name) {
    if (!j.contains(name)) throw ParseError(std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string("field '") + name + "' has the wrong type");
    }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* name) {
    if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string("field '") + name + "' has the wrong type");
    }
}

Category category_from_json(const json& c) {
    if (c.is_array() && c.size() == 2 && c[0].is_string() && c[1].is_string()) {
        return {c[0].get<std::string>(), c[1].get<std::string>()};
    }
    if (c.is_object() && c.contains("main") && c["main"].is_string()) {
        return {c["main"].get<std::string>(), c.value("sub", std::string{})};
    }
    throw ParseError("categories entries must be [main, sub] pairs");
}

}  // namespace

TaskSpec task_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("task record must be an object");
    TaskSpec t;
    t.task_id = require_field<std::string>(j, "task_id");
    t.description = require_field<std::string>(j, "description");
    t.apps = require_field<std::vector<std::string>>(j, "apps");
    t.golden_steps = require_field<int>(j, "golden_steps");
    t.memory_intensive = optional_field<bool>(j, "memory_intensive").value_or(false);
    t.total_information_units = optional_field<int>(j, "total_information_units");
    t.mirror_id = optional_field<std::string>(j, "mirror_id");
    if (j.contains("categories") && !j["categories"].is_null()) {
        if (!j["categories"].is_array()) throw ParseError("field 'categories' must be an array");
        for (const auto& c : j["categories"]) t.categories.push_back(category_from_json(c));
    }
    t.notes = optional_field<std::string>(j, "notes").value_or("");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known_task_fields.count(it.key())) t.extra[it.key()] = it.value();
    }
    return t;
}

json task_to_json(const TaskSpec& t) {
    json j = json::object();
    j["task_id"] = t.task_id;
    j["description"] = t.description;
    j["apps"] = t.apps;
    j["golden_steps"] = t.golden_steps;
    j["memory_intensive"] = t.memory_intensive;
    if (t.total_information_units) j["total_information_units"] = *t.total_information_units;
    if (t.mirror_id) j["mirror_id"] = *t.mirror_id;
    json cats = json::array();
    for (const auto& c : t.categories) cats.push_back({c.main, c.sub});
    j["categories"] = cats;
    j["notes"] = t.notes;
    for (auto it = t.extra.begin(); it != t.extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

void validate_suite(const Suite& suite) {
    if (suite.schema_version != Suite::current_schema_version) {
        throw ValidationError("unsupported schema_version " + std::to_string(suite.schema_version));
    }
    if (suite.tasks.empty()) throw ValidationError("suite must contain >=1 task");

    std::map<std::string, const TaskSpec*> by_id;
    for (const auto& t : suite.tasks) {
        if (!is_safe_identifier(t.task_id)) {
            throw ValidationError("task_id '" + t.task_id + "' must match [A-Za-z0-9._-]+");
        }
        if (!by_id.emplace(t.task_id, &t).second) {
            throw ValidationError("duplicate task_id '" + t.task_id + "'");
        }
        if (t.golden_steps < 1) {
            throw ValidationError("task '" + t.task_id + "': golden_steps must be >= 1");
        }
        if (t.apps.empty() || t.apps.size() > 4) {
            throw ValidationError("task '" + t.task_id + "': apps must list 1 to 4 entries");
        }
        if (std::set<std::string>(t.apps.begin(), t.apps.end()).size() != t.apps.size()) {
            throw ValidationError("task '" + t.task_id + "': apps must be distinct");
        }
        if (t.total_information_units && *t.total_information_units < 1) {
            throw ValidationError("task '" + t.task_id + "': total_information_units must be positive");
        }
    }
    for (const auto& t : suite.tasks) {
        if (!t.mirror_id) continue;
        if (*t.mirror_id == t.task_id) {
            throw ValidationError("task '" + t.task_id + "' mirrors itself");
        }
        auto it = by_id.find(*t.mirror_id);
        if (it == by_id.end()) {
            throw ValidationError("task '" + t.task_id + "': dangling mirror_id '" + *t.mirror_id + "'");
        }
        const TaskSpec& other = *it->second;
        if (!other.mirror_id || *other.mirror_id != t.task_id) {
            throw ValidationError("asymmetric mirror: '" + t.task_id + "' -> '" + other.task_id +
                                  "' is not reciprocated");
        }
    }
}

Suite parse_suite(std::istream& in, const std::string& source) {
    Suite suite;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(where + "malformed record: " + e.what());
        }
        try {
            if (!have_header) {
                if (!j.is_object() || !j.contains("schema_version")) {
                    throw ParseError("first record must be the header carrying schema_version");
                }
                suite.schema_version = require_field<int>(j, "schema_version");
                suite.suite_id = optional_field<std::string>(j, "suite_id").value_or("");
                have_header = true;
                continue;
            }
            suite.tasks.push_back(task_from_json(j));
        } catch (const ParseError& e) {
            throw ParseError(where + e.what());
        }
    }
    if (!have_header) throw ParseError(source + ": empty manifest (no header record)");
    validate_suite(suite);
    return suite;
}

Suite load_suite(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read suite manifest " + path.string());
    return parse_suite(in, path.string());
}

void write_suite(std::ostream& out, const Suite& suite) {
    json header = {{"schema_version", suite.schema_version}, {"suite_id", suite.suite_id}};
    out << header.dump() << '\n';
    for (const auto& t : suite.tasks) out << task_to_json(t).dump() << '\n';
}

void save_suite(const Suite& suite, const std::filesystem::path& path) {
    std::ostringstream os;
    write_suite(os, suite);
    write_text_file(path, os.str());
}

namespace {

std::vector<Bucket> make_buckets(const std::vector<std::pair<std::string, std::size_t>>& counts,
                                 std::size_t total) {
    std::vector<Bucket> out;
    for (const auto& [key, n] : counts) {
        out.push_back({key, n, total ? 100.0 * static_cast<double>(n) / static_cast<double>(total) : 0.0});
    }
    return out;
}

}  // namespace

SuiteStats suite_stats(const Suite& suite) {
    SuiteStats s;
    s.total = suite.tasks.size();

    std::size_t diff[3] = {0, 0, 0};
    std::map<int, std::size_t> apps;
    std::map<std::string, std::size_t> cats;
    std::size_t memory = 0;
    for (const auto& t : suite.tasks) {
        ++diff[static_cast<int>(t.difficulty())];
        ++apps[t.app_count()];
        if (t.memory_intensive) ++memory;
        ++cats[t.categories.empty() ? std::string("uncategorized") : t.categories.front().main];
        if (t.mirror_id && t.task_id < *t.mirror_id) ++s.mirror_pairs;
    }

    s.by_difficulty = make_buckets({{"Easy", diff[0]}, {"Medium", diff[1]}, {"Hard", diff[2]}}, s.total);
    std::vector<std::pair<std::string, std::size_t>> app_counts;
    for (int n = 1; n <= 4; ++n) app_counts.emplace_back(std::to_string(n) + "-app", apps[n]);
    s.by_app_count = make_buckets(app_counts, s.total);
    s.by_memory = make_buckets({{"memory", memory}, {"standard", s.total - memory}}, s.total);
    s.by_category = make_buckets({cats.begin(), cats.end()}, s.total);
    return s;
}

json to_json(const SuiteStats& stats) {
    auto buckets = [](const std::vector<Bucket>& bs) {
        json arr = json::array();
        for (const auto& b : bs) arr.push_back({{"key", b.key}, {"count", b.count}, {"percent", b.percent}});
        return arr;
    };
    return {{"total", stats.total},
            {"mirror_pairs", stats.mirror_pairs},
            {"by_difficulty", buckets(stats.by_difficulty)},
            {"by_app_count", buckets(stats.by_app_count)},
            {"by_memory", buckets(stats.by_memory)},
            {"by_category", buckets(stats.by_category)}};
}

}  // namespace membench
