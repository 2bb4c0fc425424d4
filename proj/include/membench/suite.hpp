#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace membench {

enum class Difficulty { easy, medium, hard };

std::string_view to_string(Difficulty d);

/// Easy for 1..20 golden steps, Medium for 21..40, Hard from 41 up.
/// Throws std::invalid_argument for golden_steps < 1.
Difficulty classify_difficulty(int golden_steps);

struct Category {
    std::string main;
    std::string sub;
    bool operator==(const Category&) const = default;
};

struct TaskSpec {
    std::string task_id;
    std::string description;
    std::vector<std::string> apps;
    int golden_steps = 1;
    bool memory_intensive = false;
    // Ground-truth information-unit count; overrides the IRR analyzer's count.
    std::optional<int> total_information_units;
    std::optional<std::string> mirror_id;
    std::vector<Category> categories;
    std::string notes;
    // Unknown manifest fields, preserved for round trips.
    nlohmann::json extra = nlohmann::json::object();

    Difficulty difficulty() const { return classify_difficulty(golden_steps); }
    int app_count() const { return static_cast<int>(apps.size()); }

    bool operator==(const TaskSpec&) const = default;
};

struct Suite {
    static constexpr int current_schema_version = 1;

    std::string suite_id;
    int schema_version = current_schema_version;
    std::vector<TaskSpec> tasks;

    const TaskSpec* find(std::string_view task_id) const;
    const TaskSpec& at(std::string_view task_id) const;

    std::size_t memory_task_count() const;
    std::size_t standard_task_count() const { return tasks.size() - memory_task_count(); }

    bool operator==(const Suite&) const = default;
};

/// Checks every Suite/TaskSpec invariant; throws ValidationError.
void validate_suite(const Suite& suite);

/// Reads a line-delimited manifest. Throws ParseError (with "source:line")
/// or ValidationError.
Suite parse_suite(std::istream& in, const std::string& source = "<manifest>");
Suite load_suite(const std::filesystem::path& path);

void write_suite(std::ostream& out, const Suite& suite);
void save_suite(const Suite& suite, const std::filesystem::path& path);

nlohmann::json task_to_json(const TaskSpec& task);
TaskSpec task_from_json(const nlohmann::json& j);

struct Bucket {
    std::string key;
    std::size_t count = 0;
    double percent = 0.0;
};

struct SuiteStats {
    std::size_t total = 0;
    std::vector<Bucket> by_difficulty;
    std::vector<Bucket> by_app_count;
    std::vector<Bucket> by_memory;
    // Keyed by the main label of each task's first category.
    std::vector<Bucket> by_category;
    std::size_t mirror_pairs = 0;
};

SuiteStats suite_stats(const Suite& suite);
nlohmann::json to_json(const SuiteStats& stats);

}  // namespace membench
