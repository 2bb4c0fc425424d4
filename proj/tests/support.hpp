#pragma once

#include "membench/backend.hpp"
#include "membench/image.hpp"
#include "membench/suite.hpp"
#include "membench/trace.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace membench::testing {

inline std::filesystem::path fixtures_dir() { return MEMBENCH_FIXTURES_DIR; }
inline std::filesystem::path golden_dir() { return MEMBENCH_GOLDEN_DIR; }

/// Temporary directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("membench-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

inline TaskSpec make_task(const std::string& id, int golden, bool memory = false,
                          std::optional<int> units = std::nullopt) {
    TaskSpec t;
    t.task_id = id;
    t.description = "goal of " + id;
    t.apps = {"notes"};
    t.golden_steps = golden;
    t.memory_intensive = memory;
    t.total_information_units = units;
    return t;
}

/// Solid-colour screenshot whose blue channel encodes the step index.
inline Bytes step_png(int step, int w = 40, int h = 60) {
    return encode_png(Image(w, h, Rgb{40, 80, static_cast<std::uint8_t>(100 + step)}));
}

inline AttemptRecord make_attempt(const std::string& task_id, int steps, int attempt_index = 1,
                                  bool with_after = true) {
    AttemptRecord a;
    a.task_id = task_id;
    a.attempt_index = attempt_index;
    for (int i = 0; i < steps; ++i) {
        StepRecord s;
        s.step_index = i;
        s.action_kind = i + 1 == steps ? ActionKind::terminate : ActionKind::click;
        s.action_detail = "step " + std::to_string(i);
        s.screenshot_before = step_png(i);
        if (with_after) s.screenshot_after = step_png(i + 50);
        s.touch_point = Point{20, 30};
        s.wall_time_ms = 1000;
        s.tokens = TokenCount{100, 10};
        s.api_cost = 0.001;
        a.steps.push_back(s);
    }
    a.recompute_totals();
    return a;
}

inline ReplayEntry reply(JudgeRole role, nlohmann::json body) { return {role, body.dump()}; }

inline std::vector<ReplayEntry> descriptor_replies() {
    return {reply(JudgeRole::step_descriptor, {{"action_description", "tapped"}, {"ui_description", "a list"}})};
}

}  // namespace membench::testing
