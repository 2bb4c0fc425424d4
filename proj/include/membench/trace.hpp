#pragma once

#include "membench/image.hpp"
#include "membench/util.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace membench {

enum class ActionKind { click, long_press, type_text, swipe, open_app, navigate_back, wait, terminate, other };

std::string_view to_string(ActionKind kind);
/// Throws ParseError for unknown names.
ActionKind action_kind_from_string(std::string_view name);

struct Point {
    int x = 0;
    int y = 0;
    bool operator==(const Point&) const = default;
};

struct TokenCount {
    std::int64_t in = 0;
    std::int64_t out = 0;
    std::int64_t total() const { return in + out; }
    bool operator==(const TokenCount&) const = default;
};

struct StepRecord {
    int step_index = 0;
    ActionKind action_kind = ActionKind::other;
    std::string action_detail;
    Bytes screenshot_before;  // PNG
    std::optional<Bytes> screenshot_after;
    std::optional<Point> touch_point;
    std::optional<std::string> ui_tree;
    std::optional<std::string> thought;
    std::int64_t wall_time_ms = 0;
    // Absent when the agent did not report token usage for this step.
    std::optional<TokenCount> tokens;
    std::optional<double> api_cost;

    bool operator==(const StepRecord&) const = default;
};

enum class Termination { agent_terminated, step_limit_exceeded, token_budget_exceeded, harness_error };

std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view name);
inline bool is_budget_stop(Termination t) {
    return t == Termination::step_limit_exceeded || t == Termination::token_budget_exceeded;
}

struct AttemptRecord {
    std::string task_id;
    int attempt_index = 1;
    std::vector<StepRecord> steps;
    int agent_steps = 0;
    std::int64_t total_time_ms = 0;
    std::int64_t total_tokens = 0;
    std::optional<double> total_cost;
    Termination termination = Termination::agent_terminated;
    // Hash of the first observation of the attempt (snapshot fidelity check).
    std::string start_observation_hash;
    std::string error;

    /// Recomputes agent_steps and the totals from the steps.
    void recompute_totals();
    /// True when every step carries token accounting.
    bool has_token_accounting() const;

    bool operator==(const AttemptRecord&) const = default;
};

/// Throws ValidationError if totals or step ordering are inconsistent.
void validate_attempt(const AttemptRecord& attempt);

enum class CompositeLayout { last_n_strip, before_after_panel, requested_strip };

std::string_view to_string(CompositeLayout layout);

struct CompositeImage {
    Image pixels;
    std::vector<int> member_steps;
    CompositeLayout layout = CompositeLayout::last_n_strip;
};

/// Width of the divider drawn between panes.
inline constexpr int pane_divider_px = 4;

/// Screenshot shown for a step in strips: the after-action frame when present,
/// otherwise the before-action frame.
const Bytes& strip_frame(const StepRecord& step);

/// Strip of the last min(n, |steps|) screenshots, left to right in step order.
CompositeImage compose_last_n(const AttemptRecord& attempt, int n);

/// Before panel (annotated with the touch marker) on the left, after panel on
/// the right. A missing after-screenshot duplicates the before panel.
CompositeImage compose_before_after(const StepRecord& step);

/// Strip of exactly the requested steps, sorted ascending and deduplicated.
/// Throws UnknownStepError for an index outside the attempt.
CompositeImage compose_requested(const AttemptRecord& attempt, std::span<const int> required_steps);

struct MarkerGeometry {
    int radius = 1;
    int square_side = 3;
    int glyph_scale = 1;
};

MarkerGeometry marker_geometry(int width, int height);
void draw_touch_marker(Image& image, Point p);

/// SHA-256 over raw pixels plus the optional UI tree.
std::string observation_hash(const Bytes& screenshot_png, const std::optional<std::string>& ui_tree);

nlohmann::json step_to_json(const StepRecord& step);
/// Reads an `actions` record. Screenshots are not part of the record.
StepRecord step_from_json(const nlohmann::json& j);

struct AttemptKey {
    std::string task_id;
    int attempt_index = 1;
    auto operator<=>(const AttemptKey&) const = default;
};

/// Append-only on-disk episode store rooted at runs/<run_id>/.
///
/// Layout per attempt: <task_id>/attempt_<n>/{meta, actions, steps/<i>_before.png,
/// steps/<i>_after.png}. One writer per open attempt; readers only touch
/// closed attempts.
class TraceStore {
public:
    explicit TraceStore(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path attempt_dir(const AttemptKey& key) const;

    void open_attempt(const AttemptKey& key);
    void record_step(const AttemptKey& key, const StepRecord& step);
    /// Finalizes totals and writes meta. Returns the closed record.
    AttemptRecord close_attempt(const AttemptKey& key, Termination termination,
                                const std::string& start_observation_hash, const std::string& error = {});

    /// Writes a whole record at once (open + steps + close).
    void write_attempt(const AttemptRecord& attempt);
    AttemptRecord read_attempt(const AttemptKey& key) const;
    /// Closed attempts present on disk, sorted by key.
    std::vector<AttemptKey> list_attempts() const;

private:
    struct OpenAttempt {
        AttemptRecord record;
    };

    void write_meta(const AttemptRecord& record, bool closed) const;

    std::filesystem::path root_;
    mutable std::mutex mutex_;
    std::map<AttemptKey, OpenAttempt> open_;
};

}  // namespace membench
