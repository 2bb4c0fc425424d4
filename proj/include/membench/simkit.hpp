#pragma once

#include "membench/backend.hpp"
#include "membench/budget.hpp"
#include "membench/environment.hpp"
#include "membench/suite.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace membench::simkit {

enum class Injection {
    none,
    drop_one_unit,         // final output misses one information unit (PMH)
    abandon_goal_midway,   // stops halfway believing it is done (ProcMH)
    truncate_output,       // right workflow, empty final output (OMH)
    succeed_on_attempt_n,  // abandons until attempt n, then succeeds
    overrun,               // keeps acting past the step limit
};

std::string_view to_string(Injection i);
Injection injection_from_string(std::string_view s);

struct TaskScript {
    Injection injection = Injection::none;
    int success_attempt = 2;
    // Information units shown on screen; generated when absent.
    std::optional<std::vector<std::string>> units;
    // Explicit action script replacing the generated one (all attempts), with
    // the outcome the fixture judge should report for it.
    std::optional<std::vector<Action>> script;
    bool script_succeeds = true;
};

struct WorldSpec {
    std::string world_id = "world";
    TaskScript defaults;
    std::map<std::string, TaskScript> tasks;
    std::int64_t tokens_in_per_step = 1200;
    std::int64_t tokens_out_per_step = 150;
    double cost_per_step = 0.002;
    std::int64_t tick_ms = 1500;
    int width = 270;
    int height = 480;

    const TaskScript& script_for(const std::string& task_id) const;
};

/// Built-in agent profiles: scripted_ok, scripted_retry, scripted_pmh,
/// scripted_procmh, scripted_omh, scripted_timeout, scripted_heavy.
WorldSpec world_from_profile(const std::string& profile);
std::vector<std::string> profile_names();

WorldSpec world_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WorldSpec& w);
WorldSpec load_world_spec(const std::filesystem::path& path);

/// Information units of a task: T values drawn as text on the task's screens.
std::vector<std::string> information_units(const TaskSpec& task, const WorldSpec& world, std::uint64_t seed);

/// The scripted agent's actions for one attempt, ending with a terminate
/// action unless the script overruns. `step_limit` is the harness's limit.
std::vector<Action> agent_script(const TaskSpec& task, const WorldSpec& world, std::uint64_t seed, int attempt_index,
                                 std::optional<int> step_limit);

/// Whether the fixture judge accepts the given attempt.
bool attempt_succeeds(const TaskSpec& task, const WorldSpec& world, int attempt_index);

/// Linear screen graph S0..S<golden_steps>; "goto S<j>" clicks move between
/// adjacent screens, type_text sets the output field, wait and swipe stay put.
class ScriptedEnvironment final : public EnvironmentDriver {
public:
    ScriptedEnvironment(WorldSpec world, std::uint64_t seed, std::string isolation_key);

    void prepare_task(const TaskSpec& task) override;
    void snapshot() override;
    void restore_snapshot() override;
    Observation observe() override;
    void act(const Action& action) override;
    std::string isolation_key() const override { return key_; }

    int screen() const { return state_.screen; }

private:
    struct State {
        int screen = 0;
        std::string output;
        bool operator==(const State&) const = default;
    };

    WorldSpec world_;
    std::uint64_t seed_;
    std::string key_;
    std::optional<TaskSpec> task_;
    std::vector<std::string> units_;
    State state_;
    State saved_;
};

class ScriptedEnvironmentFactory final : public EnvironmentFactory {
public:
    ScriptedEnvironmentFactory(WorldSpec world, std::uint64_t seed);
    std::unique_ptr<EnvironmentDriver> create_from_image(const std::string& image_id,
                                                         const std::string& isolation_key) override;

private:
    WorldSpec world_;
    std::uint64_t seed_;
};

/// Protocol-level scripted agent: consumes harness lines, produces agent lines.
class ScriptedAgent {
public:
    ScriptedAgent(Suite suite, WorldSpec world, std::uint64_t seed);
    /// Replies (zero or one line) to one harness message. Throws ProtocolError
    /// on out-of-order messages.
    std::vector<std::string> handle(const std::string& line);

private:
    Suite suite_;
    WorldSpec world_;
    std::uint64_t seed_;
    std::vector<Action> script_;
    std::size_t cursor_ = 0;
    bool in_attempt_ = false;
};

class ScriptedAgentEndpoint final : public AgentEndpoint {
public:
    ScriptedAgentEndpoint(Suite suite, WorldSpec world, std::uint64_t seed);
    std::unique_ptr<AgentSession> connect(const std::string& isolation_key) override;
    std::string name() const override { return "simkit:" + world_.world_id; }

private:
    Suite suite_;
    WorldSpec world_;
    std::uint64_t seed_;
};

/// Canned judge replies consistent with the scripted agent's behaviour, keyed
/// by (task, attempt, role).
std::vector<ReplayEntry> fixture_transcript(const Suite& suite, const WorldSpec& world, const BudgetPolicy& budget,
                                            std::uint64_t seed);

struct Fixture {
    std::shared_ptr<EnvironmentFactory> environments;
    std::shared_ptr<AgentEndpoint> agent;
    std::vector<ReplayEntry> transcript;
};

/// Builds a mutually consistent environment/agent/judge triple. Throws
/// ValidationError when the world names unknown tasks or a script leaves the
/// screen graph.
Fixture make_fixture(const Suite& suite, const WorldSpec& world, const BudgetPolicy& budget, std::uint64_t seed);

/// Image id accepted by ScriptedEnvironmentFactory.
inline constexpr const char* image_id = "simkit";

}  // namespace membench::simkit
