#pragma once

#include "membench/suite.hpp"
#include "membench/trace.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace membench {

struct Observation {
    Bytes screenshot_png;
    std::optional<std::string> ui_tree;
};

struct Action {
    ActionKind kind = ActionKind::other;
    std::string detail;
    std::optional<Point> touch_point;
};

/// Device under test. One instance per worker; never shared.
class EnvironmentDriver {
public:
    virtual ~EnvironmentDriver() = default;

    /// Puts the device in the task's starting state (launcher, seeded data).
    virtual void prepare_task(const TaskSpec& task) {}
    virtual void snapshot() = 0;
    /// Returns to the state captured by the last snapshot().
    virtual void restore_snapshot() = 0;
    virtual Observation observe() = 0;
    virtual void act(const Action& action) = 0;
    virtual std::string isolation_key() const = 0;
};

class EnvironmentFactory {
public:
    virtual ~EnvironmentFactory() = default;
    /// Boots an instance from `image_id` bound to `isolation_key` (e.g. an
    /// emulator port). Throws Error on provisioning failure.
    virtual std::unique_ptr<EnvironmentDriver> create_from_image(const std::string& image_id,
                                                                 const std::string& isolation_key) = 0;
};

/// Isolation key of worker w: emulator-style console port "port:<5554 + 2w>".
std::string worker_isolation_key(int worker);

/// A line-oriented connection to one agent process. Lines carry the JSON
/// messages of the agent wire protocol.
class AgentSession {
public:
    virtual ~AgentSession() = default;
    virtual void send(const std::string& line) = 0;
    /// Blocks for the next line. Throws ProtocolError when the agent hangs up.
    virtual std::string receive() = 0;
    virtual std::string session_id() const = 0;
};

class AgentEndpoint {
public:
    virtual ~AgentEndpoint() = default;
    virtual std::unique_ptr<AgentSession> connect(const std::string& isolation_key) = 0;
    virtual std::string name() const = 0;
};

/// Spawns `argv` per session and speaks the protocol over its stdin/stdout.
/// MEMBENCH_ISOLATION_KEY is set in the child's environment.
class StdioAgentEndpoint final : public AgentEndpoint {
public:
    explicit StdioAgentEndpoint(std::vector<std::string> argv);
    std::unique_ptr<AgentSession> connect(const std::string& isolation_key) override;
    std::string name() const override;

private:
    std::vector<std::string> argv_;
};

/// Splits a command line on whitespace, honouring single and double quotes.
std::vector<std::string> split_command_line(const std::string& command);

}  // namespace membench
