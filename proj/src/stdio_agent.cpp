#include "membench/environment.hpp"
#include "membench/error.hpp"

#include <cerrno>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

namespace membench {

namespace {

class StdioSession final : public AgentSession {
public:
    StdioSession(const std::vector<std::string>& argv, const std::string& isolation_key) {
        int to_child[2];
        int from_child[2];
        if (pipe2(to_child, O_CLOEXEC) != 0 || pipe2(from_child, O_CLOEXEC) != 0)
            throw Error(std::string("pipe: ") + std::strerror(errno));
        // Everything the child needs is built before fork(); only async-signal-safe calls follow.
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        const std::string key_var = "MEMBENCH_ISOLATION_KEY=" + isolation_key;
        std::vector<char*> env;
        for (char** e = environ; *e; ++e)
            if (std::strncmp(*e, "MEMBENCH_ISOLATION_KEY=", 23) != 0) env.push_back(*e);
        env.push_back(const_cast<char*>(key_var.c_str()));
        env.push_back(nullptr);
        pid_ = fork();
        if (pid_ < 0) throw Error(std::string("fork: ") + std::strerror(errno));
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execvpe(args[0], args.data(), env.data());
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        in_ = fdopen(from_child[0], "r");
        out_ = fdopen(to_child[1], "w");
        id_ = isolation_key + "/pid:" + std::to_string(pid_);
    }

    ~StdioSession() override {
        if (out_) fclose(out_);
        if (in_) fclose(in_);
        if (pid_ > 0) {
            int status = 0;
            if (waitpid(pid_, &status, WNOHANG) == 0) {
                kill(pid_, SIGTERM);
                waitpid(pid_, &status, 0);
            }
        }
    }

    void send(const std::string& line) override {
        if (std::fputs(line.c_str(), out_) < 0 || std::fputc('\n', out_) == EOF || std::fflush(out_) != 0)
            throw ProtocolError("agent " + id_ + " closed its input");
    }

    std::string receive() override {
        std::string line;
        for (int c = std::fgetc(in_); c != EOF; c = std::fgetc(in_)) {
            if (c == '\n') return line;
            line += static_cast<char>(c);
        }
        throw ProtocolError("agent " + id_ + " hung up");
    }

    std::string session_id() const override { return id_; }

private:
    pid_t pid_ = -1;
    FILE* in_ = nullptr;
    FILE* out_ = nullptr;
    std::string id_;
};

}  // namespace

StdioAgentEndpoint::StdioAgentEndpoint(std::vector<std::string> argv) : argv_(std::move(argv)) {
    if (argv_.empty()) throw Error("agent command is empty");
    std::signal(SIGPIPE, SIG_IGN);
}

std::unique_ptr<AgentSession> StdioAgentEndpoint::connect(const std::string& isolation_key) {
    return std::make_unique<StdioSession>(argv_, isolation_key);
}

std::string StdioAgentEndpoint::name() const {
    std::string n = "cmd:";
    for (std::size_t i = 0; i < argv_.size(); ++i) n += (i ? " " : "") + argv_[i];
    return n;
}

}  // namespace membench
