#include "membench/environment.hpp"

#include "membench/error.hpp"

namespace membench {

std::string worker_isolation_key(int worker) { return "port:" + std::to_string(5554 + 2 * worker); }

std::vector<std::string> split_command_line(const std::string& command) {
    std::vector<std::string> out;
    std::string cur;
    bool have = false;
    char quote = 0;
    for (char c : command) {
        if (quote) {
            if (c == quote)
                quote = 0;
            else
                cur += c;
        } else if (c == '\'' || c == '"') {
            quote = c;
            have = true;
        } else if (c == ' ' || c == '\t') {
            if (have) out.push_back(cur);
            cur.clear();
            have = false;
        } else {
            cur += c;
            have = true;
        }
    }
    if (quote) throw ParseError("unterminated quote in command line");
    if (have) out.push_back(cur);
    return out;
}

}  // namespace membench
