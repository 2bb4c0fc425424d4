#include "membench/error.hpp"
#include "membench/judge.hpp"

namespace membench {

using nlohmann::json;

namespace {

// End offset (exclusive) of the balanced object starting at `start`, or npos.
std::size_t balanced_end(std::string_view s, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

json first_object(JudgeRole role, std::string_view raw) {
    for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
        const std::size_t end = balanced_end(raw, pos);
        if (end == std::string_view::npos) continue;
        json j = json::parse(raw.substr(pos, end - pos), nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
    }
    throw SchemaError(std::string(to_string(role)), "<reply>", "no JSON object found");
}

class Checker {
public:
    Checker(JudgeRole role, const json& j) : role_(to_string(role)), j_(j) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw SchemaError(role_, field, what);
    }

    const json& need(const std::string& field) const {
        auto it = j_.find(field);
        if (it == j_.end()) fail(field, "missing");
        return *it;
    }

    std::string text(const std::string& field, bool nonempty = false) const {
        const json& v = need(field);
        if (!v.is_string()) fail(field, "expected a string");
        if (nonempty && v.get<std::string>().empty()) fail(field, "must not be empty");
        return v.get<std::string>();
    }

    long long integer(const std::string& field) const {
        const json& v = need(field);
        if (!v.is_number_integer()) fail(field, "expected an integer");
        return v.get<long long>();
    }

    double number(const std::string& field) const {
        const json& v = need(field);
        if (!v.is_number()) fail(field, "expected a number");
        return v.get<double>();
    }

private:
    std::string role_;
    const json& j_;
};

}  // namespace

json extract_reply(JudgeRole role, std::string_view raw_reply) {
    json j = first_object(role, raw_reply);
    Checker c(role, j);
    switch (role) {
        case JudgeRole::triage: {
            c.text("reason");
            const std::string d = c.text("decision");
            if (d != "Success" && d != "Uncertain") c.fail("decision", "must be \"Success\" or \"Uncertain\", got \"" + d + "\"");
            break;
        }
        case JudgeRole::step_descriptor:
            c.text("action_description", true);
            c.text("ui_description", true);
            break;
        case JudgeRole::semantic: {
            const long long d = c.integer("decision");
            if (d != 1 && d != 0 && d != -1) c.fail("decision", "must be 1, 0 or -1");
            c.text("reason");
            auto it = j.find("required_steps");
            if (d == -1) {
                if (it == j.end()) c.fail("required_steps", "required when decision is -1");
                if (!it->is_array() || it->empty()) c.fail("required_steps", "expected a nonempty integer array");
                for (const auto& s : *it)
                    if (!s.is_number_integer()) c.fail("required_steps", "expected a nonempty integer array");
            } else if (it != j.end() && !(it->is_array() && it->empty())) {
                c.fail("required_steps", "only allowed when decision is -1");
            }
            break;
        }
        case JudgeRole::visual: {
            const long long d = c.integer("decision");
            if (d != 1 && d != 0) c.fail("decision", "must be 1 or 0");
            c.text("reason");
            break;
        }
        case JudgeRole::irr_analyzer: {
            if (c.integer("total_information_units") < 0) c.fail("total_information_units", "must be >= 0");
            if (c.integer("correctly_used_units") < 0) c.fail("correctly_used_units", "must be >= 0");
            const double p = c.number("irr_percentage");
            if (p < 0 || p > 100) c.fail("irr_percentage", "must be within 0..100");
            c.text("analysis_reason");
            break;
        }
        case JudgeRole::failure_classifier: {
            const std::string label = c.text("label");
            if (label != "ProcMH" && label != "OMH" && label != "KD" && label != "IM" && label != "Other")
                c.fail("label", "unknown label \"" + label + "\"");
            c.text("reason");
            break;
        }
    }
    return j;
}

}  // namespace membench
