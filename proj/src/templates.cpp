#include "membench/templates.hpp"

#include "membench/error.hpp"
#include "membench/util.hpp"

#include <array>
#include <regex>

namespace membench {

// Defined in the generated prompt_assets.cpp.
const std::map<std::string, std::string>& builtin_prompt_assets();

namespace {

constexpr std::array<std::pair<JudgeRole, std::string_view>, 6> role_names{{
    {JudgeRole::triage, "triage"},
    {JudgeRole::step_descriptor, "step_descriptor"},
    {JudgeRole::semantic, "semantic"},
    {JudgeRole::visual, "visual"},
    {JudgeRole::irr_analyzer, "irr_analyzer"},
    {JudgeRole::failure_classifier, "failure_classifier"},
}};

std::set<std::string> scan_placeholders(const std::string& text) {
    static const std::regex re(R"(\{([a-z_]+)\})");
    std::set<std::string> names;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it)
        names.insert((*it)[1].str());
    return names;
}

PromptTemplate make_template(std::string system_text, std::string user_text, std::string version) {
    PromptTemplate t;
    t.placeholders = scan_placeholders(system_text);
    for (auto& n : scan_placeholders(user_text)) t.placeholders.insert(n);
    t.system_text = std::move(system_text);
    t.user_text = std::move(user_text);
    t.version = std::move(version);
    return t;
}

std::string strip_one_newline(std::string s) {
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

}  // namespace

std::string_view to_string(JudgeRole role) {
    for (const auto& [r, n] : role_names)
        if (r == role) return n;
    return "triage";
}

JudgeRole judge_role_from_string(std::string_view name) {
    for (const auto& [r, n] : role_names)
        if (n == name) return r;
    throw ParseError("unknown judge role '" + std::string(name) + "'");
}

const TemplateStore& TemplateStore::builtin() {
    static const TemplateStore store = [] {
        TemplateStore s;
        const auto& assets = builtin_prompt_assets();
        for (const auto& [role, name] : role_names) {
            const std::string dir = role == JudgeRole::failure_classifier ? "classifier-v1" : "v1";
            const std::string base = dir + "/" + std::string(name);
            s.templates_[role] = make_template(strip_one_newline(assets.at(base + ".system.txt")),
                                               strip_one_newline(assets.at(base + ".user.txt")), dir);
        }
        return s;
    }();
    return store;
}

TemplateStore TemplateStore::load_directory(const std::filesystem::path& dir) {
    TemplateStore s = builtin();
    for (const auto& [role, name] : role_names) {
        const auto sys = dir / (std::string(name) + ".system.txt");
        const auto usr = dir / (std::string(name) + ".user.txt");
        if (!std::filesystem::exists(sys) && !std::filesystem::exists(usr)) continue;
        const PromptTemplate& base = s.get(role);
        std::string system_text = std::filesystem::exists(sys) ? strip_one_newline(read_text_file(sys)) : base.system_text;
        std::string user_text = std::filesystem::exists(usr) ? strip_one_newline(read_text_file(usr)) : base.user_text;
        s.templates_[role] = make_template(std::move(system_text), std::move(user_text), dir.filename().string());
    }
    return s;
}

const PromptTemplate& TemplateStore::get(JudgeRole role) const {
    auto it = templates_.find(role);
    if (it == templates_.end()) throw Error("no template for role " + std::string(to_string(role)));
    return it->second;
}

void TemplateStore::set(JudgeRole role, PromptTemplate tmpl) {
    if (tmpl.placeholders.empty()) {
        tmpl = make_template(std::move(tmpl.system_text), std::move(tmpl.user_text), std::move(tmpl.version));
    }
    templates_[role] = std::move(tmpl);
}

std::string substitute_placeholders(std::string_view text, const std::set<std::string>& names,
                                    const Bindings& bindings) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{') {
            const std::size_t close = text.find('}', i + 1);
            if (close != std::string_view::npos) {
                const std::string name(text.substr(i + 1, close - i - 1));
                if (names.count(name)) {
                    auto b = bindings.find(name);
                    if (b == bindings.end()) throw MissingBindingError("missing binding for {" + name + "}");
                    out += b->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += text[i++];
    }
    return out;
}

RenderedPrompt TemplateStore::render(JudgeRole role, const Bindings& bindings) const {
    const PromptTemplate& t = get(role);
    std::string missing;
    for (const auto& name : t.placeholders)
        if (!bindings.count(name)) missing += (missing.empty() ? "{" : ", {") + name + "}";
    if (!missing.empty()) {
        throw MissingBindingError(std::string(to_string(role)) + ": missing binding for " + missing);
    }
    return {substitute_placeholders(t.system_text, t.placeholders, bindings),
            substitute_placeholders(t.user_text, t.placeholders, bindings)};
}

}  // namespace membench
