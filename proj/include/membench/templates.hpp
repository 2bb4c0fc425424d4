#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>

namespace membench {

enum class JudgeRole { triage, step_descriptor, semantic, visual, irr_analyzer, failure_classifier };

std::string_view to_string(JudgeRole role);
JudgeRole judge_role_from_string(std::string_view name);

struct PromptTemplate {
    std::string system_text;
    std::string user_text;
    std::set<std::string> placeholders;  // names without braces
    std::string version;
};

using Bindings = std::map<std::string, std::string>;

struct RenderedPrompt {
    std::string system_text;
    std::string user_text;
    bool operator==(const RenderedPrompt&) const = default;
};

/// Prompt templates keyed by role. The evaluator prompts are versioned as
/// "v1"; the failure-mode classifier prompt is versioned separately.
class TemplateStore {
public:
    /// Templates compiled into the library from assets/prompts/.
    static const TemplateStore& builtin();
    /// Loads <role>.system.txt / <role>.user.txt files found in `dir`, on top
    /// of the built-in set.
    static TemplateStore load_directory(const std::filesystem::path& dir);

    const PromptTemplate& get(JudgeRole role) const;
    void set(JudgeRole role, PromptTemplate tmpl);

    /// Substitutes every declared `{name}` placeholder in one pass; bound text
    /// is never rescanned. Throws MissingBindingError for unbound placeholders.
    RenderedPrompt render(JudgeRole role, const Bindings& bindings) const;

private:
    std::map<JudgeRole, PromptTemplate> templates_;
};

inline RenderedPrompt render_prompt(JudgeRole role, const Bindings& bindings,
                                    const TemplateStore& store = TemplateStore::builtin()) {
    return store.render(role, bindings);
}

/// Placeholder substitution on a single text. Exposed for tests.
std::string substitute_placeholders(std::string_view text, const std::set<std::string>& names,
                                    const Bindings& bindings);

}  // namespace membench
