#pragma once

#include <map>
#include <string>
#include <string_view>

namespace aviator {

struct PromptTemplate {
    std::string name;
    std::string version;
    std::string text;

    std::string hash() const;  // fnv1a64 hex of the text
};

// Versioned built-in template registry; throws DomainError on unknown names.
const PromptTemplate& prompt_template(std::string_view name);

// Replaces {{key}} placeholders. Unknown placeholders are an error so that
// template drift is caught immediately.
std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& values);

}  // namespace aviator
