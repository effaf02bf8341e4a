#pragma once

// Deterministic rule-based provider for offline tests: a pure function of the
// prompt text, so recording and replay reproduce runs exactly.

#include <atomic>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "aviator/providers.hpp"

namespace aviator::testing {

inline std::optional<std::string> prompt_field(const std::string& prompt,
                                               const std::string& field) {
    std::string needle = field + ": ";
    std::size_t pos = prompt.find(needle);
    if (pos != 0) {
        needle = "\n" + needle;
        pos = prompt.find(needle);
        if (pos == std::string::npos) return std::nullopt;
        pos += 1;
    }
    pos += field.size() + 2;
    std::size_t end = prompt.find('\n', pos);
    return prompt.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

inline std::string last_fence(const std::string& text) {
    std::size_t close = text.rfind("\n```");
    if (close == std::string::npos) return "";
    std::size_t open = text.rfind("```", close - 1);
    if (open == std::string::npos) return "";
    std::size_t body = text.find('\n', open);
    if (body == std::string::npos || body + 1 > close) return "";
    return text.substr(body + 1, close - body);  // keeps the final newline
}

// marker the fake injector plants; the fake analyzer and verifier look for it
inline constexpr const char* kInjectionMarker = "vuln_probe";
inline constexpr const char* kRefinementMarker = "refined_probe";

inline std::string real_edit(std::string code) {
    std::string snippet = "    int vuln_probe[2];\n    vuln_probe[3] = 1;\n";
    std::size_t brace = code.rfind('}');
    if (brace == std::string::npos) return code + "\n" + snippet;
    return code.substr(0, brace) + snippet + code.substr(brace);
}

inline std::string refine_edit(std::string code) {
    std::string snippet = "    int refined_probe = 1;\n";
    std::size_t brace = code.rfind('}');
    if (brace == std::string::npos) return code + "\n" + snippet;
    return code.substr(0, brace) + snippet + code.substr(brace);
}

inline std::string trivial_edit(std::string code) { return code + "\n   \n"; }

class ScriptedProvider final : public TextGenerationProvider {
public:
    struct Behavior {
        // attempts below real_after produce whitespace-only output
        int real_after = 0;
        bool analyzer_present = true;
        bool verifier_present = true;
        // the analyzer accepts only refined candidates
        bool analyzer_requires_refinement = false;
    };

    Behavior default_behavior;
    std::map<std::string, Behavior> behaviors;  // keyed by function id
    std::set<std::string> garbage_tasks;        // tasks answered unparseably
    mutable std::atomic<int> calls{0};
    mutable std::atomic<int> injector_calls{0};

    std::string generate(const std::vector<ChatMessage>& messages,
                         const GenerationParams&) override {
        ++calls;
        const std::string& prompt = messages.back().content;
        std::string task = prompt_field(prompt, "TASK").value_or("");
        std::string fn_id = prompt_field(prompt, "FUNCTION-ID").value_or("");
        int attempt = 0;
        if (auto a = prompt_field(prompt, "ATTEMPT")) {
            attempt = std::atoi(a->c_str());
        }
        Behavior behavior = default_behavior;
        if (auto it = behaviors.find(fn_id); it != behaviors.end()) behavior = it->second;
        if (garbage_tasks.count(task)) {
            return "I cannot follow the requested format.";
        }

        if (task == "code-understanding") {
            return "BEGIN_PURPOSE\nComputes a value from its arguments.\nEND_PURPOSE\n"
                   "BEGIN_CONTROL_FLOW\nStraight-line with one guard.\nEND_CONTROL_FLOW\n"
                   "BEGIN_DATA_FLOW\nArguments flow to the return value.\nEND_DATA_FLOW\n"
                   "BEGIN_IO\nNo side effects.\nEND_IO\n";
        }
        if (task == "sanitization-detection") {
            return "BEGIN_SOURCES\n1: function arguments\nEND_SOURCES\n"
                   "BEGIN_SINKS\n1: return value\nEND_SINKS\n"
                   "BEGIN_SANITIZERS\n1: guard condition | remove the bound check\n"
                   "END_SANITIZERS\n";
        }
        if (task == "vulnerability-injection" || task == "corrective-reinjection" ||
            task == "monolithic-injection") {
            ++injector_calls;
            std::string code = last_fence(prompt);
            std::string out = attempt >= behavior.real_after ? real_edit(code)
                                                             : trivial_edit(code);
            return "BEGIN_RATIONALE\nWeakened the function as requested.\nEND_RATIONALE\n"
                   "```c\n" + out + (out.empty() || out.back() != '\n' ? "\n" : "") + "```\n";
        }
        if (task == "polishing" || task == "vuln-fixing") {
            std::string code = last_fence(prompt);
            return "BEGIN_RATIONALE\nNo changes needed.\nEND_RATIONALE\n"
                   "```c\n" + code + (code.empty() || code.back() != '\n' ? "\n" : "") + "```\n";
        }
        if (task == "diff-refinement" || task == "refinement") {
            std::string code = refine_edit(last_fence(prompt));
            return "BEGIN_RATIONALE\nApplied a targeted refinement.\nEND_RATIONALE\n"
                   "```c\n" + code + (code.empty() || code.back() != '\n' ? "\n" : "") + "```\n";
        }
        if (task == "diff-analysis") {
            bool present = behavior.analyzer_present &&
                           prompt.find(kInjectionMarker) != std::string::npos;
            if (behavior.analyzer_requires_refinement &&
                prompt.find(kRefinementMarker) == std::string::npos) {
                present = false;
            }
            return std::string("BEGIN_VERDICT\n") + (present ? "present" : "absent") +
                   "\nEND_VERDICT\nBEGIN_RATIONALE\n" +
                   (present ? "The edit introduces the weakness." : "No weakness visible.") +
                   "\nEND_RATIONALE\nBEGIN_CWE_ALIGNMENT\n" + (present ? "yes" : "no") +
                   "\nEND_CWE_ALIGNMENT\n";
        }
        if (task == "vuln-verification") {
            bool present = behavior.verifier_present &&
                           prompt.find(kInjectionMarker) != std::string::npos;
            return std::string("BEGIN_VERDICT\n") + (present ? "present" : "absent") +
                   "\nEND_VERDICT\nBEGIN_RATIONALE\n" +
                   (present ? "Evidence matches the target weakness."
                            : "Evidence does not support the weakness.") +
                   "\nEND_RATIONALE\nBEGIN_CWE_ALIGNMENT\n" + (present ? "yes" : "no") +
                   "\nEND_CWE_ALIGNMENT\n";
        }
        return "UNKNOWN TASK";
    }

    bool supports_seed() const override { return true; }
    std::string model_name() const override { return "scripted-test-model"; }
};

}  // namespace aviator::testing
