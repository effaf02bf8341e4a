#include "aviator/prompts.hpp"

#include <array>

#include "aviator/digest.hpp"
#include "aviator/errors.hpp"

namespace aviator {

std::string PromptTemplate::hash() const { return digest_hex(text); }

namespace {

const std::array<PromptTemplate, 11>& templates() {
    static const std::array<PromptTemplate, 11> all = {{
        {"code-understanding", "1",
         "TASK: code-understanding\n"
         "FUNCTION-ID: {{function_id}}\n"
         "Dialect: {{dialect}}\n"
         "\n"
         "Analyze the following function. Describe its purpose, its control\n"
         "flow, its data flow, and its input/output behavior.\n"
         "\n"
         "```{{dialect}}\n{{function_code}}\n```\n"
         "\n"
         "Answer with exactly these four sections:\n"
         "BEGIN_PURPOSE\n<one paragraph>\nEND_PURPOSE\n"
         "BEGIN_CONTROL_FLOW\n<notes>\nEND_CONTROL_FLOW\n"
         "BEGIN_DATA_FLOW\n<notes>\nEND_DATA_FLOW\n"
         "BEGIN_IO\n<notes>\nEND_IO\n"},

        {"sanitization-detection", "1",
         "TASK: sanitization-detection\n"
         "FUNCTION-ID: {{function_id}}\n"
         "Target weakness: {{cwe}} ({{cwe_title}})\n"
         "\n"
         "Prior analysis:\n"
         "{{analysis}}\n"
         "\n"
         "Identify sources (where untrusted input enters), sinks (where\n"
         "sensitive operations consume data), and sanitizers (checks that\n"
         "would prevent the target weakness, with a note on how each could\n"
         "be weakened). Lines are 1-based within the function below.\n"
         "\n"
         "```{{dialect}}\n{{function_code}}\n```\n"
         "\n"
         "Answer with exactly these sections; one item per line formatted\n"
         "as <line>: <description> (sanitizers add ' | <weakening>'):\n"
         "BEGIN_SOURCES\n...\nEND_SOURCES\n"
         "BEGIN_SINKS\n...\nEND_SINKS\n"
         "BEGIN_SANITIZERS\n...\nEND_SANITIZERS\n"},

        {"vulnerability-injection", "1",
         "TASK: vulnerability-injection\n"
         "FUNCTION-ID: {{function_id}}\n"
         "ATTEMPT: {{attempt}}\n"
         "Target weakness: {{cwe}} ({{cwe_title}})\n"
         "{{cwe_description}}\n"
         "Typical patterns: {{cwe_patterns}}\n"
         "\n"
         "Analysis of the function:\n"
         "{{analysis}}\n"
         "\n"
         "Sources, sinks, and sanitizers:\n"
         "{{sources_sinks}}\n"
         "\n"
         "Annotated examples of similar injections ('+' marks injected or\n"
         "modified lines):\n"
         "{{examples}}\n"
         "{{feedback}}"
         "Modify the function below so that it exhibits {{cwe}} while\n"
         "preserving its original behavior otherwise. Keep the edit minimal\n"
         "and realistic; do not change formatting you do not need to touch.\n"
         "\n"
         "```{{dialect}}\n{{function_code}}\n```\n"
         "\n"
         "Answer with:\n"
         "BEGIN_RATIONALE\n<what you changed and why it introduces {{cwe}}>\nEND_RATIONALE\n"
         "followed by the complete modified function in a single fenced\n"
         "code block.\n"},

        {"corrective-reinjection", "1",
         "TASK: corrective-reinjection\n"
         "FUNCTION-ID: {{function_id}}\n"
         "ATTEMPT: {{attempt}}\n"
         "Target weakness: {{cwe}} ({{cwe_title}})\n"
         "\n"
         "A previous attempt to inject this weakness was rejected:\n"
         "BEGIN_FAILURE\n{{failure_reason}}\nEND_FAILURE\n"
         "\n"
         "Analysis of the function:\n"
         "{{analysis}}\n"
         "\n"
         "Sources, sinks, and sanitizers:\n"
         "{{sources_sinks}}\n"
         "\n"
         "Annotated examples of similar injections:\n"
         "{{examples}}\n"
         "\n"
         "Produce a new modification of the original function below that\n"
         "actually introduces {{cwe}}. The change must alter program\n"
         "behavior; whitespace or comment edits will be rejected again.\n"
         "\n"
         "```{{dialect}}\n{{function_code}}\n```\n"
         "\n"
         "Answer with:\n"
         "BEGIN_RATIONALE\n...\nEND_RATIONALE\n"
         "followed by the complete modified function in a single fenced\n"
         "code block.\n"},

        {"monolithic-injection", "1",
         "TASK: monolithic-injection\n"
         "FUNCTION-ID: {{function_id}}\n"
         "ATTEMPT: {{attempt}}\n"
         "Target weakness: {{cwe}} ({{cwe_title}})\n"
         "\n"
         "Annotated examples of similar injections:\n"
         "{{examples}}\n"
         "\n"
         "Analyze the function below step by step, decide where the target\n"
         "weakness can be introduced, apply a minimal realistic edit, and\n"
         "verify your own result before answering.\n"
         "\n"
         "```{{dialect}}\n{{function_code}}\n```\n"
         "\n"
         "Answer with:\n"
         "BEGIN_RATIONALE\n...\nEND_RATIONALE\n"
         "followed by the complete modified function in a single fenced\n"
         "code block.\n"},

        {"polishing", "1",
         "TASK: polishing\n"
         "FUNCTION-ID: {{function_id}}\n"
         "\n"
         "Clean up the modified function below without undoing the injected\n"
         "change: fix indentation, naming consistency, and leftover debris\n"
         "so the edit blends into the surrounding style.\n"
         "\n"
         "```{{dialect}}\n{{candidate_code}}\n```\n"
         "\n"
         "Answer with:\n"
         "BEGIN_RATIONALE\n...\nEND_RATIONALE\n"
         "followed by the complete polished function in a single fenced\n"
         "code block.\n"},

        {"diff-analysis", "1",
         "TASK: diff-analysis\n"
         "FUNCTION-ID: {{function_id}}\n"
         "Target weakness: {{cwe}}\n"
         "\n"
         "Original function:\n"
         "```{{dialect}}\n{{function_code}}\n```\n"
         "\n"
         "Modified function:\n"
         "```{{dialect}}\n{{candidate_code}}\n```\n"
         "\n"
         "Annotated difference ('+' marks changed lines):\n"
         "{{annotated_diff}}\n"
         "\n"
         "Injector's own rationale:\n"
         "{{self_rationale}}\n"
         "\n"
         "Judge whether the edits semantically introduce {{cwe}}, not merely\n"
         "whether the code changed.\n"
         "\n"
         "Answer with:\n"
         "BEGIN_VERDICT\npresent | absent | undecidable\nEND_VERDICT\n"
         "BEGIN_RATIONALE\n...\nEND_RATIONALE\n"
         "BEGIN_CWE_ALIGNMENT\nyes | no\nEND_CWE_ALIGNMENT\n"},

        {"vuln-verification", "1",
         "TASK: vuln-verification\n"
         "FUNCTION-ID: {{function_id}}\n"
         "Target weakness: {{cwe}}\n"
         "\n"
         "Modified function:\n"
         "```{{dialect}}\n{{candidate_code}}\n```\n"
         "\n"
         "Static analysis findings:\n"
         "{{findings}}\n"
         "\n"
         "Considering the findings and the code, decide whether the target\n"
         "weakness is actually present and whether the evidence aligns with\n"
         "{{cwe}}.\n"
         "\n"
         "Answer with:\n"
         "BEGIN_VERDICT\npresent | absent | undecidable\nEND_VERDICT\n"
         "BEGIN_RATIONALE\n...\nEND_RATIONALE\n"
         "BEGIN_CWE_ALIGNMENT\nyes | no\nEND_CWE_ALIGNMENT\n"},

        {"diff-refinement", "1",
         "TASK: diff-refinement\n"
         "FUNCTION-ID: {{function_id}}\n"
         "Target weakness: {{cwe}}\n"
         "\n"
         "The modification below was rejected:\n"
         "BEGIN_FAILURE\n{{failure_reason}}\nEND_FAILURE\n"
         "\n"
         "Annotated difference against the original:\n"
         "{{annotated_diff}}\n"
         "\n"
         "Current modified function:\n"
         "```{{dialect}}\n{{candidate_code}}\n```\n"
         "\n"
         "Apply a targeted, minimal edit that addresses the rejection while\n"
         "keeping the rest of the function intact.\n"
         "\n"
         "Answer with:\n"
         "BEGIN_RATIONALE\n...\nEND_RATIONALE\n"
         "followed by the complete revised function in a single fenced code\n"
         "block.\n"},

        {"refinement", "1",
         "TASK: refinement\n"
         "FUNCTION-ID: {{function_id}}\n"
         "Target weakness: {{cwe}}\n"
         "\n"
         "Validation history (most recent last):\n"
         "{{verdicts}}\n"
         "\n"
         "Latest failure:\n"
         "BEGIN_FAILURE\n{{failure_reason}}\nEND_FAILURE\n"
         "\n"
         "Current modified function:\n"
         "```{{dialect}}\n{{candidate_code}}\n```\n"
         "\n"
         "Revise the function so the injected {{cwe}} weakness survives\n"
         "validation. Address the failure directly.\n"
         "\n"
         "Answer with:\n"
         "BEGIN_RATIONALE\n...\nEND_RATIONALE\n"
         "followed by the complete revised function in a single fenced code\n"
         "block.\n"},

        {"vuln-fixing", "1",
         "TASK: vuln-fixing\n"
         "FUNCTION-ID: {{function_id}}\n"
         "Target weakness: {{cwe}}\n"
         "\n"
         "Original function:\n"
         "```{{dialect}}\n{{function_code}}\n```\n"
         "\n"
         "Validated modified function:\n"
         "```{{dialect}}\n{{candidate_code}}\n```\n"
         "\n"
         "Validation history:\n"
         "{{verdicts}}\n"
         "\n"
         "Final pass: make sure the injected weakness is realistic,\n"
         "contextually valid, and not trivially removable. Strengthen the\n"
         "edit only if needed; otherwise return the function unchanged.\n"
         "\n"
         "Answer with:\n"
         "BEGIN_RATIONALE\n...\nEND_RATIONALE\n"
         "followed by the complete final function in a single fenced code\n"
         "block.\n"},
    }};
    return all;
}

}  // namespace

const PromptTemplate& prompt_template(std::string_view name) {
    for (const PromptTemplate& t : templates()) {
        if (t.name == name) return t;
    }
    throw DomainError("unknown prompt template: " + std::string(name));
}

std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.text.size());
    std::size_t pos = 0;
    while (pos < tmpl.text.size()) {
        std::size_t open = tmpl.text.find("{{", pos);
        if (open == std::string::npos) {
            out.append(tmpl.text, pos, std::string::npos);
            break;
        }
        out.append(tmpl.text, pos, open - pos);
        std::size_t close = tmpl.text.find("}}", open + 2);
        if (close == std::string::npos) {
            throw DomainError("unterminated placeholder in template " + tmpl.name);
        }
        std::string key = tmpl.text.substr(open + 2, close - open - 2);
        auto it = values.find(key);
        if (it == values.end()) {
            throw DomainError("template " + tmpl.name + " missing value for '" + key + "'");
        }
        out += it->second;
        pos = close + 2;
    }
    return out;
}

}  // namespace aviator
