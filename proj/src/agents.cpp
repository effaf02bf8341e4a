#include "aviator/agents.hpp"

#include <algorithm>
#include <sstream>

#include "aviator/edit_script.hpp"
#include "aviator/errors.hpp"
#include "aviator/line_diff.hpp"
#include "aviator/prompts.hpp"

namespace aviator {

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Present: return "present";
    case Verdict::Absent: return "absent";
    case Verdict::Undecidable: return "undecidable";
    }
    return "undecidable";
}

Verdict verdict_from_string(std::string_view name) {
    if (name == "present") return Verdict::Present;
    if (name == "absent") return Verdict::Absent;
    if (name == "undecidable") return Verdict::Undecidable;
    throw ParseFailure("unknown verdict: " + std::string(name));
}

namespace {

constexpr const char* kSystemPrompt =
    "You are a careful C/C++ security analysis assistant. Follow the output "
    "format in the task exactly; do not add sections.";

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::optional<std::string> extract_sentinel_section(const std::string& text,
                                                    const std::string& name) {
    const std::string begin = "BEGIN_" + name;
    const std::string end = "END_" + name;
    std::size_t b = text.find(begin);
    if (b == std::string::npos) return std::nullopt;
    b += begin.size();
    std::size_t e = text.find(end, b);
    if (e == std::string::npos) return std::nullopt;
    return trim(text.substr(b, e - b));
}

std::optional<std::string> extract_last_code_fence(const std::string& text) {
    // models often restate inputs first, so take the last fenced block
    std::vector<std::pair<std::size_t, std::size_t>> fences;
    std::size_t pos = 0;
    while (true) {
        std::size_t open = text.find("```", pos);
        if (open == std::string::npos) break;
        std::size_t body = text.find('\n', open + 3);
        if (body == std::string::npos) break;
        ++body;
        std::size_t close = text.find("```", body);
        if (close == std::string::npos) break;
        fences.emplace_back(body, close);
        pos = close + 3;
    }
    if (fences.empty()) return std::nullopt;
    auto [b, e] = fences.back();
    std::string code = text.substr(b, e - b);
    // the fence's final newline belongs to the fence, not the code
    if (!code.empty() && code.back() == '\n') code.pop_back();
    return code;
}

std::string render_analysis(const AnalysisReport& report) {
    if (!report.complete()) return "(not available)";
    return "Purpose: " + report.purpose_summary + "\nControl flow: " +
           report.control_flow_notes + "\nData flow: " + report.data_flow_notes +
           "\nInput/output: " + report.io_behavior;
}

std::string render_sources_sinks(const SourcesSinksReport& report) {
    if (report.sources.empty() && report.sinks.empty() && report.sanitizers.empty()) {
        return "(none identified)";
    }
    std::ostringstream out;
    out << "Sources:\n";
    for (const LineNote& n : report.sources) {
        out << "  " << n.line << ": " << n.description << "\n";
    }
    out << "Sinks:\n";
    for (const LineNote& n : report.sinks) {
        out << "  " << n.line << ": " << n.description << "\n";
    }
    out << "Sanitizers:\n";
    for (const LineNote& n : report.sanitizers) {
        out << "  " << n.line << ": " << n.description;
        if (!n.weakening_suggestion.empty()) out << " | " << n.weakening_suggestion;
        out << "\n";
    }
    return out.str();
}

namespace {

std::vector<ChatMessage> make_messages(const std::string& user_prompt) {
    return {{"system", kSystemPrompt}, {"user", user_prompt}};
}

GenerationParams analysis_params(const AgentConfig& c) {
    GenerationParams p;
    p.temperature = c.analysis_temperature;
    p.max_tokens = c.max_tokens;
    p.seed = c.seed;
    return p;
}

GenerationParams injector_params(const AgentConfig& c) {
    GenerationParams p;
    p.temperature = c.injector_temperature;
    p.max_tokens = c.max_tokens;
    p.seed = c.seed;
    return p;
}

// Runs generate-then-parse with the configured retry budget. Parse failures
// re-invoke the provider; the last failure propagates.
template <typename ParseFn>
auto with_parse_retries(TextGenerationProvider& provider,
                        const std::vector<ChatMessage>& messages,
                        const GenerationParams& params, int retries, ParseFn parse) {
    int attempts = retries + 1;
    for (int attempt = 0;; ++attempt) {
        std::string completion = provider.generate(messages, params);
        try {
            return parse(completion);
        } catch (const ParseFailure&) {
            if (attempt + 1 >= attempts) throw;
        }
    }
}

int count_lines(const std::string& code) {
    return static_cast<int>(split_lines(code).size());
}

std::vector<LineNote> parse_line_notes(const std::string& section, int max_line,
                                       bool with_weakening) {
    std::vector<LineNote> notes;
    std::istringstream in(section);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t == "(none)") continue;
        std::size_t colon = t.find(':');
        if (colon == std::string::npos) throw ParseFailure("line note without ':': " + t);
        int line_no;
        try {
            line_no = std::stoi(t.substr(0, colon));
        } catch (const std::exception&) {
            throw ParseFailure("line note without a number: " + t);
        }
        if (line_no < 1 || line_no > std::max(max_line, 1)) {
            throw ParseFailure("line " + std::to_string(line_no) +
                               " outside the function's range");
        }
        LineNote note;
        note.line = line_no;
        std::string rest = trim(t.substr(colon + 1));
        if (with_weakening) {
            std::size_t bar = rest.find('|');
            if (bar != std::string::npos) {
                note.weakening_suggestion = trim(rest.substr(bar + 1));
                rest = trim(rest.substr(0, bar));
            }
        }
        note.description = rest;
        if (note.description.empty()) throw ParseFailure("line note without description");
        notes.push_back(std::move(note));
    }
    return notes;
}

InjectionCandidate parse_candidate(const std::string& completion) {
    auto code = extract_last_code_fence(completion);
    if (!code || trim(*code).empty()) {
        throw ParseFailure("completion has no fenced code block");
    }
    auto rationale = extract_sentinel_section(completion, "RATIONALE");
    if (!rationale || rationale->empty()) {
        throw ParseFailure("completion has no RATIONALE section");
    }
    return {*code, *rationale};
}

AgentVerdict parse_verdict(const std::string& completion) {
    auto verdict = extract_sentinel_section(completion, "VERDICT");
    auto rationale = extract_sentinel_section(completion, "RATIONALE");
    auto alignment = extract_sentinel_section(completion, "CWE_ALIGNMENT");
    if (!verdict || !rationale || !alignment) {
        throw ParseFailure("verdict completion missing a required section");
    }
    AgentVerdict out;
    out.verdict = verdict_from_string(trim(*verdict));
    out.rationale = *rationale;
    std::string a = trim(*alignment);
    if (a == "yes") {
        out.cwe_alignment = true;
    } else if (a == "no") {
        out.cwe_alignment = false;
    } else {
        throw ParseFailure("CWE_ALIGNMENT must be yes or no, got: " + a);
    }
    return out;
}

std::map<std::string, std::string> bundle_values(const PromptBundle& b) {
    std::string examples;
    for (const std::string& e : b.retrieved_examples) {
        examples += e;
        if (!e.empty() && e.back() != '\n') examples += "\n";
        examples += "\n";
    }
    if (examples.empty()) examples = "(no examples retrieved)\n";
    std::string feedback;
    if (!b.feedback.empty()) {
        feedback = "Feedback on the previous attempt:\nBEGIN_FAILURE\n" + b.feedback +
                   "\nEND_FAILURE\n\n";
    }
    return {
        {"function_id", b.function.id},
        {"function_code", b.function.code},
        {"dialect", to_string(b.function.dialect)},
        {"attempt", std::to_string(b.attempt)},
        {"cwe", b.profile.cwe},
        {"cwe_title", b.profile.title},
        {"cwe_description", b.profile.description},
        {"cwe_patterns", b.profile.typical_patterns},
        {"analysis", render_analysis(b.analysis)},
        {"sources_sinks", render_sources_sinks(b.sources_sinks)},
        {"examples", examples},
        {"failure_reason", b.feedback.empty() ? "(none)" : b.feedback},
        {"feedback", feedback},
    };
}

}  // namespace

AnalysisReport code_understanding(const SourceFunction& fn, TextGenerationProvider& provider,
                                  const AgentConfig& config) {
    if (fn.code.empty()) throw DomainError("code_understanding on empty function");
    std::string prompt = render_prompt(prompt_template("code-understanding"),
                                       {{"function_id", fn.id},
                                        {"function_code", fn.code},
                                        {"dialect", to_string(fn.dialect)}});
    return with_parse_retries(
        provider, make_messages(prompt), analysis_params(config), config.parse_retries,
        [](const std::string& completion) {
            AnalysisReport report;
            auto purpose = extract_sentinel_section(completion, "PURPOSE");
            auto control = extract_sentinel_section(completion, "CONTROL_FLOW");
            auto data = extract_sentinel_section(completion, "DATA_FLOW");
            auto io = extract_sentinel_section(completion, "IO");
            if (!purpose || !control || !data || !io) {
                throw ParseFailure("analysis completion missing a section");
            }
            report.purpose_summary = *purpose;
            report.control_flow_notes = *control;
            report.data_flow_notes = *data;
            report.io_behavior = *io;
            if (!report.complete()) throw ParseFailure("analysis section empty");
            return report;
        });
}

VulnerabilityProfile load_vulnerability_info(std::string_view cwe, const CweCatalog& catalog) {
    return catalog.require(cwe);
}

SourcesSinksReport sanitization_detector(const SourceFunction& fn,
                                         const AnalysisReport& analysis,
                                         TextGenerationProvider& provider,
                                         const AgentConfig& config) {
    VulnerabilityProfile profile;
    if (!fn.cwe_target.empty()) {
        if (auto p = CweCatalog::builtin().find(fn.cwe_target)) profile = *p;
        else profile.cwe = normalize_cwe(fn.cwe_target);
    }
    std::string prompt = render_prompt(prompt_template("sanitization-detection"),
                                       {{"function_id", fn.id},
                                        {"function_code", fn.code},
                                        {"dialect", to_string(fn.dialect)},
                                        {"cwe", profile.cwe.empty() ? "(unspecified)" : profile.cwe},
                                        {"cwe_title", profile.title.empty() ? "" : profile.title},
                                        {"analysis", render_analysis(analysis)}});
    int max_line = count_lines(fn.code);
    return with_parse_retries(
        provider, make_messages(prompt), analysis_params(config), config.parse_retries,
        [max_line](const std::string& completion) {
            auto sources = extract_sentinel_section(completion, "SOURCES");
            auto sinks = extract_sentinel_section(completion, "SINKS");
            auto sanitizers = extract_sentinel_section(completion, "SANITIZERS");
            if (!sources || !sinks || !sanitizers) {
                throw ParseFailure("sources/sinks completion missing a section");
            }
            SourcesSinksReport report;
            report.sources = parse_line_notes(*sources, max_line, false);
            report.sinks = parse_line_notes(*sinks, max_line, false);
            report.sanitizers = parse_line_notes(*sanitizers, max_line, true);
            return report;
        });
}

InjectionCandidate vulnerability_injector(const PromptBundle& bundle,
                                          TextGenerationProvider& provider,
                                          const AgentConfig& config) {
    std::string prompt =
        render_prompt(prompt_template("vulnerability-injection"), bundle_values(bundle));
    return with_parse_retries(provider, make_messages(prompt), injector_params(config),
                              config.parse_retries, parse_candidate);
}

InjectionCandidate corrective_reinjection(const PromptBundle& bundle,
                                          TextGenerationProvider& provider,
                                          const AgentConfig& config) {
    std::string prompt =
        render_prompt(prompt_template("corrective-reinjection"), bundle_values(bundle));
    return with_parse_retries(provider, make_messages(prompt), injector_params(config),
                              config.parse_retries, parse_candidate);
}

InjectionCandidate monolithic_injection(const PromptBundle& bundle,
                                        TextGenerationProvider& provider,
                                        const AgentConfig& config) {
    std::string prompt =
        render_prompt(prompt_template("monolithic-injection"), bundle_values(bundle));
    return with_parse_retries(provider, make_messages(prompt), injector_params(config),
                              config.parse_retries, parse_candidate);
}

InjectionCandidate polisher(const SourceFunction& fn, const InjectionCandidate& candidate,
                            TextGenerationProvider& provider, const AgentConfig& config) {
    std::string prompt = render_prompt(prompt_template("polishing"),
                                       {{"function_id", fn.id},
                                        {"candidate_code", candidate.code},
                                        {"dialect", to_string(fn.dialect)}});
    InjectionCandidate polished;
    try {
        polished = with_parse_retries(provider, make_messages(prompt), analysis_params(config),
                                      config.parse_retries, parse_candidate);
    } catch (const ParseFailure&) {
        return candidate;  // cosmetic stage; keep the unpolished candidate
    }
    ShapeReport shape = check_functional_shape(tokenize(fn.code, fn.dialect),
                                               tokenize(polished.code, fn.dialect));
    if (!shape.balanced_delimiters || !shape.nonempty) {
        return candidate;
    }
    if (polished.self_rationale.empty()) polished.self_rationale = candidate.self_rationale;
    return polished;
}

AgentVerdict diff_analyzer(const SourceFunction& fn, const InjectionCandidate& candidate,
                           const std::string& annotated_diff, const std::string& cwe_target,
                           TextGenerationProvider& provider, const AgentConfig& config) {
    if (fn.code == candidate.code) {
        return {Verdict::Absent, "candidate is byte-identical to the benign function", false};
    }
    std::string prompt = render_prompt(prompt_template("diff-analysis"),
                                       {{"function_id", fn.id},
                                        {"function_code", fn.code},
                                        {"candidate_code", candidate.code},
                                        {"annotated_diff", annotated_diff},
                                        {"self_rationale", candidate.self_rationale},
                                        {"cwe", cwe_target},
                                        {"dialect", to_string(fn.dialect)}});
    return with_parse_retries(provider, make_messages(prompt), analysis_params(config),
                              config.parse_retries, parse_verdict);
}

AgentVerdict vuln_verifier(const SourceFunction& fn, const InjectionCandidate& candidate,
                           const std::string& cwe_target, const std::string& findings_text,
                           TextGenerationProvider& provider, const AgentConfig& config) {
    std::string prompt = render_prompt(prompt_template("vuln-verification"),
                                       {{"function_id", fn.id},
                                        {"candidate_code", candidate.code},
                                        {"findings", findings_text},
                                        {"cwe", cwe_target},
                                        {"dialect", to_string(fn.dialect)}});
    return with_parse_retries(provider, make_messages(prompt), analysis_params(config),
                              config.parse_retries, parse_verdict);
}

InjectionCandidate diff_refiner(const SourceFunction& fn, const InjectionCandidate& candidate,
                                const std::string& annotated_diff,
                                const std::string& failure_reason,
                                TextGenerationProvider& provider, const AgentConfig& config) {
    std::string prompt = render_prompt(prompt_template("diff-refinement"),
                                       {{"function_id", fn.id},
                                        {"candidate_code", candidate.code},
                                        {"annotated_diff", annotated_diff},
                                        {"failure_reason", failure_reason},
                                        {"cwe", fn.cwe_target},
                                        {"dialect", to_string(fn.dialect)}});
    return with_parse_retries(provider, make_messages(prompt), injector_params(config),
                              config.parse_retries, parse_candidate);
}

InjectionCandidate refinement_agent(const SourceFunction& fn,
                                    const InjectionCandidate& candidate,
                                    const std::string& verdicts_text,
                                    const std::string& failure_reason,
                                    TextGenerationProvider& provider,
                                    const AgentConfig& config) {
    std::string prompt = render_prompt(prompt_template("refinement"),
                                       {{"function_id", fn.id},
                                        {"candidate_code", candidate.code},
                                        {"verdicts", verdicts_text},
                                        {"failure_reason", failure_reason},
                                        {"cwe", fn.cwe_target},
                                        {"dialect", to_string(fn.dialect)}});
    return with_parse_retries(provider, make_messages(prompt), injector_params(config),
                              config.parse_retries, parse_candidate);
}

InjectionCandidate vuln_fixer(const SourceFunction& fn, const InjectionCandidate& candidate,
                              const std::string& verdicts_text,
                              TextGenerationProvider& provider, const AgentConfig& config) {
    std::string prompt = render_prompt(prompt_template("vuln-fixing"),
                                       {{"function_id", fn.id},
                                        {"function_code", fn.code},
                                        {"candidate_code", candidate.code},
                                        {"verdicts", verdicts_text},
                                        {"cwe", fn.cwe_target},
                                        {"dialect", to_string(fn.dialect)}});
    InjectionCandidate fixed;
    try {
        fixed = with_parse_retries(provider, make_messages(prompt), injector_params(config),
                                   config.parse_retries, parse_candidate);
    } catch (const ParseFailure&) {
        return candidate;  // terminal pass must not kill a validated run
    }
    ShapeReport shape = check_functional_shape(tokenize(fn.code, fn.dialect),
                                               tokenize(fixed.code, fn.dialect));
    if (!shape.balanced_delimiters || !shape.nonempty || shape.trivial) {
        return candidate;
    }
    return fixed;
}

}  // namespace aviator
