#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aviator/cwe.hpp"
#include "aviator/providers.hpp"
#include "aviator/token.hpp"

namespace aviator {

struct AnalysisReport {
    std::string purpose_summary;
    std::string control_flow_notes;
    std::string data_flow_notes;
    std::string io_behavior;

    bool complete() const {
        return !purpose_summary.empty() && !control_flow_notes.empty() &&
               !data_flow_notes.empty() && !io_behavior.empty();
    }
};

struct LineNote {
    int line = 1;
    std::string description;
    std::string weakening_suggestion;  // sanitizers only
};

struct SourcesSinksReport {
    std::vector<LineNote> sources;
    std::vector<LineNote> sinks;
    std::vector<LineNote> sanitizers;
};

struct InjectionCandidate {
    std::string code;
    std::string self_rationale;
};

enum class Verdict { Present, Absent, Undecidable };

const char* to_string(Verdict v);
Verdict verdict_from_string(std::string_view name);

struct AgentVerdict {
    Verdict verdict = Verdict::Undecidable;
    std::string rationale;
    bool cwe_alignment = false;
};

struct AgentConfig {
    double analysis_temperature = 0.2;
    double injector_temperature = 0.8;
    int max_tokens = 2048;
    int parse_retries = 3;  // extra attempts after the first
    std::optional<std::uint64_t> seed;
};

// Inputs assembled for the injector-family prompts. Prompt assembly is a
// pure function of this bundle.
struct PromptBundle {
    SourceFunction function;
    VulnerabilityProfile profile;
    AnalysisReport analysis;            // may be empty for shallow presets
    SourcesSinksReport sources_sinks;   // may be empty
    std::vector<std::string> retrieved_examples;  // annotate_pair renderings
    int attempt = 0;                    // corrective iteration number
    std::string feedback;               // last failure reason, empty initially
};

// Completion parsing helpers (sentinel sections and fenced code).
std::optional<std::string> extract_sentinel_section(const std::string& text,
                                                    const std::string& name);
std::optional<std::string> extract_last_code_fence(const std::string& text);

std::string render_analysis(const AnalysisReport& report);
std::string render_sources_sinks(const SourcesSinksReport& report);

AnalysisReport code_understanding(const SourceFunction& fn, TextGenerationProvider& provider,
                                  const AgentConfig& config = {});

VulnerabilityProfile load_vulnerability_info(std::string_view cwe,
                                             const CweCatalog& catalog = CweCatalog::builtin());

SourcesSinksReport sanitization_detector(const SourceFunction& fn, const AnalysisReport& analysis,
                                         TextGenerationProvider& provider,
                                         const AgentConfig& config = {});

InjectionCandidate vulnerability_injector(const PromptBundle& bundle,
                                          TextGenerationProvider& provider,
                                          const AgentConfig& config = {});

InjectionCandidate corrective_reinjection(const PromptBundle& bundle,
                                          TextGenerationProvider& provider,
                                          const AgentConfig& config = {});

InjectionCandidate monolithic_injection(const PromptBundle& bundle,
                                        TextGenerationProvider& provider,
                                        const AgentConfig& config = {});

// Shape-invalid polished output falls back to the input candidate.
InjectionCandidate polisher(const SourceFunction& fn, const InjectionCandidate& candidate,
                            TextGenerationProvider& provider, const AgentConfig& config = {});

// Byte-identical code short-circuits to Absent without a provider call.
AgentVerdict diff_analyzer(const SourceFunction& fn, const InjectionCandidate& candidate,
                           const std::string& annotated_diff, const std::string& cwe_target,
                           TextGenerationProvider& provider, const AgentConfig& config = {});

AgentVerdict vuln_verifier(const SourceFunction& fn, const InjectionCandidate& candidate,
                           const std::string& cwe_target, const std::string& findings_text,
                           TextGenerationProvider& provider, const AgentConfig& config = {});

InjectionCandidate diff_refiner(const SourceFunction& fn, const InjectionCandidate& candidate,
                                const std::string& annotated_diff,
                                const std::string& failure_reason,
                                TextGenerationProvider& provider,
                                const AgentConfig& config = {});

InjectionCandidate refinement_agent(const SourceFunction& fn, const InjectionCandidate& candidate,
                                    const std::string& verdicts_text,
                                    const std::string& failure_reason,
                                    TextGenerationProvider& provider,
                                    const AgentConfig& config = {});

InjectionCandidate vuln_fixer(const SourceFunction& fn, const InjectionCandidate& candidate,
                              const std::string& verdicts_text,
                              TextGenerationProvider& provider, const AgentConfig& config = {});

}  // namespace aviator
