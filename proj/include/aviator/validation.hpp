#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "aviator/agents.hpp"
#include "aviator/token.hpp"

namespace aviator {

enum class FindingSeverity { Error, Warning, Style, Info };

const char* to_string(FindingSeverity s);

struct StaticAnalysisFinding {
    std::string tool;      // "cppcheck" | "esbmc"
    std::string check_id;  // tool-native id
    std::string cwe;       // "CWE-<n>" or empty
    FindingSeverity severity = FindingSeverity::Info;
    int line = 1;
    std::string message;
};

enum class VerificationStatus { VerifiedSafe, CounterexampleFound, Timeout, ToolError };

const char* to_string(VerificationStatus s);

struct VerificationOutcome {
    VerificationStatus status = VerificationStatus::ToolError;
    int bound_used = 100;
    double elapsed_seconds = 0.0;
    std::string counterexample_summary;  // non-empty iff CounterexampleFound
};

struct ToolPaths {
    std::string cppcheck;  // empty -> AVIATOR_CPPCHECK_PATH env, else "cppcheck"
    std::string esbmc;     // empty -> AVIATOR_ESBMC_PATH env, else "esbmc"
};

std::string resolve_cppcheck_path(const ToolPaths& paths = {});
std::string resolve_esbmc_path(const ToolPaths& paths = {});

// Minimal translation-unit harness: forward declarations for identifiers
// that are called but never declared in the snippet. Too many unknowns mark
// the static stage undecidable.
struct HarnessResult {
    std::string code;
    std::vector<std::string> unknown_identifiers;
};

HarnessResult wrap_translation_unit(std::string_view code, Dialect dialect);

inline constexpr int kUnknownIdentifierLimit = 5;

// Parses cppcheck --xml --xml-version=2 error output (stderr).
std::vector<StaticAnalysisFinding> parse_cppcheck_xml(const std::string& xml);

std::vector<StaticAnalysisFinding> run_cppcheck(std::string_view code, Dialect dialect,
                                                const ToolPaths& paths = {});

// Maps ESBMC textual output to an outcome; exposed for fixture tests.
VerificationOutcome parse_esbmc_output(const std::string& output, bool timed_out,
                                       int exit_code, int bound, double elapsed);

VerificationOutcome run_esbmc(std::string_view code, int bound = 100, int timeout_seconds = 300,
                              const ToolPaths& paths = {});

struct GateResult {
    bool pass = false;
    std::string reason;  // trivial category on reject
};

// Rejects iff is_trivial_change is true.
GateResult triviality_gate(std::string_view benign, std::string_view candidate,
                           Dialect dialect = Dialect::Cpp);

struct AlignmentResult {
    bool aligned = false;
    std::vector<StaticAnalysisFinding> matching;
};

// Aligned iff any finding's CWE equals the target or is an ancestor or
// descendant in the bundled relation table.
AlignmentResult cwe_alignment(const std::vector<StaticAnalysisFinding>& findings,
                              std::string_view target_cwe);

enum class ValidationStage { Triviality, DiffAnalysis, StaticAnalysis, Final };

const char* to_string(ValidationStage s);

struct ValidationVerdict {
    ValidationStage stage = ValidationStage::Final;
    Verdict verdict = Verdict::Undecidable;
    std::string evidence;
    int iteration = 0;
};

enum class NextAction { Accept, Refine, Reinject, GiveUp };

const char* to_string(NextAction a);

// Snapshot of one validation round, fed to the pure decision function.
struct ValidationContext {
    std::string benign;
    std::string candidate;
    std::string cwe_target;
    Dialect dialect = Dialect::Cpp;
    std::optional<Verdict> diff_agent_verdict;  // diff analyzer, when the stage ran
    std::optional<Verdict> verifier_verdict;    // vuln verifier, when the stage ran
    bool static_stage_available = true;
    bool static_aligned = false;
    int iteration = 0;
    int max_corrections = 10;
    bool has_diff_stage = true;    // preset >= W7
    bool has_static_stage = true;  // preset >= W9
    bool has_refiner = true;       // preset >= W11
};

struct ValidationDecision {
    ValidationVerdict verdict;
    NextAction action = NextAction::GiveUp;
};

// Deterministic function of (verdicts, iteration counter, preset shape);
// give-up only once the correction budget is exhausted.
ValidationDecision validation_pass(const ValidationContext& ctx);

std::string render_findings(const std::vector<StaticAnalysisFinding>& findings);

FindingSeverity severity_from_string(std::string_view name);
ValidationStage validation_stage_from_string(std::string_view name);

nlohmann::ordered_json finding_to_json(const StaticAnalysisFinding& f);
StaticAnalysisFinding finding_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json validation_verdict_to_json(const ValidationVerdict& v);
ValidationVerdict validation_verdict_from_json(const nlohmann::ordered_json& j);

}  // namespace aviator
