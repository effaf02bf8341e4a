#include "aviator/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <unistd.h>

#include "aviator/cwe.hpp"
#include "aviator/digest.hpp"
#include "aviator/errors.hpp"
#include "aviator/subprocess.hpp"
#include "aviator/triviality.hpp"

namespace aviator {

const char* to_string(FindingSeverity s) {
    switch (s) {
    case FindingSeverity::Error: return "error";
    case FindingSeverity::Warning: return "warning";
    case FindingSeverity::Style: return "style";
    case FindingSeverity::Info: return "info";
    }
    return "info";
}

const char* to_string(VerificationStatus s) {
    switch (s) {
    case VerificationStatus::VerifiedSafe: return "verified-safe";
    case VerificationStatus::CounterexampleFound: return "counterexample-found";
    case VerificationStatus::Timeout: return "timeout";
    case VerificationStatus::ToolError: return "tool-error";
    }
    return "tool-error";
}

const char* to_string(ValidationStage s) {
    switch (s) {
    case ValidationStage::Triviality: return "triviality";
    case ValidationStage::DiffAnalysis: return "diff-analysis";
    case ValidationStage::StaticAnalysis: return "static-analysis";
    case ValidationStage::Final: return "final";
    }
    return "final";
}

const char* to_string(NextAction a) {
    switch (a) {
    case NextAction::Accept: return "accept";
    case NextAction::Refine: return "refine";
    case NextAction::Reinject: return "reinject";
    case NextAction::GiveUp: return "give-up";
    }
    return "give-up";
}

std::string resolve_cppcheck_path(const ToolPaths& paths) {
    if (!paths.cppcheck.empty()) return paths.cppcheck;
    if (const char* env = std::getenv("AVIATOR_CPPCHECK_PATH"); env && *env) return env;
    return "cppcheck";
}

std::string resolve_esbmc_path(const ToolPaths& paths) {
    if (!paths.esbmc.empty()) return paths.esbmc;
    if (const char* env = std::getenv("AVIATOR_ESBMC_PATH"); env && *env) return env;
    return "esbmc";
}

namespace {

const std::unordered_set<std::string_view>& known_library_functions() {
    static const std::unordered_set<std::string_view> fns = {
        "printf", "fprintf", "sprintf", "snprintf", "scanf", "fscanf", "sscanf",
        "puts", "putchar", "getchar", "gets", "fgets", "fputs", "fopen", "fclose",
        "fread", "fwrite", "fseek", "ftell", "malloc", "calloc", "realloc", "free",
        "memcpy", "memmove", "memset", "memcmp", "strcpy", "strncpy", "strcat",
        "strncat", "strcmp", "strncmp", "strlen", "strchr", "strrchr", "strstr",
        "strtok", "strdup", "atoi", "atol", "atof", "strtol", "strtoul", "strtod",
        "abs", "labs", "exit", "abort", "assert", "rand", "srand", "time",
        "isdigit", "isalpha", "isalnum", "isspace", "toupper", "tolower",
        "open", "close", "read", "write", "sizeof", "va_start", "va_end", "va_arg",
    };
    return fns;
}

}  // namespace

namespace {

bool is_type_like_keyword(const Token& t) {
    if (t.kind != TokenKind::Keyword) return false;
    static const std::unordered_set<std::string_view> types = {
        "void", "char", "short", "int", "long", "float", "double", "signed",
        "unsigned", "bool", "_Bool", "auto", "const", "volatile", "static",
        "extern", "register", "inline", "restrict", "struct", "union", "enum",
        "constexpr", "wchar_t", "char16_t", "char32_t", "_Atomic",
    };
    return types.count(t.text) > 0;
}

}  // namespace

HarnessResult wrap_translation_unit(std::string_view code, Dialect dialect) {
    TokenSequence seq = tokenize(code, dialect);
    std::vector<Token> toks = substantive_tokens(seq);

    std::set<std::string> declared;
    std::set<std::string> called;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind != TokenKind::Identifier) continue;
        bool next_is_paren = i + 1 < toks.size() && toks[i + 1].text == "(";
        bool prev_defines = i > 0 && (is_type_like_keyword(toks[i - 1]) ||
                                      toks[i - 1].text == "*" || toks[i - 1].text == "&" ||
                                      toks[i - 1].kind == TokenKind::Identifier);
        if (next_is_paren) {
            // "type name(" is a definition/declaration, "name(" a call
            if (prev_defines) declared.insert(toks[i].text);
            else called.insert(toks[i].text);
        }
    }

    HarnessResult out;
    for (const std::string& name : called) {
        if (declared.count(name) || known_library_functions().count(name)) continue;
        out.unknown_identifiers.push_back(name);
    }
    std::string decls;
    for (const std::string& name : out.unknown_identifiers) {
        decls += "int " + name + "();\n";
    }
    if (!decls.empty()) decls += "\n";
    out.code = decls + std::string(code);
    if (out.code.empty() || out.code.back() != '\n') out.code += "\n";
    return out;
}

namespace {

std::string xml_unescape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        if (s[i] != '&') {
            out += s[i++];
            continue;
        }
        auto starts = [&](std::string_view ent) {
            return s.substr(i, ent.size()) == ent;
        };
        if (starts("&amp;")) { out += '&'; i += 5; }
        else if (starts("&lt;")) { out += '<'; i += 4; }
        else if (starts("&gt;")) { out += '>'; i += 4; }
        else if (starts("&quot;")) { out += '"'; i += 6; }
        else if (starts("&apos;")) { out += '\''; i += 6; }
        else if (starts("&#")) {
            std::size_t semi = s.find(';', i);
            if (semi == std::string_view::npos) { out += s[i++]; continue; }
            std::string num(s.substr(i + 2, semi - i - 2));
            int code = 0;
            try {
                code = num.size() > 1 && (num[0] == 'x' || num[0] == 'X')
                           ? std::stoi(num.substr(1), nullptr, 16)
                           : std::stoi(num);
            } catch (const std::exception&) { out += s[i++]; continue; }
            out += static_cast<char>(code);
            i = semi + 1;
        } else {
            out += s[i++];
        }
    }
    return out;
}

std::optional<std::string> xml_attr(std::string_view element, std::string_view name) {
    std::string needle = std::string(name) + "=\"";
    std::size_t pos = element.find(needle);
    if (pos == std::string_view::npos) return std::nullopt;
    pos += needle.size();
    std::size_t end = element.find('"', pos);
    if (end == std::string_view::npos) return std::nullopt;
    return xml_unescape(element.substr(pos, end - pos));
}

FindingSeverity severity_from(const std::string& s) {
    if (s == "error") return FindingSeverity::Error;
    if (s == "warning") return FindingSeverity::Warning;
    if (s == "style" || s == "performance" || s == "portability") return FindingSeverity::Style;
    return FindingSeverity::Info;
}

// ids that describe the analysis itself rather than the analyzed code
bool is_meta_finding(const std::string& id) {
    return id == "checkersReport" || id == "missingInclude" || id == "missingIncludeSystem" ||
           id == "unmatchedSuppression" || id == "toomanyconfigs" || id == "normalCheckLevelMaxBranches";
}

}  // namespace

std::vector<StaticAnalysisFinding> parse_cppcheck_xml(const std::string& xml) {
    std::vector<StaticAnalysisFinding> findings;
    std::size_t pos = 0;
    while (true) {
        std::size_t open = xml.find("<error ", pos);
        if (open == std::string::npos) break;
        std::size_t close_self = xml.find("/>", open);
        std::size_t close_full = xml.find("</error>", open);
        std::size_t head_end = xml.find('>', open);
        if (head_end == std::string::npos) break;
        std::size_t element_end;
        if (close_full != std::string::npos &&
            (close_self == std::string::npos || close_full < close_self)) {
            element_end = close_full + 8;
        } else if (close_self != std::string::npos && close_self < head_end + 1) {
            element_end = close_self + 2;
        } else if (xml[head_end - 1] == '/') {
            element_end = head_end + 1;
        } else if (close_full != std::string::npos) {
            element_end = close_full + 8;
        } else {
            element_end = head_end + 1;
        }
        std::string_view element(xml.data() + open, element_end - open);

        StaticAnalysisFinding f;
        f.tool = "cppcheck";
        f.check_id = xml_attr(element, "id").value_or("");
        f.message = xml_attr(element, "msg").value_or("");
        f.severity = severity_from(xml_attr(element, "severity").value_or("information"));
        if (auto cwe = xml_attr(element, "cwe")) f.cwe = normalize_cwe(*cwe);
        // first <location> line, when present
        std::size_t loc = element.find("<location ");
        if (loc != std::string_view::npos) {
            std::size_t loc_end = element.find('>', loc);
            if (loc_end != std::string_view::npos) {
                if (auto line = xml_attr(element.substr(loc, loc_end - loc + 1), "line")) {
                    try {
                        f.line = std::max(1, std::stoi(*line));
                    } catch (const std::exception&) {
                        f.line = 1;
                    }
                }
            }
        }
        pos = element_end;
        if (f.check_id.empty() || is_meta_finding(f.check_id)) continue;
        findings.push_back(std::move(f));
    }
    std::stable_sort(findings.begin(), findings.end(),
                     [](const StaticAnalysisFinding& a, const StaticAnalysisFinding& b) {
                         if (a.line != b.line) return a.line < b.line;
                         return a.check_id < b.check_id;
                     });
    return findings;
}

namespace {

struct TempSourceFile {
    std::filesystem::path dir;
    std::filesystem::path file;

    TempSourceFile(std::string_view code, Dialect dialect) {
        dir = std::filesystem::temp_directory_path() /
              ("aviator_chk_" + digest_hex(code).substr(0, 12) + "_" +
               std::to_string(::getpid()));
        std::filesystem::create_directories(dir);
        file = dir / (dialect == Dialect::C ? "candidate.c" : "candidate.cpp");
        std::ofstream out(file, std::ios::binary);
        out << code;
    }
    ~TempSourceFile() {
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
};

}  // namespace

std::vector<StaticAnalysisFinding> run_cppcheck(std::string_view code, Dialect dialect,
                                                const ToolPaths& paths) {
    std::string exe = resolve_cppcheck_path(paths);
    HarnessResult harness = wrap_translation_unit(code, dialect);
    TempSourceFile tmp(harness.code, dialect);

    std::vector<std::string> argv = {
        exe,
        "--xml",
        "--xml-version=2",
        "--enable=all",
        std::string("--language=") + (dialect == Dialect::C ? "c" : "c++"),
        tmp.file.string(),
    };
    SubprocessResult result = run_subprocess(argv, 120.0);
    if (result.timed_out) throw ToolCrash("cppcheck timed out");
    if (result.stderr_text.find("<results") == std::string::npos) {
        throw ToolCrash("cppcheck produced no XML report (exit " +
                        std::to_string(result.exit_code) + ")");
    }
    return parse_cppcheck_xml(result.stderr_text);
}

VerificationOutcome parse_esbmc_output(const std::string& output, bool timed_out, int exit_code,
                                       int bound, double elapsed) {
    VerificationOutcome out;
    out.bound_used = bound;
    out.elapsed_seconds = elapsed;
    if (output.find("VERIFICATION FAILED") != std::string::npos) {
        out.status = VerificationStatus::CounterexampleFound;
        std::size_t ce = output.find("Counterexample:");
        if (ce == std::string::npos) ce = output.find("[Counterexample]");
        if (ce != std::string::npos) {
            out.counterexample_summary = output.substr(ce, 2000);
        } else {
            out.counterexample_summary = "VERIFICATION FAILED";
        }
        return out;
    }
    if (output.find("VERIFICATION SUCCESSFUL") != std::string::npos) {
        out.status = VerificationStatus::VerifiedSafe;
        return out;
    }
    if (timed_out || output.find("Timed out") != std::string::npos) {
        out.status = VerificationStatus::Timeout;
        return out;
    }
    out.status = VerificationStatus::ToolError;
    (void)exit_code;
    return out;
}

VerificationOutcome run_esbmc(std::string_view code, int bound, int timeout_seconds,
                              const ToolPaths& paths) {
    std::string exe = resolve_esbmc_path(paths);
    HarnessResult harness = wrap_translation_unit(code, Dialect::C);
    TempSourceFile tmp(harness.code, Dialect::C);

    std::vector<std::string> argv = {
        exe,
        tmp.file.string(),
        "--unwind",
        std::to_string(bound),
        "--timeout",
        std::to_string(timeout_seconds) + "s",
    };
    auto start = std::chrono::steady_clock::now();
    // tool enforces its own timeout; ours is a backstop
    SubprocessResult result = run_subprocess(argv, static_cast<double>(timeout_seconds) + 30.0);
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return parse_esbmc_output(result.stdout_text + result.stderr_text, result.timed_out,
                              result.exit_code, bound, elapsed);
}

GateResult triviality_gate(std::string_view benign, std::string_view candidate, Dialect dialect) {
    TrivialityResult t = is_trivial_change(benign, candidate, dialect);
    if (t.trivial) return {false, t.reason};
    return {true, ""};
}

AlignmentResult cwe_alignment(const std::vector<StaticAnalysisFinding>& findings,
                              std::string_view target_cwe) {
    AlignmentResult out;
    const CweRelations& rel = CweRelations::builtin();
    for (const StaticAnalysisFinding& f : findings) {
        if (f.cwe.empty()) continue;
        if (rel.related(f.cwe, target_cwe)) out.matching.push_back(f);
    }
    out.aligned = !out.matching.empty();
    return out;
}

std::string render_findings(const std::vector<StaticAnalysisFinding>& findings) {
    if (findings.empty()) return "(no findings)";
    std::ostringstream out;
    for (const StaticAnalysisFinding& f : findings) {
        out << f.tool << " " << to_string(f.severity) << " line " << f.line << " ["
            << f.check_id << "]";
        if (!f.cwe.empty()) out << " (" << f.cwe << ")";
        out << ": " << f.message << "\n";
    }
    return out.str();
}

FindingSeverity severity_from_string(std::string_view name) {
    if (name == "error") return FindingSeverity::Error;
    if (name == "warning") return FindingSeverity::Warning;
    if (name == "style") return FindingSeverity::Style;
    if (name == "info") return FindingSeverity::Info;
    throw DomainError("unknown severity: " + std::string(name));
}

ValidationStage validation_stage_from_string(std::string_view name) {
    if (name == "triviality") return ValidationStage::Triviality;
    if (name == "diff-analysis") return ValidationStage::DiffAnalysis;
    if (name == "static-analysis") return ValidationStage::StaticAnalysis;
    if (name == "final") return ValidationStage::Final;
    throw DomainError("unknown validation stage: " + std::string(name));
}

nlohmann::ordered_json finding_to_json(const StaticAnalysisFinding& f) {
    return {{"tool", f.tool},         {"check_id", f.check_id}, {"cwe", f.cwe},
            {"severity", to_string(f.severity)}, {"line", f.line},        {"message", f.message}};
}

StaticAnalysisFinding finding_from_json(const nlohmann::ordered_json& j) {
    StaticAnalysisFinding f;
    f.tool = j.at("tool").get<std::string>();
    f.check_id = j.at("check_id").get<std::string>();
    f.cwe = j.at("cwe").get<std::string>();
    f.severity = severity_from_string(j.at("severity").get<std::string>());
    f.line = j.at("line").get<int>();
    f.message = j.at("message").get<std::string>();
    return f;
}

nlohmann::ordered_json validation_verdict_to_json(const ValidationVerdict& v) {
    return {{"stage", to_string(v.stage)},
            {"verdict", to_string(v.verdict)},
            {"evidence", v.evidence},
            {"iteration", v.iteration}};
}

ValidationVerdict validation_verdict_from_json(const nlohmann::ordered_json& j) {
    ValidationVerdict v;
    v.stage = validation_stage_from_string(j.at("stage").get<std::string>());
    v.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    v.evidence = j.at("evidence").get<std::string>();
    v.iteration = j.at("iteration").get<int>();
    return v;
}

ValidationDecision validation_pass(const ValidationContext& ctx) {
    const bool budget_left = ctx.iteration < ctx.max_corrections;
    auto reject = [&](ValidationStage stage, std::string evidence,
                      NextAction wanted) -> ValidationDecision {
        ValidationDecision d;
        d.verdict = {stage, Verdict::Absent, std::move(evidence), ctx.iteration};
        d.action = budget_left ? wanted : NextAction::GiveUp;
        return d;
    };

    TrivialityResult trivial = is_trivial_change(ctx.benign, ctx.candidate, ctx.dialect);
    if (trivial.trivial) {
        return reject(ValidationStage::Triviality, "trivial change: " + trivial.reason,
                      NextAction::Reinject);
    }

    if (ctx.has_diff_stage && ctx.diff_agent_verdict &&
        *ctx.diff_agent_verdict != Verdict::Present) {
        return reject(ValidationStage::DiffAnalysis,
                      std::string("diff analyzer verdict: ") +
                          to_string(*ctx.diff_agent_verdict),
                      ctx.has_refiner ? NextAction::Refine : NextAction::Reinject);
    }

    if (ctx.has_static_stage) {
        if (!ctx.static_stage_available) {
            // tool missing or too many unknown symbols: record undecidable
            // evidence and defer to the agent verdicts
            if (ctx.verifier_verdict && *ctx.verifier_verdict == Verdict::Present) {
                ValidationDecision d;
                d.verdict = {ValidationStage::Final, Verdict::Present,
                             "accepted on agent verdicts; static stage undecidable",
                             ctx.iteration};
                d.action = NextAction::Accept;
                return d;
            }
            ValidationDecision d;
            d.verdict = {ValidationStage::StaticAnalysis, Verdict::Undecidable,
                         "static analysis unavailable", ctx.iteration};
            d.action = budget_left ? NextAction::Refine : NextAction::GiveUp;
            return d;
        }
        if (ctx.verifier_verdict && *ctx.verifier_verdict != Verdict::Present) {
            return reject(ValidationStage::StaticAnalysis,
                          std::string("verifier verdict: ") + to_string(*ctx.verifier_verdict) +
                              (ctx.static_aligned ? " (findings aligned)"
                                                  : " (findings not aligned)"),
                          NextAction::Refine);
        }
        if (!ctx.verifier_verdict && !ctx.static_aligned) {
            return reject(ValidationStage::StaticAnalysis, "findings not aligned with target",
                          NextAction::Refine);
        }
    }

    ValidationDecision d;
    d.verdict = {ValidationStage::Final, Verdict::Present, "all validation stages passed",
                 ctx.iteration};
    d.action = NextAction::Accept;
    return d;
}

}  // namespace aviator
