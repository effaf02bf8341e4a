#include <algorithm>

#include "aviator/edit_script.hpp"
#include "aviator/errors.hpp"
#include "aviator/line_diff.hpp"
#include "aviator/subprocess.hpp"
#include "aviator/workflow.hpp"

namespace aviator {

namespace {

AgentNode node(std::string id, NodeKind kind, std::vector<std::string> in,
               std::vector<std::string> out) {
    return {std::move(id), kind, std::move(in), std::move(out)};
}

WorkflowEdge edge(std::string from, std::string to, std::string condition = "always",
                  std::string loop_name = "") {
    return {std::move(from), std::move(to), std::move(condition), std::move(loop_name)};
}

Json analysis_to_json(const AnalysisReport& r) {
    return {{"purpose_summary", r.purpose_summary},
            {"control_flow_notes", r.control_flow_notes},
            {"data_flow_notes", r.data_flow_notes},
            {"io_behavior", r.io_behavior}};
}

AnalysisReport analysis_from_json(const Json& j) {
    AnalysisReport r;
    r.purpose_summary = j.at("purpose_summary").get<std::string>();
    r.control_flow_notes = j.at("control_flow_notes").get<std::string>();
    r.data_flow_notes = j.at("data_flow_notes").get<std::string>();
    r.io_behavior = j.at("io_behavior").get<std::string>();
    return r;
}

Json notes_to_json(const std::vector<LineNote>& notes) {
    Json out = Json::array();
    for (const LineNote& n : notes) {
        out.push_back({{"line", n.line},
                       {"description", n.description},
                       {"weakening_suggestion", n.weakening_suggestion}});
    }
    return out;
}

std::vector<LineNote> notes_from_json(const Json& j) {
    std::vector<LineNote> out;
    for (const Json& n : j) {
        out.push_back({n.at("line").get<int>(), n.at("description").get<std::string>(),
                       n.at("weakening_suggestion").get<std::string>()});
    }
    return out;
}

Json sources_sinks_to_json(const SourcesSinksReport& r) {
    return {{"sources", notes_to_json(r.sources)},
            {"sinks", notes_to_json(r.sinks)},
            {"sanitizers", notes_to_json(r.sanitizers)}};
}

SourcesSinksReport sources_sinks_from_json(const Json& j) {
    SourcesSinksReport r;
    r.sources = notes_from_json(j.at("sources"));
    r.sinks = notes_from_json(j.at("sinks"));
    r.sanitizers = notes_from_json(j.at("sanitizers"));
    return r;
}

Json profile_to_json(const VulnerabilityProfile& p) {
    return {{"cwe", p.cwe},
            {"title", p.title},
            {"description", p.description},
            {"typical_patterns", p.typical_patterns}};
}

VulnerabilityProfile profile_from_json(const Json& j) {
    VulnerabilityProfile p;
    p.cwe = j.at("cwe").get<std::string>();
    p.title = j.at("title").get<std::string>();
    p.description = j.at("description").get<std::string>();
    p.typical_patterns = j.at("typical_patterns").get<std::string>();
    return p;
}

Json candidate_to_json(const InjectionCandidate& c) {
    return {{"code", c.code}, {"self_rationale", c.self_rationale}};
}

InjectionCandidate candidate_from_json(const Json& j) {
    return {j.at("code").get<std::string>(), j.at("self_rationale").get<std::string>()};
}

Json line_diff_to_json(const LineDiff& d) {
    Json hunks = Json::array();
    for (const DiffHunk& h : d.hunks) {
        hunks.push_back({{"kind", to_string(h.kind)},
                         {"benign", {h.benign.begin, h.benign.end}},
                         {"candidate", {h.candidate.begin, h.candidate.end}}});
    }
    return {{"hunks", std::move(hunks)},
            {"benign_lines", d.benign_line_count},
            {"candidate_lines", d.candidate_line_count}};
}

VulnerabilityProfile fallback_profile(const std::string& cwe) {
    std::string canonical = normalize_cwe(cwe);
    if (canonical.empty()) canonical = cwe;
    if (auto p = CweCatalog::builtin().find(canonical)) return *p;
    return {canonical, canonical, "(no catalog entry)", "(none)"};
}

SourceFunction sample_from_ctx(const RunContext& ctx) {
    const Json& j = ctx.get("benign_function");
    SourceFunction fn;
    fn.id = j.at("id").get<std::string>();
    fn.code = j.at("code").get<std::string>();
    fn.dialect = dialect_from_string(j.at("dialect").get<std::string>());
    fn.cwe_target = j.at("cwe").get<std::string>();
    fn.origin = j.at("origin").get<std::string>();
    return fn;
}

PromptBundle bundle_from_ctx(const RunContext& ctx) {
    PromptBundle b;
    b.function = sample_from_ctx(ctx);
    if (ctx.has("vuln_profile")) {
        b.profile = profile_from_json(ctx.get("vuln_profile"));
    } else {
        b.profile = fallback_profile(b.function.cwe_target);
    }
    if (ctx.has("analysis")) b.analysis = analysis_from_json(ctx.get("analysis"));
    if (ctx.has("sources_sinks")) {
        b.sources_sinks = sources_sinks_from_json(ctx.get("sources_sinks"));
    }
    for (const Json& e : ctx.get("retrieved_examples")) {
        b.retrieved_examples.push_back(e.get<std::string>());
    }
    b.attempt = ctx.loop_count("correction");
    if (ctx.has("failure_reason")) {
        b.feedback = ctx.get("failure_reason").get<std::string>();
    }
    return b;
}

std::string verdict_history_text(const RunContext& ctx) {
    std::string out;
    for (const Json& v : ctx.versions("verdicts")) {
        out += "- [" + v.at("stage").get<std::string>() + "] " +
               v.at("verdict").get<std::string>() + ": " +
               v.at("evidence").get<std::string>() + "\n";
    }
    return out.empty() ? "(none)" : out;
}

void put_verdict(RunContext& ctx, ValidationStage stage, Verdict verdict,
                 const std::string& evidence) {
    ctx.put("verdicts", validation_verdict_to_json(
                            {stage, verdict, evidence, ctx.loop_count("correction")}));
}

// --- node handlers ---------------------------------------------------------

void handle_code_understanding(RunContext& ctx, const SourceFunction& sample,
                               const ExecutionEnv& env) {
    AnalysisReport report = code_understanding(sample, *env.provider, env.agent_config);
    ctx.put("analysis", analysis_to_json(report));
}

void handle_info_loader(RunContext& ctx, const SourceFunction&, const ExecutionEnv&) {
    std::string cwe = ctx.get("cwe_target").get<std::string>();
    VulnerabilityProfile profile = load_vulnerability_info(cwe);
    ctx.put("vuln_profile", profile_to_json(profile));
}

void handle_sanitization_detector(RunContext& ctx, const SourceFunction& sample,
                                  const ExecutionEnv& env) {
    AnalysisReport analysis;
    if (ctx.has("analysis")) analysis = analysis_from_json(ctx.get("analysis"));
    SourcesSinksReport report =
        sanitization_detector(sample, analysis, *env.provider, env.agent_config);
    ctx.put("sources_sinks", sources_sinks_to_json(report));
}

void handle_injector(RunContext& ctx, const SourceFunction&, const ExecutionEnv& env) {
    PromptBundle bundle = bundle_from_ctx(ctx);
    InjectionCandidate candidate =
        bundle.attempt > 0 ? corrective_reinjection(bundle, *env.provider, env.agent_config)
                           : vulnerability_injector(bundle, *env.provider, env.agent_config);
    ctx.put("candidate", candidate_to_json(candidate));
}

void handle_corrective_injector(RunContext& ctx, const SourceFunction&,
                                const ExecutionEnv& env) {
    PromptBundle bundle = bundle_from_ctx(ctx);
    InjectionCandidate candidate =
        corrective_reinjection(bundle, *env.provider, env.agent_config);
    ctx.put("candidate", candidate_to_json(candidate));
}

void handle_monolithic(RunContext& ctx, const SourceFunction&, const ExecutionEnv& env) {
    PromptBundle bundle = bundle_from_ctx(ctx);
    InjectionCandidate candidate =
        monolithic_injection(bundle, *env.provider, env.agent_config);
    ctx.put("candidate", candidate_to_json(candidate));
}

void handle_polisher(RunContext& ctx, const SourceFunction& sample, const ExecutionEnv& env) {
    InjectionCandidate candidate = candidate_from_json(ctx.get("candidate"));
    InjectionCandidate polished = polisher(sample, candidate, *env.provider, env.agent_config);
    ctx.put("candidate", candidate_to_json(polished));
}

void handle_diff_agent(RunContext& ctx, const SourceFunction& sample, const ExecutionEnv&) {
    InjectionCandidate candidate = candidate_from_json(ctx.get("candidate"));
    LineDiff ld = line_diff(sample.code, candidate.code);

    TokenSequence benign_toks = tokenize(sample.code, sample.dialect);
    TokenSequence cand_toks = tokenize(candidate.code, sample.dialect);
    EditScript script = derive_edit_script(benign_toks, cand_toks);

    GateResult gate = triviality_gate(sample.code, candidate.code, sample.dialect);
    ctx.put("diff", Json{{"line_diff", line_diff_to_json(ld)},
                         {"edit_script", edit_script_to_json(script)},
                         {"edit_count", edit_count(script)}});
    ctx.put("diff_trivial", !gate.pass);
    ctx.put("annotated_diff", render_marked_candidate(ld, candidate.code));
    if (!gate.pass) {
        ctx.put("failure_reason",
                "change is trivial (" + gate.reason +
                    "); produce an edit that alters program behavior");
        put_verdict(ctx, ValidationStage::Triviality, Verdict::Absent,
                    "trivial change: " + gate.reason);
    } else {
        put_verdict(ctx, ValidationStage::Triviality, Verdict::Present,
                    "substantive change (" + std::to_string(edit_count(script)) +
                        " edit sites)");
    }
}

void handle_diff_analyzer(RunContext& ctx, const SourceFunction& sample,
                          const ExecutionEnv& env) {
    InjectionCandidate candidate = candidate_from_json(ctx.get("candidate"));
    std::string annotated = ctx.get("annotated_diff").get<std::string>();
    std::string cwe = ctx.get("cwe_target").get<std::string>();
    AgentVerdict verdict =
        diff_analyzer(sample, candidate, annotated, cwe, *env.provider, env.agent_config);
    ctx.put("diff_verdict", Json{{"verdict", to_string(verdict.verdict)},
                                 {"rationale", verdict.rationale},
                                 {"cwe_alignment", verdict.cwe_alignment}});
    put_verdict(ctx, ValidationStage::DiffAnalysis, verdict.verdict, verdict.rationale);
    if (verdict.verdict != Verdict::Present) {
        ctx.put("failure_reason", "diff analyzer rejected the edit: " + verdict.rationale);
    }
}

void handle_static_analyzer(RunContext& ctx, const SourceFunction& sample,
                            const ExecutionEnv& env) {
    InjectionCandidate candidate = candidate_from_json(ctx.get("candidate"));
    std::string cwe = ctx.get("cwe_target").get<std::string>();

    HarnessResult harness = wrap_translation_unit(candidate.code, sample.dialect);
    if (static_cast<int>(harness.unknown_identifiers.size()) > kUnknownIdentifierLimit) {
        ctx.put("static_findings", Json::array());
        ctx.put("static_undecidable", true);
        ctx.put("static_aligned", false);
        put_verdict(ctx, ValidationStage::StaticAnalysis, Verdict::Undecidable,
                    std::to_string(harness.unknown_identifiers.size()) +
                        " unresolved identifiers exceed the harness limit");
        return;
    }
    std::vector<StaticAnalysisFinding> findings;
    try {
        findings = run_cppcheck(candidate.code, sample.dialect, env.tools);
    } catch (const ToolMissing&) {
        ctx.put("static_findings", Json::array());
        ctx.put("static_undecidable", true);
        ctx.put("static_aligned", false);
        put_verdict(ctx, ValidationStage::StaticAnalysis, Verdict::Undecidable,
                    "cppcheck not available");
        return;
    } catch (const ToolCrash& e) {
        ctx.put("static_findings", Json::array());
        ctx.put("static_undecidable", true);
        ctx.put("static_aligned", false);
        put_verdict(ctx, ValidationStage::StaticAnalysis, Verdict::Undecidable, e.what());
        return;
    }
    Json findings_json = Json::array();
    // style findings are recorded as evidence but do not gate the verdict
    std::vector<StaticAnalysisFinding> gating;
    for (const StaticAnalysisFinding& f : findings) {
        findings_json.push_back(finding_to_json(f));
        if (f.severity == FindingSeverity::Error || f.severity == FindingSeverity::Warning) {
            gating.push_back(f);
        }
    }
    AlignmentResult alignment = cwe_alignment(gating, cwe);
    ctx.put("static_findings", std::move(findings_json));
    ctx.put("static_undecidable", false);
    ctx.put("static_aligned", alignment.aligned);
    put_verdict(ctx, ValidationStage::StaticAnalysis,
                alignment.aligned ? Verdict::Present : Verdict::Absent,
                render_findings(findings));
}

void handle_vuln_verifier(RunContext& ctx, const SourceFunction& sample,
                          const ExecutionEnv& env) {
    InjectionCandidate candidate = candidate_from_json(ctx.get("candidate"));
    std::string cwe = ctx.get("cwe_target").get<std::string>();
    std::string findings_text;
    if (ctx.has("static_undecidable") && ctx.get("static_undecidable").get<bool>()) {
        findings_text = "(static analysis unavailable; judge from the code alone)";
    } else {
        std::vector<StaticAnalysisFinding> findings;
        for (const Json& f : ctx.get("static_findings")) {
            findings.push_back(finding_from_json(f));
        }
        findings_text = render_findings(findings);
    }
    AgentVerdict verdict = vuln_verifier(sample, candidate, cwe, findings_text, *env.provider,
                                         env.agent_config);
    ctx.put("verifier_verdict", Json{{"verdict", to_string(verdict.verdict)},
                                     {"rationale", verdict.rationale},
                                     {"cwe_alignment", verdict.cwe_alignment}});
    put_verdict(ctx, ValidationStage::Final, verdict.verdict, verdict.rationale);
    if (verdict.verdict != Verdict::Present) {
        ctx.put("failure_reason", "verifier rejected the candidate: " + verdict.rationale);
    }
}

void handle_diff_refiner(RunContext& ctx, const SourceFunction& sample,
                         const ExecutionEnv& env) {
    InjectionCandidate candidate = candidate_from_json(ctx.get("candidate"));
    std::string annotated = ctx.get("annotated_diff").get<std::string>();
    std::string failure = ctx.has("failure_reason")
                              ? ctx.get("failure_reason").get<std::string>()
                              : "(none)";
    InjectionCandidate refined =
        diff_refiner(sample, candidate, annotated, failure, *env.provider, env.agent_config);
    ctx.put("candidate", candidate_to_json(refined));
}

void handle_refinement_agent(RunContext& ctx, const SourceFunction& sample,
                             const ExecutionEnv& env) {
    InjectionCandidate candidate = candidate_from_json(ctx.get("candidate"));
    std::string failure = ctx.has("failure_reason")
                              ? ctx.get("failure_reason").get<std::string>()
                              : "(none)";
    InjectionCandidate refined = refinement_agent(sample, candidate, verdict_history_text(ctx),
                                                  failure, *env.provider, env.agent_config);
    ctx.put("candidate", candidate_to_json(refined));
}

void handle_vuln_fixer(RunContext& ctx, const SourceFunction& sample,
                       const ExecutionEnv& env) {
    InjectionCandidate candidate = candidate_from_json(ctx.get("candidate"));
    InjectionCandidate fixed = vuln_fixer(sample, candidate, verdict_history_text(ctx),
                                          *env.provider, env.agent_config);
    ctx.put("candidate", candidate_to_json(fixed));
    put_verdict(ctx, ValidationStage::Final, Verdict::Present,
                "final pass complete; prior validation verdicts stand");
}

}  // namespace

const HandlerMap& default_handlers() {
    static const HandlerMap handlers = {
        {"monolithic-injector", handle_monolithic},
        {"code-understanding", handle_code_understanding},
        {"info-loader", handle_info_loader},
        {"injection-point-analyzer", handle_sanitization_detector},
        {"sanitization-detector", handle_sanitization_detector},
        {"vulnerability-injector", handle_injector},
        {"corrective-injector", handle_corrective_injector},
        {"polisher", handle_polisher},
        {"diff-agent", handle_diff_agent},
        {"diff-analyzer", handle_diff_analyzer},
        {"static-analyzer", handle_static_analyzer},
        {"vuln-verifier", handle_vuln_verifier},
        {"diff-refiner", handle_diff_refiner},
        {"refinement-agent", handle_refinement_agent},
        {"vuln-fixer", handle_vuln_fixer},
    };
    return handlers;
}

WorkflowGraph build_preset(PresetName preset) {
    const int rank = preset_rank(preset);
    WorkflowGraph g;

    const std::vector<std::string> injector_inputs = {
        "benign_function", "cwe_target",        "vuln_profile", "analysis",
        "sources_sinks",   "retrieved_examples", "failure_reason"};

    if (rank == 1) {
        g.nodes.push_back(node("monolithic-injector", NodeKind::LlmAgent,
                               {"benign_function", "cwe_target", "retrieved_examples",
                                "failure_reason"},
                               {"candidate"}));
        g.entry = "monolithic-injector";
        g.validate();
        return g;
    }

    if (rank == 3) {
        g.nodes.push_back(node("info-loader", NodeKind::Control, {"cwe_target"},
                               {"vuln_profile"}));
        g.nodes.push_back(node("injection-point-analyzer", NodeKind::LlmAgent,
                               {"benign_function", "vuln_profile", "analysis"},
                               {"sources_sinks"}));
        g.nodes.push_back(node("vulnerability-injector", NodeKind::LlmAgent, injector_inputs,
                               {"candidate"}));
        g.edges.push_back(edge("info-loader", "injection-point-analyzer"));
        g.edges.push_back(edge("injection-point-analyzer", "vulnerability-injector"));
        g.entry = "info-loader";
        g.validate();
        return g;
    }

    // W5 core: the full injection module
    g.nodes.push_back(node("code-understanding", NodeKind::LlmAgent, {"benign_function"},
                           {"analysis"}));
    g.nodes.push_back(node("info-loader", NodeKind::Control, {"cwe_target"}, {"vuln_profile"}));
    g.nodes.push_back(node("sanitization-detector", NodeKind::LlmAgent,
                           {"benign_function", "analysis", "vuln_profile"}, {"sources_sinks"}));
    g.nodes.push_back(node("vulnerability-injector", NodeKind::LlmAgent, injector_inputs,
                           {"candidate"}));
    g.nodes.push_back(node("polisher", NodeKind::LlmAgent, {"benign_function", "candidate"},
                           {"candidate"}));
    g.edges.push_back(edge("code-understanding", "info-loader"));
    g.edges.push_back(edge("info-loader", "sanitization-detector"));
    g.edges.push_back(edge("sanitization-detector", "vulnerability-injector"));
    g.edges.push_back(edge("vulnerability-injector", "polisher"));
    g.entry = "code-understanding";
    if (rank == 5) {
        g.validate();
        return g;
    }

    // W7: the difference-checking loop
    g.loop_budgets["correction"] = 10;
    g.nodes.push_back(node("diff-agent", NodeKind::Tool, {"benign_function", "candidate"},
                           {"diff", "diff_trivial", "annotated_diff", "failure_reason",
                            "verdicts"}));
    g.nodes.push_back(node("diff-analyzer", NodeKind::LlmAgent,
                           {"benign_function", "candidate", "annotated_diff", "cwe_target"},
                           {"diff_verdict", "failure_reason", "verdicts"}));
    g.edges.push_back(edge("polisher", "diff-agent"));
    const std::string reinject_target =
        rank >= 11 ? "corrective-injector" : "vulnerability-injector";
    const std::string refine_target = rank >= 11 ? "diff-refiner" : "vulnerability-injector";
    g.edges.push_back(edge("diff-agent", reinject_target, "diff-trivial?", "correction"));
    g.edges.push_back(edge("diff-agent", "diff-analyzer", "diff-substantive?"));
    g.edges.push_back(edge("diff-analyzer", refine_target, "diff-analyzer-rejected?", "correction"));
    if (rank == 7) {
        g.validate();
        return g;
    }

    // W9: static analysis plus the verifier agent
    g.nodes.push_back(node("static-analyzer", NodeKind::Tool,
                           {"benign_function", "candidate", "cwe_target"},
                           {"static_findings", "static_undecidable", "static_aligned",
                            "verdicts"}));
    g.nodes.push_back(node("vuln-verifier", NodeKind::LlmAgent,
                           {"benign_function", "candidate", "cwe_target", "static_findings",
                            "static_undecidable", "static_aligned"},
                           {"verifier_verdict", "failure_reason", "verdicts"}));
    g.edges.push_back(edge("diff-analyzer", "static-analyzer", "diff-analyzer-passed?"));
    g.edges.push_back(edge("static-analyzer", "vuln-verifier"));
    const std::string verifier_reject_target =
        rank == 9 ? "vulnerability-injector" : (rank == 11 ? "diff-refiner" : "refinement-agent");
    g.edges.push_back(
        {"vuln-verifier", verifier_reject_target, "verifier-rejected?", "correction"});
    if (rank == 9) {
        g.validate();
        return g;
    }

    // W11: targeted refinement plus the dedicated corrective injector
    g.nodes.push_back(node("diff-refiner", NodeKind::LlmAgent,
                           {"benign_function", "candidate", "annotated_diff", "failure_reason",
                            "cwe_target"},
                           {"candidate"}));
    g.nodes.push_back(node("corrective-injector", NodeKind::LlmAgent, injector_inputs,
                           {"candidate"}));
    g.edges.push_back(edge("diff-refiner", "diff-agent"));
    g.edges.push_back(edge("corrective-injector", "diff-agent"));
    if (rank == 11) {
        g.validate();
        return g;
    }

    // W13: terminal fixer plus the validation-feedback refinement agent
    g.nodes.push_back(node("refinement-agent", NodeKind::LlmAgent,
                           {"benign_function", "candidate", "verdicts", "failure_reason",
                            "cwe_target"},
                           {"candidate"}));
    g.nodes.push_back(node("vuln-fixer", NodeKind::LlmAgent,
                           {"benign_function", "candidate", "verdicts", "cwe_target"},
                           {"candidate", "verdicts"}));
    g.edges.push_back(edge("refinement-agent", "diff-agent"));
    g.edges.push_back(edge("vuln-verifier", "vuln-fixer", "verifier-passed?"));
    g.validate();
    return g;
}

}  // namespace aviator
