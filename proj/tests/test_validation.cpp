#include "doctest.h"

#include <string>

#include "aviator/errors.hpp"
#include "aviator/subprocess.hpp"
#include "aviator/validation.hpp"

using namespace aviator;

namespace {

const char* kCppcheckXmlSample = R"(<?xml version="1.0" encoding="UTF-8"?>
<results version="2">
    <cppcheck version="2.17.0"/>
    <errors>
        <error id="nullPointer" severity="error" msg="Null pointer dereference: p" verbose="Null pointer dereference: p" cwe="476" file0="candidate.c">
            <location file="candidate.c" line="3" column="10" info="Null pointer dereference"/>
            <location file="candidate.c" line="2" column="12" info="Assignment 'p=NULL'"/>
        </error>
        <error id="arrayIndexOutOfBounds" severity="error" msg="Array &apos;buf[2]&apos; accessed at index 3, which is out of bounds." verbose="..." cwe="788">
            <location file="candidate.c" line="2" column="6"/>
        </error>
        <error id="unusedVariable" severity="style" msg="Unused variable: tmp &quot;x&quot;" verbose="..." cwe="563">
            <location file="candidate.c" line="1" column="7"/>
        </error>
        <error id="checkersReport" severity="information" msg="Active checkers..." verbose="..."/>
    </errors>
</results>
)";

}  // namespace

TEST_CASE("parse_cppcheck_xml: findings, entities, ordering, meta filtering") {
    auto findings = parse_cppcheck_xml(kCppcheckXmlSample);
    REQUIRE(findings.size() == 3);
    // normalized by (line, check_id)
    CHECK(findings[0].check_id == "unusedVariable");
    CHECK(findings[0].line == 1);
    CHECK(findings[0].severity == FindingSeverity::Style);
    CHECK(findings[0].message == "Unused variable: tmp \"x\"");
    CHECK(findings[1].check_id == "arrayIndexOutOfBounds");
    CHECK(findings[1].cwe == "CWE-788");
    CHECK(findings[1].message.find("'buf[2]'") != std::string::npos);
    CHECK(findings[2].check_id == "nullPointer");
    CHECK(findings[2].cwe == "CWE-476");
    CHECK(findings[2].line == 3);
    CHECK(findings[2].severity == FindingSeverity::Error);
}

TEST_CASE("parse_esbmc_output maps verdict lines") {
    auto failed = parse_esbmc_output(
        "...\n[Counterexample]\nState 1 ...\nVERIFICATION FAILED\n", false, 1, 100, 2.5);
    CHECK(failed.status == VerificationStatus::CounterexampleFound);
    CHECK_FALSE(failed.counterexample_summary.empty());
    CHECK(failed.bound_used == 100);

    auto safe = parse_esbmc_output("VERIFICATION SUCCESSFUL\n", false, 0, 100, 0.1);
    CHECK(safe.status == VerificationStatus::VerifiedSafe);
    CHECK(safe.counterexample_summary.empty());

    auto timeout = parse_esbmc_output("partial output", true, -9, 100, 1.0);
    CHECK(timeout.status == VerificationStatus::Timeout);

    auto crash = parse_esbmc_output("segfault noise", false, 139, 100, 0.2);
    CHECK(crash.status == VerificationStatus::ToolError);
}

TEST_CASE("triviality gate") {
    std::string fn = "int f(int a) { return a + 1; }";
    GateResult ws = triviality_gate(fn, fn + "  \n");
    CHECK_FALSE(ws.pass);
    CHECK(ws.reason == "whitespace");

    GateResult cm = triviality_gate(fn, fn + " // annotated");
    CHECK_FALSE(cm.pass);
    CHECK(cm.reason == "comments");

    GateResult self = triviality_gate(fn, fn);
    CHECK_FALSE(self.pass);
    CHECK(self.reason == "identical");

    GateResult real = triviality_gate("a = b + c;", "a = b - c;");
    CHECK(real.pass);

    // gate is insensitive to formatting of either argument
    GateResult reformatted = triviality_gate("int f(){return 1;}", "int  f()\n{ return 1; }\n");
    CHECK_FALSE(reformatted.pass);
}

TEST_CASE("cwe_alignment: exact, hierarchy, none") {
    StaticAnalysisFinding exact{"cppcheck", "nullPointer", "CWE-476",
                                FindingSeverity::Error, 3, "msg"};
    auto r1 = cwe_alignment({exact}, "CWE-476");
    CHECK(r1.aligned);
    REQUIRE(r1.matching.size() == 1);

    // 787 is a child of 119 in the bundled relation table
    StaticAnalysisFinding oob{"cppcheck", "bufferAccessOutOfBounds", "CWE-787",
                              FindingSeverity::Error, 5, "msg"};
    CHECK(cwe_alignment({oob}, "CWE-119").aligned);
    CHECK(cwe_alignment({oob}, "119").aligned);
    // and transitively: 121 -> 787 -> 119
    StaticAnalysisFinding stack{"cppcheck", "stackOverflow", "CWE-121",
                                FindingSeverity::Error, 5, "msg"};
    CHECK(cwe_alignment({stack}, "CWE-119").aligned);

    CHECK_FALSE(cwe_alignment({}, "CWE-476").aligned);
    CHECK_FALSE(cwe_alignment({oob}, "CWE-476").aligned);
    StaticAnalysisFinding no_cwe{"cppcheck", "something", "", FindingSeverity::Error, 1, "m"};
    CHECK_FALSE(cwe_alignment({no_cwe}, "CWE-476").aligned);
}

TEST_CASE("wrap_translation_unit counts unknown called identifiers") {
    HarnessResult none = wrap_translation_unit(
        "int f(int a) { return a + 1; }", Dialect::C);
    CHECK(none.unknown_identifiers.empty());

    HarnessResult libs = wrap_translation_unit(
        "void f(char* d, const char* s) { strcpy(d, s); printf(\"%s\", d); }", Dialect::C);
    CHECK(libs.unknown_identifiers.empty());  // known library functions

    HarnessResult unknowns = wrap_translation_unit(
        "int f() { return alpha() + beta() + gamma_fn() + delta() + eps() + zeta(); }",
        Dialect::C);
    CHECK(unknowns.unknown_identifiers.size() == 6);
    CHECK(unknowns.code.find("int alpha();") != std::string::npos);

    // locally declared functions are not unknown
    HarnessResult local = wrap_translation_unit(
        "static int helper(int x) { return x; }\nint f() { return helper(2); }", Dialect::C);
    CHECK(local.unknown_identifiers.empty());
}

TEST_CASE("validation_pass decision table") {
    ValidationContext ctx;
    ctx.benign = "int f(int a) { if (a < 8) return a; return 0; }";
    ctx.candidate = "int f(int a) { return a; }";
    ctx.cwe_target = "CWE-125";
    ctx.diff_agent_verdict = Verdict::Present;
    ctx.verifier_verdict = Verdict::Present;
    ctx.static_aligned = true;

    SUBCASE("all stages pass -> accept") {
        ValidationDecision d = validation_pass(ctx);
        CHECK(d.action == NextAction::Accept);
        CHECK(d.verdict.verdict == Verdict::Present);
        CHECK(d.verdict.stage == ValidationStage::Final);
    }
    SUBCASE("triviality reject at iteration 10 -> give-up") {
        ctx.candidate = ctx.benign + "\n";
        ctx.iteration = 10;
        ValidationDecision d = validation_pass(ctx);
        CHECK(d.action == NextAction::GiveUp);
        CHECK(d.verdict.stage == ValidationStage::Triviality);
    }
    SUBCASE("triviality reject early -> reinject") {
        ctx.candidate = ctx.benign + "\n";
        ctx.iteration = 3;
        CHECK(validation_pass(ctx).action == NextAction::Reinject);
    }
    SUBCASE("static not aligned at iteration 3 on a W9 shape -> refine") {
        ctx.has_refiner = false;  // W9: no refiner nodes
        ctx.static_aligned = false;
        ctx.verifier_verdict = Verdict::Absent;
        ctx.iteration = 3;
        ValidationDecision d = validation_pass(ctx);
        CHECK(d.action == NextAction::Refine);
        CHECK(d.verdict.stage == ValidationStage::StaticAnalysis);
    }
    SUBCASE("analyzer reject routes by refiner availability") {
        ctx.diff_agent_verdict = Verdict::Absent;
        ctx.has_refiner = false;  // W7
        CHECK(validation_pass(ctx).action == NextAction::Reinject);
        ctx.has_refiner = true;  // W11+
        CHECK(validation_pass(ctx).action == NextAction::Refine);
    }
    SUBCASE("static stage unavailable defers to agent verdicts") {
        ctx.static_stage_available = false;
        ctx.verifier_verdict = Verdict::Present;
        ValidationDecision d = validation_pass(ctx);
        CHECK(d.action == NextAction::Accept);
        ctx.verifier_verdict = Verdict::Undecidable;
        ValidationDecision d2 = validation_pass(ctx);
        CHECK(d2.action == NextAction::Refine);
        CHECK(d2.verdict.verdict == Verdict::Undecidable);
    }
    SUBCASE("shallow preset shapes skip absent stages") {
        ctx.has_diff_stage = false;
        ctx.has_static_stage = false;
        ctx.diff_agent_verdict.reset();
        ctx.verifier_verdict.reset();
        CHECK(validation_pass(ctx).action == NextAction::Accept);
    }
}

TEST_CASE("disabling the static stage never turns absent into present") {
    ValidationContext base;
    base.benign = "int f(int a) { if (a < 8) return a; return 0; }";
    base.candidate = "int f(int a) { return a; }";
    base.cwe_target = "CWE-125";
    base.diff_agent_verdict = Verdict::Present;

    for (Verdict verifier : {Verdict::Present, Verdict::Absent, Verdict::Undecidable}) {
        for (bool aligned : {true, false}) {
            for (int iteration : {0, 5, 10}) {
                ValidationContext with_tool = base;
                with_tool.verifier_verdict = verifier;
                with_tool.static_aligned = aligned;
                with_tool.iteration = iteration;
                ValidationContext without_tool = with_tool;
                without_tool.static_stage_available = false;

                ValidationDecision before = validation_pass(with_tool);
                ValidationDecision after = validation_pass(without_tool);
                if (before.verdict.verdict == Verdict::Absent) {
                    CHECK(after.verdict.verdict != Verdict::Present);
                }
                if (after.action == NextAction::Accept) {
                    // acceptance without the tool requires the agent verdict
                    CHECK(verifier == Verdict::Present);
                }
            }
        }
    }
}

TEST_CASE("verdict JSON round trip") {
    ValidationVerdict v{ValidationStage::StaticAnalysis, Verdict::Undecidable, "evidence", 4};
    ValidationVerdict back = validation_verdict_from_json(validation_verdict_to_json(v));
    CHECK(back.stage == v.stage);
    CHECK(back.verdict == v.verdict);
    CHECK(back.evidence == v.evidence);
    CHECK(back.iteration == v.iteration);

    StaticAnalysisFinding f{"cppcheck", "id", "CWE-787", FindingSeverity::Warning, 7, "m"};
    StaticAnalysisFinding fb = finding_from_json(finding_to_json(f));
    CHECK(fb.check_id == f.check_id);
    CHECK(fb.cwe == f.cwe);
    CHECK(fb.severity == f.severity);
    CHECK(fb.line == f.line);
}

TEST_CASE("subprocess: capture, exit codes, timeout") {
    SubprocessResult echo = run_subprocess({"echo", "hello"});
    CHECK(echo.exit_code == 0);
    CHECK(echo.stdout_text == "hello\n");

    SubprocessResult err = run_subprocess({"sh", "-c", "echo oops >&2; exit 3"});
    CHECK(err.exit_code == 3);
    CHECK(err.stderr_text == "oops\n");

    SubprocessResult slow = run_subprocess({"sleep", "5"}, 0.2);
    CHECK(slow.timed_out);

    CHECK_THROWS_AS(run_subprocess({"definitely-not-a-real-binary-xyz"}), ToolMissing);
    CHECK_FALSE(command_available("definitely-not-a-real-binary-xyz"));
}

TEST_CASE("run_cppcheck and run_esbmc are gated on tool availability") {
    if (command_available(resolve_cppcheck_path())) {
        auto findings = run_cppcheck("int f(){int*p=0;return *p;}", Dialect::C);
        bool has_null = false;
        for (const auto& f : findings) {
            if (f.cwe == "CWE-476") has_null = true;
        }
        CHECK(has_null);
        auto clean = run_cppcheck("int f(){return 0;}", Dialect::C);
        for (const auto& f : clean) CHECK(f.severity == FindingSeverity::Style);
    } else {
        CHECK_THROWS_AS(run_cppcheck("int f(){return 0;}", Dialect::C,
                                     ToolPaths{"/nonexistent/cppcheck", ""}),
                        ToolMissing);
        MESSAGE("cppcheck not available; live run skipped");
    }
    if (!command_available(resolve_esbmc_path())) {
        CHECK_THROWS_AS(run_esbmc("int main(){return 0;}", 100, 5,
                                  ToolPaths{"", "/nonexistent/esbmc"}),
                        ToolMissing);
        MESSAGE("esbmc not available; live run skipped");
    }
}
