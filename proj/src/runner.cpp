#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "aviator/dataset.hpp"
#include "aviator/edit_script.hpp"
#include "aviator/errors.hpp"
#include "aviator/digest.hpp"
#include "aviator/prompts.hpp"
#include "aviator/subprocess.hpp"

namespace aviator {

namespace {

std::string sanitize_for_path(const std::string& name) {
    std::string out;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out;
}

struct JobResult {
    bool success = false;
    Json record;       // dataset record when successful
    Json reject;       // reject-log entry otherwise
};

std::string injector_template_hash(PresetName preset) {
    return prompt_template(preset == PresetName::W1 ? "monolithic-injection"
                                                    : "vulnerability-injection")
        .hash();
}

}  // namespace

InjectionOutputs run_injection(const RunConfig& config,
                               const std::vector<SourceFunction>& corpus,
                               const KnowledgeBase* kb, TextGenerationProvider& provider,
                               EmbeddingProvider* embedder,
                               const std::filesystem::path& out_dir) {
    config.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir / "traces");

    std::string run_timestamp = config.timestamp;
    if (run_timestamp.empty()) run_timestamp = SystemClock().now_iso8601();

    std::vector<SourceFunction> samples = corpus;
    std::sort(samples.begin(), samples.end(),
              [](const SourceFunction& a, const SourceFunction& b) { return a.id < b.id; });

    std::vector<Json> presorted_rejects;
    std::vector<SourceFunction> runnable;
    for (SourceFunction& fn : samples) {
        if (fn.cwe_target.empty()) {
            presorted_rejects.push_back(Json{{"id", fn.id},
                                             {"run", nullptr},
                                             {"status", "skipped"},
                                             {"reason", "sample has no cwe target"},
                                             {"verdicts", Json::array()},
                                             {"trace", Json::array()}});
        } else {
            runnable.push_back(std::move(fn));
        }
    }

    WorkflowGraph graph = build_preset(config.preset);
    if (graph.loop_budgets.count("correction")) {
        graph.loop_budgets["correction"] = config.max_corrections;
    }
    const int runs = config.generations_per_sample;
    const std::string template_hash = injector_template_hash(config.preset);

    struct Job {
        std::size_t sample_index;
        int run;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < runnable.size(); ++s) {
        for (int r = 0; r < runs; ++r) jobs.push_back({s, r});
    }
    std::vector<JobResult> results(jobs.size());

    auto run_job = [&](const Job& job, JobResult& result) {
        const SourceFunction& sample = runnable[job.sample_index];
        std::uint64_t seed = config.seed + static_cast<std::uint64_t>(job.run);

        ExecutionEnv env;
        env.provider = &provider;
        env.kb = kb;
        env.embedder = embedder;
        env.retrieval_k = config.retrieval_k;
        env.tools = config.tools;
        env.clock = std::make_shared<FixedClock>(run_timestamp);
        env.agent_config.analysis_temperature = config.analysis_temperature;
        env.agent_config.injector_temperature = config.injector_temperature;
        env.agent_config.max_tokens = config.max_tokens;
        env.agent_config.parse_retries = config.parse_retries;
        env.agent_config.seed = seed;

        // digest suffix keeps distinct ids distinct after sanitizing
        std::string trace_name = sanitize_for_path(sample.id) + "_" +
                                 digest_hex(sample.id).substr(0, 8) + "_g" +
                                 std::to_string(job.run) + ".jsonl";
        std::string trace_ref = "traces/" + trace_name;

        RunOutcome outcome;
        try {
            outcome = execute(graph, sample, env);
        } catch (const Error& e) {
            result.success = false;
            result.reject = Json{{"id", sample.id},
                                 {"run", job.run},
                                 {"status", "error"},
                                 {"reason", e.what()},
                                 {"verdicts", Json::array()},
                                 {"trace", Json::array()}};
            return;
        }
        {
            std::ofstream trace_out(out_dir / "traces" / trace_name, std::ios::binary);
            trace_out << trace_to_jsonl(outcome.trace);
        }
        Json verdicts = Json::array();
        for (const ValidationVerdict& v : outcome.verdicts) {
            verdicts.push_back(validation_verdict_to_json(v));
        }
        if (outcome.status != RunStatus::Success) {
            Json trace_json = Json::array();
            for (const std::string& line : split_lines(trace_to_jsonl(outcome.trace))) {
                trace_json.push_back(Json::parse(line));
            }
            result.success = false;
            result.reject = Json{{"id", sample.id},
                                 {"run", job.run},
                                 {"status", to_string(outcome.status)},
                                 {"reason", outcome.failure_reason},
                                 {"verdicts", std::move(verdicts)},
                                 {"trace", std::move(trace_json)}};
            return;
        }

        DatasetRecord record;
        record.id = sample.id + "#g" + std::to_string(job.run);
        record.benign = sample.code;
        record.vulnerable = *outcome.final_candidate;
        record.cwe = normalize_cwe(sample.cwe_target);
        if (record.cwe.empty()) record.cwe = sample.cwe_target;
        record.dialect = sample.dialect;
        TokenSequence benign_toks = tokenize(record.benign, record.dialect);
        TokenSequence vuln_toks = tokenize(record.vulnerable, record.dialect);
        record.edit_script = edit_script_to_json(derive_edit_script(benign_toks, vuln_toks));
        record.verdicts = outcome.verdicts;
        record.workflow_preset = to_string(config.preset);
        record.trace_ref = trace_ref;
        record.provenance = {provider.model_name(), template_hash, seed, run_timestamp};
        validate_dataset_record(record);  // crash rather than emit a bad label
        result.success = true;
        result.record = dataset_record_to_json(record);
    };

    if (config.workers <= 1 || jobs.size() <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_job(jobs[i], results[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        int width = std::min<int>(config.workers, static_cast<int>(jobs.size()));
        for (int w = 0; w < width; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= jobs.size()) break;
                    run_job(jobs[i], results[i]);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    // single writer; jobs are already in (sample id, run) order
    InjectionOutputs out;
    out.dataset_path = out_dir / "dataset.jsonl";
    out.reject_path = out_dir / "rejects.jsonl";
    out.summary_path = out_dir / "summary.json";

    std::ofstream dataset_out(out.dataset_path, std::ios::binary);
    std::ofstream reject_out(out.reject_path, std::ios::binary);
    for (const Json& r : presorted_rejects) reject_out << r.dump() << "\n";
    std::vector<int> per_sample_successes(runnable.size(), 0);
    std::vector<int> per_run_successes(static_cast<std::size_t>(runs), 0);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (results[i].success) {
            dataset_out << results[i].record.dump() << "\n";
            out.summary.records += 1;
            per_sample_successes[jobs[i].sample_index] += 1;
            per_run_successes[static_cast<std::size_t>(jobs[i].run)] += 1;
        } else {
            reject_out << results[i].reject.dump() << "\n";
            out.failed_samples += 1;
        }
    }

    RunSummary& summary = out.summary;
    summary.samples = static_cast<int>(runnable.size());
    summary.runs = runs;
    summary.empty_corpus = runnable.empty();
    if (!runnable.empty()) {
        for (int r = 0; r < runs; ++r) {
            summary.per_run_success.push_back(
                static_cast<double>(per_run_successes[static_cast<std::size_t>(r)]) /
                static_cast<double>(runnable.size()));
        }
        summary.aisr_stats = aisr({summary.per_run_success});
        for (int k = 1; k <= runs; ++k) {
            double acc = 0.0;
            for (std::size_t s = 0; s < runnable.size(); ++s) {
                acc += pass_at_k(runs, per_sample_successes[s], k);
            }
            summary.pass_at_k_values[k] = acc / static_cast<double>(runnable.size());
        }
    }

    std::ofstream summary_out(out.summary_path, std::ios::binary);
    summary_out << summary_to_json(summary).dump(2) << "\n";
    return out;
}

namespace {

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read dataset " + path.string());
    std::vector<DatasetRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(dataset_record_from_json(Json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseFailure(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

// one member's evaluation: "clean", "trips", or "undecidable"
std::string esbmc_member(const std::string& code, const RunConfig& config) {
    VerificationOutcome v = run_esbmc(code, 100, 300, config.tools);
    switch (v.status) {
    case VerificationStatus::VerifiedSafe: return "clean";
    case VerificationStatus::CounterexampleFound: return "trips";
    case VerificationStatus::Timeout:
    case VerificationStatus::ToolError: return "undecidable";
    }
    return "undecidable";
}

std::string cppcheck_member(const std::string& code, Dialect dialect, const std::string& cwe,
                            const RunConfig& config, bool want_aligned) {
    HarnessResult harness = wrap_translation_unit(code, dialect);
    if (static_cast<int>(harness.unknown_identifiers.size()) > kUnknownIdentifierLimit) {
        return "undecidable";
    }
    std::vector<StaticAnalysisFinding> findings;
    try {
        findings = run_cppcheck(code, dialect, config.tools);
    } catch (const ToolCrash&) {
        return "undecidable";
    }
    std::vector<StaticAnalysisFinding> gating;
    for (const StaticAnalysisFinding& f : findings) {
        if (f.severity == FindingSeverity::Error || f.severity == FindingSeverity::Warning) {
            gating.push_back(f);
        }
    }
    if (want_aligned) {
        return cwe_alignment(gating, cwe).aligned ? "trips" : "clean";
    }
    return gating.empty() ? "clean" : "trips";
}

}  // namespace

EvalReport evaluate_dataset(const std::filesystem::path& dataset_jsonl, EvalMode mode,
                            const RunConfig& config) {
    std::string tool = mode == EvalMode::Esbmc ? resolve_esbmc_path(config.tools)
                                               : resolve_cppcheck_path(config.tools);
    if (!command_available(tool)) {
        throw ToolMissing("evaluation tool not available: " + tool);
    }
    std::vector<DatasetRecord> records = load_dataset(dataset_jsonl);
    EvalReport report;
    for (const DatasetRecord& r : records) {
        std::string vuln_state, benign_state;
        if (mode == EvalMode::Esbmc) {
            vuln_state = esbmc_member(r.vulnerable, config);
            benign_state = esbmc_member(r.benign, config);
        } else {
            vuln_state = cppcheck_member(r.vulnerable, r.dialect, r.cwe, config, true);
            benign_state = cppcheck_member(r.benign, r.dialect, r.cwe, config, false);
        }
        EvalRecordOutcome outcome;
        outcome.id = r.id;
        if (vuln_state == "undecidable" || benign_state == "undecidable") {
            outcome.outcome = "undecidable";
            report.undecidable += 1;
        } else if (vuln_state == "trips" && benign_state == "clean") {
            outcome.outcome = "success";
            report.successes += 1;
        } else {
            outcome.outcome = "failure";
            report.failures += 1;
        }
        outcome.detail = "vulnerable: " + vuln_state + "; benign: " + benign_state;
        report.records.push_back(std::move(outcome));
    }
    int decided = report.successes + report.failures;
    report.success_rate =
        decided > 0 ? static_cast<double>(report.successes) / decided : 0.0;
    return report;
}

Json eval_report_to_json(const EvalReport& report) {
    Json records = Json::array();
    for (const EvalRecordOutcome& r : report.records) {
        records.push_back({{"id", r.id}, {"outcome", r.outcome}, {"detail", r.detail}});
    }
    return Json{{"schema_version", 1},
                {"records", std::move(records)},
                {"successes", report.successes},
                {"failures", report.failures},
                {"undecidable", report.undecidable},
                {"success_rate", report.success_rate}};
}

}  // namespace aviator
