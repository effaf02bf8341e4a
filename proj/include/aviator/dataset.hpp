#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aviator/metrics.hpp"
#include "aviator/workflow.hpp"

namespace aviator {

struct Provenance {
    std::string provider_model;
    std::string prompt_template_hash;
    std::uint64_t seed = 0;
    std::string timestamp;
};

struct DatasetRecord {
    std::string id;
    std::string benign;
    std::string vulnerable;
    std::string cwe;
    Json edit_script;  // serialized EditScript (token positions are 0-based)
    std::vector<ValidationVerdict> verdicts;
    std::string workflow_preset;
    std::string trace_ref;
    Provenance provenance;
    Dialect dialect = Dialect::Cpp;
};

// Re-applies the edit script to the tokenized benign code and checks it
// reproduces the vulnerable tokens; requires a final `present` verdict.
// Throws DomainError so that a bad label crashes the run instead of being
// emitted.
void validate_dataset_record(const DatasetRecord& record);

Json dataset_record_to_json(const DatasetRecord& record);
DatasetRecord dataset_record_from_json(const Json& j);

struct ProviderSpec {
    std::string type = "mock";  // mock | http
    std::string fixtures_dir;   // mock
    std::string url;            // http; AVIATOR_LLM_URL when empty
    std::string token;          // http; AVIATOR_LLM_TOKEN when empty
    std::string model = "replay";
};

struct RunConfig {
    PresetName preset = PresetName::W13;
    std::size_t retrieval_k = 4;
    int max_corrections = 10;
    int generations_per_sample = 5;
    double analysis_temperature = 0.2;
    double injector_temperature = 0.8;
    int max_tokens = 2048;
    int parse_retries = 3;
    ToolPaths tools;
    ProviderSpec provider;
    std::uint64_t seed = 0;
    std::string timestamp;  // pinned provenance/trace instant; wall clock when empty
    int workers = 1;
    std::size_t embedding_dim = 64;

    void validate() const;  // throws ConfigError
};

// JSON config with environment overrides (AVIATOR_LLM_URL, AVIATOR_LLM_TOKEN,
// AVIATOR_CPPCHECK_PATH, AVIATOR_ESBMC_PATH).
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::filesystem::path& path);

struct CorpusReject {
    int line = 0;
    std::string reason;
};

struct CorpusLoadResult {
    std::vector<SourceFunction> functions;
    std::vector<CorpusReject> rejected;
    // paired vulnerable versions, when the corpus carries them (KB building)
    std::map<std::string, std::string> paired_vulnerable;
};

// JSONL: {"id", "code", "cwe"?, "pair_vulnerable"?, "origin"?, "dialect"?}.
// Malformed or incomplete lines land in `rejected`; duplicate ids are an
// error naming both lines.
CorpusLoadResult ingest_corpus(const std::filesystem::path& path);

struct RunSummary {
    int samples = 0;
    int runs = 0;
    int records = 0;
    std::vector<double> per_run_success;
    MeanStd aisr_stats;
    std::map<int, double> pass_at_k_values;
    bool empty_corpus = false;
};

Json summary_to_json(const RunSummary& summary);  // schema_version 1

struct InjectionOutputs {
    std::filesystem::path dataset_path;
    std::filesystem::path reject_path;
    std::filesystem::path summary_path;
    RunSummary summary;
    int failed_samples = 0;
};

InjectionOutputs run_injection(const RunConfig& config,
                               const std::vector<SourceFunction>& corpus,
                               const KnowledgeBase* kb, TextGenerationProvider& provider,
                               EmbeddingProvider* embedder,
                               const std::filesystem::path& out_dir);

enum class EvalMode { Esbmc, Cppcheck };

EvalMode eval_mode_from_string(std::string_view name);

struct EvalRecordOutcome {
    std::string id;
    std::string outcome;  // success | failure | undecidable
    std::string detail;
};

struct EvalReport {
    std::vector<EvalRecordOutcome> records;
    int successes = 0;
    int failures = 0;
    int undecidable = 0;
    double success_rate = 0.0;  // over conclusively assessed records
};

// Esbmc mode: the vulnerable member must produce a counterexample and the
// benign member must verify safe. Cppcheck mode mirrors it with CWE-aligned
// findings. Timeouts and tool errors are undecidable and excluded from the
// success denominator.
EvalReport evaluate_dataset(const std::filesystem::path& dataset_jsonl, EvalMode mode,
                            const RunConfig& config);

Json eval_report_to_json(const EvalReport& report);

// Human-readable rendering of a machine summary (versioned schema).
std::string render_summary_table(const Json& summary);

}  // namespace aviator
