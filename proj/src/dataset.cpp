#include "aviator/dataset.hpp"

#include <cstdlib>
#include <fstream>
#include <map>

#include "aviator/edit_script.hpp"
#include "aviator/errors.hpp"

namespace aviator {

void validate_dataset_record(const DatasetRecord& record) {
    if (record.id.empty()) throw DomainError("dataset record without id");
    if (record.cwe.empty()) throw DomainError("dataset record without cwe: " + record.id);
    if (record.verdicts.empty() || record.verdicts.back().verdict != Verdict::Present) {
        throw DomainError("dataset record without a final present verdict: " + record.id);
    }
    TokenSequence benign = tokenize(record.benign, record.dialect);
    TokenSequence vulnerable = tokenize(record.vulnerable, record.dialect);
    EditScript script = edit_script_from_json(record.edit_script);
    TokenSequence rebuilt = apply_edit_script(benign, script);
    if (!same_lexemes(rebuilt.tokens, vulnerable.tokens)) {
        throw DomainError("edit script does not reproduce the vulnerable tokens: " + record.id);
    }
}

Json dataset_record_to_json(const DatasetRecord& record) {
    Json verdicts = Json::array();
    for (const ValidationVerdict& v : record.verdicts) {
        verdicts.push_back(validation_verdict_to_json(v));
    }
    return Json{{"id", record.id},
                {"benign", record.benign},
                {"vulnerable", record.vulnerable},
                {"cwe", record.cwe},
                {"dialect", to_string(record.dialect)},
                {"edit_script", record.edit_script},
                {"verdicts", std::move(verdicts)},
                {"workflow_preset", record.workflow_preset},
                {"trace_ref", record.trace_ref},
                {"provenance",
                 {{"provider_model", record.provenance.provider_model},
                  {"prompt_template_hash", record.provenance.prompt_template_hash},
                  {"seed", record.provenance.seed},
                  {"timestamp", record.provenance.timestamp}}}};
}

DatasetRecord dataset_record_from_json(const Json& j) {
    DatasetRecord r;
    r.id = j.at("id").get<std::string>();
    r.benign = j.at("benign").get<std::string>();
    r.vulnerable = j.at("vulnerable").get<std::string>();
    r.cwe = j.at("cwe").get<std::string>();
    r.dialect = dialect_from_string(j.at("dialect").get<std::string>());
    r.edit_script = j.at("edit_script");
    for (const Json& v : j.at("verdicts")) {
        r.verdicts.push_back(validation_verdict_from_json(v));
    }
    r.workflow_preset = j.at("workflow_preset").get<std::string>();
    r.trace_ref = j.at("trace_ref").get<std::string>();
    const Json& p = j.at("provenance");
    r.provenance.provider_model = p.at("provider_model").get<std::string>();
    r.provenance.prompt_template_hash = p.at("prompt_template_hash").get<std::string>();
    r.provenance.seed = p.at("seed").get<std::uint64_t>();
    r.provenance.timestamp = p.at("timestamp").get<std::string>();
    return r;
}

void RunConfig::validate() const {
    if (retrieval_k < 1) throw ConfigError("retrieval_k must be >= 1");
    if (max_corrections < 0) throw ConfigError("max_corrections must be >= 0");
    if (generations_per_sample < 1) throw ConfigError("generations_per_sample must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (provider.type != "mock" && provider.type != "http") {
        throw ConfigError("provider.type must be mock or http");
    }
    if (provider.type == "mock" && provider.fixtures_dir.empty()) {
        throw ConfigError("mock provider needs fixtures_dir");
    }
}

RunConfig run_config_from_json(const Json& j) {
    RunConfig c;
    if (j.contains("preset")) c.preset = preset_from_string(j["preset"].get<std::string>());
    if (j.contains("retrieval_k")) c.retrieval_k = j["retrieval_k"].get<std::size_t>();
    if (j.contains("max_corrections")) c.max_corrections = j["max_corrections"].get<int>();
    if (j.contains("generations_per_sample")) {
        c.generations_per_sample = j["generations_per_sample"].get<int>();
    }
    if (j.contains("analysis_temperature")) {
        c.analysis_temperature = j["analysis_temperature"].get<double>();
    }
    if (j.contains("injector_temperature")) {
        c.injector_temperature = j["injector_temperature"].get<double>();
    }
    if (j.contains("max_tokens")) c.max_tokens = j["max_tokens"].get<int>();
    if (j.contains("parse_retries")) c.parse_retries = j["parse_retries"].get<int>();
    if (j.contains("cppcheck_path")) c.tools.cppcheck = j["cppcheck_path"].get<std::string>();
    if (j.contains("esbmc_path")) c.tools.esbmc = j["esbmc_path"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("timestamp")) c.timestamp = j["timestamp"].get<std::string>();
    if (j.contains("workers")) c.workers = j["workers"].get<int>();
    if (j.contains("embedding_dim")) c.embedding_dim = j["embedding_dim"].get<std::size_t>();
    if (j.contains("provider")) {
        const Json& p = j["provider"];
        if (p.contains("type")) c.provider.type = p["type"].get<std::string>();
        if (p.contains("fixtures_dir")) {
            c.provider.fixtures_dir = p["fixtures_dir"].get<std::string>();
        }
        if (p.contains("url")) c.provider.url = p["url"].get<std::string>();
        if (p.contains("token")) c.provider.token = p["token"].get<std::string>();
        if (p.contains("model")) c.provider.model = p["model"].get<std::string>();
    }
    // environment overrides
    if (const char* v = std::getenv("AVIATOR_LLM_URL"); v && *v) c.provider.url = v;
    if (const char* v = std::getenv("AVIATOR_LLM_TOKEN"); v && *v) c.provider.token = v;
    if (const char* v = std::getenv("AVIATOR_CPPCHECK_PATH"); v && *v) c.tools.cppcheck = v;
    if (const char* v = std::getenv("AVIATOR_ESBMC_PATH"); v && *v) c.tools.esbmc = v;
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return run_config_from_json(j);
}

CorpusLoadResult ingest_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot read corpus " + path.string());

    CorpusLoadResult out;
    std::map<std::string, int> seen;  // id -> first line
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            out.rejected.push_back({line_no, std::string("malformed JSON: ") + e.what()});
            continue;
        }
        if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
            out.rejected.push_back({line_no, "missing required field 'id'"});
            continue;
        }
        if (!j.contains("code") || !j["code"].is_string() ||
            j["code"].get<std::string>().empty()) {
            out.rejected.push_back({line_no, "missing required field 'code'"});
            continue;
        }
        std::string id = j["id"].get<std::string>();
        auto [it, inserted] = seen.emplace(id, line_no);
        if (!inserted) {
            throw CorpusError("duplicate id '" + id + "' at lines " +
                              std::to_string(it->second) + " and " + std::to_string(line_no));
        }
        SourceFunction fn;
        fn.id = std::move(id);
        fn.code = j["code"].get<std::string>();
        if (j.contains("cwe") && j["cwe"].is_string()) {
            fn.cwe_target = j["cwe"].get<std::string>();
        }
        if (j.contains("origin") && j["origin"].is_string()) {
            fn.origin = j["origin"].get<std::string>();
        }
        fn.dialect = Dialect::Cpp;
        if (j.contains("dialect") && j["dialect"].is_string()) {
            fn.dialect = dialect_from_string(j["dialect"].get<std::string>());
        }
        if (j.contains("pair_vulnerable") && j["pair_vulnerable"].is_string()) {
            out.paired_vulnerable[fn.id] = j["pair_vulnerable"].get<std::string>();
        }
        out.functions.push_back(std::move(fn));
    }
    return out;
}

Json summary_to_json(const RunSummary& summary) {
    Json pass_at_k = Json::object();
    for (const auto& [k, v] : summary.pass_at_k_values) {
        pass_at_k[std::to_string(k)] = v;
    }
    return Json{{"schema_version", 1},
                {"samples", summary.samples},
                {"runs", summary.runs},
                {"records", summary.records},
                {"per_run_success", summary.per_run_success},
                {"aisr", {{"mean", summary.aisr_stats.mean}, {"std", summary.aisr_stats.std}}},
                {"pass_at_k", std::move(pass_at_k)},
                {"empty_corpus", summary.empty_corpus}};
}

EvalMode eval_mode_from_string(std::string_view name) {
    if (name == "esbmc") return EvalMode::Esbmc;
    if (name == "cppcheck") return EvalMode::Cppcheck;
    throw ConfigError("unknown evaluation mode: " + std::string(name));
}

}  // namespace aviator
