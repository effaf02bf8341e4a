#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"

#include "aviator/dataset.hpp"
#include "aviator/errors.hpp"
#include "aviator/metrics.hpp"
#include "aviator/providers.hpp"
#include "aviator/rag.hpp"

using namespace aviator;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitToolMissing = 2;
constexpr int kExitPartialFailures = 3;

std::unique_ptr<TextGenerationProvider> make_provider(const ProviderSpec& spec) {
    if (spec.type == "mock") {
        return std::make_unique<ReplayProvider>(spec.fixtures_dir, spec.model);
    }
    if (!spec.url.empty()) {
        return std::make_unique<HttpChatProvider>(spec.url, spec.token, spec.model);
    }
    return make_http_provider_from_env(spec.model);
}

int cmd_kb_build(const std::string& in_path, const std::string& out_dir, std::size_t dim) {
    HashEmbeddingProvider embedder(dim);
    std::vector<KnowledgePair> pairs = load_kb_pairs(in_path);
    KnowledgeBase kb = KnowledgeBase::build(std::move(pairs), embedder);
    kb.save(out_dir);
    std::printf("built knowledge base: %zu pairs, dimension %zu -> %s\n", kb.size(),
                kb.dimension(), out_dir.c_str());
    return kExitOk;
}

int cmd_inject(const std::string& config_path, const std::string& corpus_path,
               const std::string& kb_dir, const std::string& out_dir) {
    RunConfig config = load_run_config(config_path);
    CorpusLoadResult corpus = ingest_corpus(corpus_path);
    for (const CorpusReject& r : corpus.rejected) {
        std::fprintf(stderr, "corpus line %d rejected: %s\n", r.line, r.reason.c_str());
    }

    std::unique_ptr<KnowledgeBase> kb;
    std::unique_ptr<HashEmbeddingProvider> embedder;
    if (!kb_dir.empty()) {
        kb = std::make_unique<KnowledgeBase>(KnowledgeBase::load(kb_dir));
        embedder = std::make_unique<HashEmbeddingProvider>(kb->dimension());
    } else if (preset_rank(config.preset) >= 5) {
        std::fprintf(stderr, "note: no knowledge base given; injector prompts carry no "
                             "retrieved examples\n");
    }

    std::unique_ptr<TextGenerationProvider> provider = make_provider(config.provider);
    InjectionOutputs out = run_injection(config, corpus.functions, kb.get(), *provider,
                                         embedder.get(), out_dir);
    std::printf("%s", render_summary_table(summary_to_json(out.summary)).c_str());
    std::printf("dataset: %s\n", out.dataset_path.c_str());
    std::printf("rejects: %s\n", out.reject_path.c_str());
    if (out.failed_samples > 0 || !corpus.rejected.empty()) return kExitPartialFailures;
    return kExitOk;
}

int cmd_evaluate(const std::string& dataset_path, const std::string& mode_name,
                 const std::string& config_path, const std::string& out_path) {
    RunConfig config;
    config.provider.fixtures_dir = "-";  // provider unused during evaluation
    if (!config_path.empty()) config = load_run_config(config_path);
    EvalReport report = evaluate_dataset(dataset_path, eval_mode_from_string(mode_name),
                                         config);
    Json j = eval_report_to_json(report);
    if (out_path.empty()) {
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::ofstream out(out_path, std::ios::binary);
        out << j.dump(2) << "\n";
    }
    std::printf("successes=%d failures=%d undecidable=%d success_rate=%.6f\n",
                report.successes, report.failures, report.undecidable, report.success_rate);
    return report.failures > 0 ? kExitPartialFailures : kExitOk;
}

int cmd_score(const std::string& in_path, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw ConfigError("cannot read " + in_path);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + out_path);

    std::string line;
    int line_no = 0;
    int scored = 0;
    double composite_sum = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Json j = Json::parse(line);
        std::string id = j.value("id", std::to_string(line_no));
        ScoreBreakdown s = codebleu(j.at("candidate").get<std::string>(),
                                    j.at("reference").get<std::string>());
        out << Json{{"id", id},
                    {"bleu", s.bleu},
                    {"weighted_bleu", s.weighted_bleu},
                    {"ast_match", s.ast_match},
                    {"dataflow_match", s.dataflow_match},
                    {"composite", s.composite},
                    {"ast_fallback", s.ast_fallback},
                    {"dataflow_fallback", s.dataflow_fallback}}
                   .dump()
            << "\n";
        composite_sum += s.composite;
        ++scored;
    }
    Json summary{{"summary", true},
                 {"pairs", scored},
                 {"mean_composite", scored > 0 ? composite_sum / scored : 0.0}};
    out << summary.dump() << "\n";
    std::printf("scored %d pairs -> %s\n", scored, out_path.c_str());
    return kExitOk;
}

int cmd_report(const std::string& summary_path) {
    std::ifstream in(summary_path);
    if (!in) throw ConfigError("cannot read " + summary_path);
    Json summary = Json::parse(in);
    std::printf("%s", render_summary_table(summary).c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CWE-labeled vulnerability injection pipeline"};
    app.require_subcommand(1);

    auto* kb = app.add_subcommand("kb", "knowledge base maintenance");
    kb->require_subcommand(1);
    auto* kb_build = kb->add_subcommand("build", "embed aligned pairs into a knowledge base");
    std::string kb_in, kb_out;
    std::size_t kb_dim = 64;
    kb_build->add_option("--in", kb_in, "pairs JSONL: {id, benign, vulnerable, cwe}")
        ->required();
    kb_build->add_option("--out", kb_out, "output directory")->required();
    kb_build->add_option("--dim", kb_dim, "embedding dimension");

    auto* inject = app.add_subcommand("inject", "run the injection pipeline over a corpus");
    std::string inj_config, inj_corpus, inj_kb, inj_out;
    inject->add_option("--config", inj_config, "run configuration JSON")->required();
    inject->add_option("--corpus", inj_corpus, "corpus JSONL")->required();
    inject->add_option("--kb", inj_kb, "knowledge base directory");
    inject->add_option("--out", inj_out, "output directory")->required();

    auto* evaluate = app.add_subcommand("evaluate", "check a dataset with an external tool");
    std::string ev_dataset, ev_mode, ev_config, ev_out;
    evaluate->add_option("--dataset", ev_dataset, "dataset JSONL")->required();
    evaluate->add_option("--mode", ev_mode, "esbmc | cppcheck")->required();
    evaluate->add_option("--config", ev_config, "run configuration JSON (tool paths)");
    evaluate->add_option("--out", ev_out, "write the report JSON here");

    auto* score = app.add_subcommand("score", "CodeBLEU over candidate/reference pairs");
    std::string sc_in, sc_out;
    score->add_option("--in", sc_in, "JSONL: {id, candidate, reference}")->required();
    score->add_option("--out", sc_out, "breakdown JSONL output")->required();

    auto* report = app.add_subcommand("report", "render a summary JSON as a table");
    std::string rp_summary;
    report->add_option("--summary", rp_summary, "summary.json from inject")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (kb_build->parsed()) return cmd_kb_build(kb_in, kb_out, kb_dim);
        if (inject->parsed()) return cmd_inject(inj_config, inj_corpus, inj_kb, inj_out);
        if (evaluate->parsed()) return cmd_evaluate(ev_dataset, ev_mode, ev_config, ev_out);
        if (score->parsed()) return cmd_score(sc_in, sc_out);
        if (report->parsed()) return cmd_report(rp_summary);
    } catch (const ToolMissing& e) {
        std::fprintf(stderr, "tool missing: %s\n", e.what());
        return kExitToolMissing;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
