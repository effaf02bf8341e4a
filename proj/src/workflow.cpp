#include "aviator/workflow.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>
#include <sstream>

#include "aviator/digest.hpp"
#include "aviator/edit_script.hpp"
#include "aviator/errors.hpp"
#include "aviator/line_diff.hpp"

namespace aviator {

const char* to_string(NodeKind k) {
    switch (k) {
    case NodeKind::LlmAgent: return "llm-agent";
    case NodeKind::Tool: return "tool";
    case NodeKind::Control: return "control";
    }
    return "control";
}

const char* to_string(RunStatus s) {
    switch (s) {
    case RunStatus::Success: return "success";
    case RunStatus::FailedValidation: return "failed-validation";
    case RunStatus::BudgetExhausted: return "budget-exhausted";
    case RunStatus::ProviderError: return "provider-error";
    }
    return "provider-error";
}

const AgentNode* WorkflowGraph::find_node(const std::string& id) const {
    for (const AgentNode& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

void WorkflowGraph::validate() const {
    if (!find_node(entry)) throw DomainError("workflow entry node missing: " + entry);
    std::set<std::string> ids;
    for (const AgentNode& n : nodes) {
        if (!ids.insert(n.id).second) throw DomainError("duplicate node id: " + n.id);
    }
    for (const WorkflowEdge& e : edges) {
        if (!find_node(e.from)) throw DomainError("edge from unknown node: " + e.from);
        if (!find_node(e.to)) throw DomainError("edge to unknown node: " + e.to);
        if (!e.loop_name.empty() && !loop_budgets.count(e.loop_name)) {
            throw DomainError("loop edge without budget: " + e.loop_name);
        }
    }
    // termination: the graph restricted to non-budgeted edges must be acyclic
    std::map<std::string, std::vector<std::string>> adj;
    for (const WorkflowEdge& e : edges) {
        if (e.loop_name.empty()) adj[e.from].push_back(e.to);
    }
    std::map<std::string, int> state;  // 0 unseen, 1 in-stack, 2 done
    std::function<void(const std::string&)> visit = [&](const std::string& id) {
        state[id] = 1;
        for (const std::string& next : adj[id]) {
            if (state[next] == 1) {
                throw DomainError("cycle without a budgeted loop edge through " + next);
            }
            if (state[next] == 0) visit(next);
        }
        state[id] = 2;
    };
    for (const AgentNode& n : nodes) {
        if (state[n.id] == 0) visit(n.id);
    }
}

std::string trace_to_jsonl(const std::vector<TraceEvent>& trace) {
    std::string out;
    for (const TraceEvent& e : trace) {
        Json j;
        j["node"] = e.node;
        j["iteration"] = e.iteration;
        j["input_digests"] = e.input_digests;
        j["output_digests"] = e.output_digests;
        j["ts"] = e.ts;
        out += j.dump();
        out += "\n";
    }
    return out;
}

void RunContext::put(const std::string& key, Json value) {
    if (active_) {
        bool declared = std::find(active_->output_keys.begin(), active_->output_keys.end(),
                                  key) != active_->output_keys.end();
        if (!declared) {
            throw DomainError("node '" + active_->id + "' writes undeclared key '" + key + "'");
        }
    }
    artifacts_[key].push_back(std::move(value));
}

const Json& RunContext::get(const std::string& key) const {
    if (active_) {
        bool declared = std::find(active_->input_keys.begin(), active_->input_keys.end(),
                                  key) != active_->input_keys.end();
        if (!declared) {
            throw DomainError("node '" + active_->id + "' reads undeclared key '" + key + "'");
        }
    }
    auto it = artifacts_.find(key);
    if (it == artifacts_.end() || it->second.empty()) {
        throw MissingArtifact("no artifact for key '" + key + "'");
    }
    return it->second.back();
}

bool RunContext::has(const std::string& key) const {
    if (active_) {
        bool declared = std::find(active_->input_keys.begin(), active_->input_keys.end(),
                                  key) != active_->input_keys.end();
        if (!declared) return false;
    }
    auto it = artifacts_.find(key);
    return it != artifacts_.end() && !it->second.empty();
}

const std::vector<Json>& RunContext::versions(const std::string& key) const {
    if (active_) {
        bool declared = std::find(active_->input_keys.begin(), active_->input_keys.end(),
                                  key) != active_->input_keys.end();
        if (!declared) {
            throw DomainError("node '" + active_->id + "' reads undeclared key '" + key + "'");
        }
    }
    static const std::vector<Json> empty;
    auto it = artifacts_.find(key);
    return it == artifacts_.end() ? empty : it->second;
}

int RunContext::version_count(const std::string& key) const {
    return static_cast<int>(versions(key).size());
}

int RunContext::loop_count(const std::string& name) const {
    auto it = loops_.find(name);
    return it == loops_.end() ? 0 : it->second;
}

void RunContext::bump_loop(const std::string& name) { loops_[name] += 1; }

void RunContext::begin_node(const AgentNode* node) { active_ = node; }
void RunContext::end_node() { active_ = nullptr; }

std::string SystemClock::now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

PresetName preset_from_string(std::string_view name) {
    if (name == "W1") return PresetName::W1;
    if (name == "W3") return PresetName::W3;
    if (name == "W5") return PresetName::W5;
    if (name == "W7") return PresetName::W7;
    if (name == "W9") return PresetName::W9;
    if (name == "W11") return PresetName::W11;
    if (name == "W13") return PresetName::W13;
    throw DomainError("unknown preset: " + std::string(name));
}

const char* to_string(PresetName p) {
    switch (p) {
    case PresetName::W1: return "W1";
    case PresetName::W3: return "W3";
    case PresetName::W5: return "W5";
    case PresetName::W7: return "W7";
    case PresetName::W9: return "W9";
    case PresetName::W11: return "W11";
    case PresetName::W13: return "W13";
    }
    return "W13";
}

int preset_rank(PresetName p) {
    switch (p) {
    case PresetName::W1: return 1;
    case PresetName::W3: return 3;
    case PresetName::W5: return 5;
    case PresetName::W7: return 7;
    case PresetName::W9: return 9;
    case PresetName::W11: return 11;
    case PresetName::W13: return 13;
    }
    return 13;
}

bool evaluate_condition(const std::string& name, const RunContext& ctx) {
    if (name == "always") return true;
    if (name == "diff-trivial?") return ctx.get("diff_trivial").get<bool>();
    if (name == "diff-substantive?") return !ctx.get("diff_trivial").get<bool>();
    if (name == "diff-analyzer-passed?") {
        return ctx.get("diff_verdict").at("verdict").get<std::string>() == "present";
    }
    if (name == "diff-analyzer-rejected?") {
        return ctx.get("diff_verdict").at("verdict").get<std::string>() != "present";
    }
    if (name == "verifier-passed?") {
        return ctx.get("verifier_verdict").at("verdict").get<std::string>() == "present";
    }
    if (name == "verifier-rejected?") {
        return ctx.get("verifier_verdict").at("verdict").get<std::string>() != "present";
    }
    throw DomainError("unknown condition: " + name);
}

namespace {

std::string digest_of(const Json& j) { return digest_hex(j.dump()); }

RunOutcome finish(RunContext& ctx, RunStatus status, std::string failure_reason) {
    RunOutcome out;
    out.status = status;
    out.failure_reason = std::move(failure_reason);
    out.corrective_iterations = ctx.loop_count("correction");
    for (const Json& v : ctx.versions("verdicts")) {
        ValidationVerdict verdict;
        verdict.stage = [&] {
            std::string s = v.at("stage").get<std::string>();
            if (s == "triviality") return ValidationStage::Triviality;
            if (s == "diff-analysis") return ValidationStage::DiffAnalysis;
            if (s == "static-analysis") return ValidationStage::StaticAnalysis;
            return ValidationStage::Final;
        }();
        verdict.verdict = verdict_from_string(v.at("verdict").get<std::string>());
        verdict.evidence = v.at("evidence").get<std::string>();
        verdict.iteration = v.at("iteration").get<int>();
        out.verdicts.push_back(std::move(verdict));
    }
    if (status == RunStatus::Success) {
        out.final_candidate = ctx.versions("candidate").back().at("code").get<std::string>();
    }
    out.trace = ctx.trace;
    return out;
}

}  // namespace

RunOutcome execute(const WorkflowGraph& graph, const SourceFunction& sample,
                   const ExecutionEnv& env, const HandlerMap* overrides) {
    graph.validate();
    if (!env.provider) throw ConfigError("execution env has no text provider");
    std::shared_ptr<Clock> clock = env.clock ? env.clock : std::make_shared<SystemClock>();

    RunContext ctx;
    ctx.put("benign_function", Json{{"id", sample.id},
                                    {"code", sample.code},
                                    {"dialect", to_string(sample.dialect)},
                                    {"cwe", sample.cwe_target},
                                    {"origin", sample.origin}});
    ctx.put("cwe_target", sample.cwe_target);

    Json examples = Json::array();
    Json example_ids = Json::array();
    if (env.kb && env.embedder && !env.kb->empty()) {
        auto hits = env.kb->retrieve(sample.code, *env.embedder, env.retrieval_k);
        for (const KnowledgePair* pair : hits) {
            examples.push_back(annotate_pair(*pair));
            example_ids.push_back(pair->id);
        }
    }
    ctx.put("retrieved_examples", std::move(examples));
    ctx.put("retrieved_ids", std::move(example_ids));

    const HandlerMap& defaults = default_handlers();
    auto handler_for = [&](const std::string& id) -> const NodeHandler* {
        if (overrides) {
            auto it = overrides->find(id);
            if (it != overrides->end()) return &it->second;
        }
        auto it = defaults.find(id);
        return it == defaults.end() ? nullptr : &it->second;
    };

    const AgentNode* current = graph.find_node(graph.entry);
    while (true) {
        const NodeHandler* handler = handler_for(current->id);
        if (!handler) throw ConfigError("no handler for node '" + current->id + "'");

        TraceEvent event;
        event.node = current->id;
        event.iteration = ctx.loop_count("correction");
        for (const std::string& key : current->input_keys) {
            if (ctx.version_count(key) > 0) {
                event.input_digests[key] = digest_of(ctx.versions(key).back());
            }
        }
        ctx.begin_node(current);
        try {
            (*handler)(ctx, sample, env);
        } catch (const ProviderError& e) {
            ctx.end_node();
            event.ts = clock->now_iso8601();
            ctx.trace.push_back(std::move(event));
            return finish(ctx, RunStatus::ProviderError, e.what());
        } catch (const ParseFailure& e) {
            ctx.end_node();
            event.ts = clock->now_iso8601();
            ctx.trace.push_back(std::move(event));
            return finish(ctx, RunStatus::ProviderError,
                          std::string("parse failure after retries: ") + e.what());
        }
        ctx.end_node();
        for (const std::string& key : current->output_keys) {
            if (ctx.version_count(key) > 0) {
                event.output_digests[key] = digest_of(ctx.versions(key).back());
            }
        }
        event.ts = clock->now_iso8601();
        ctx.trace.push_back(std::move(event));

        const WorkflowEdge* taken = nullptr;
        for (const WorkflowEdge& e : graph.edges) {
            if (e.from != current->id) continue;
            if (evaluate_condition(e.condition, ctx)) {
                taken = &e;
                break;
            }
        }
        if (!taken) {
            // terminal node: outcome follows the last verdict
            bool has_verdicts = ctx.version_count("verdicts") > 0;
            if (!has_verdicts) {
                if (ctx.version_count("candidate") == 0) {
                    return finish(ctx, RunStatus::FailedValidation, "no candidate produced");
                }
                // presets without validation stages accept the parsed candidate
                ctx.put("verdicts",
                        Json{{"stage", "final"},
                             {"verdict", "present"},
                             {"evidence", "preset has no validation stages"},
                             {"iteration", ctx.loop_count("correction")}});
                return finish(ctx, RunStatus::Success, "");
            }
            Json last = ctx.versions("verdicts").back();
            if (last.at("verdict").get<std::string>() == "present") {
                return finish(ctx, RunStatus::Success, "");
            }
            return finish(ctx, RunStatus::FailedValidation,
                          "terminal verdict: " + last.at("verdict").get<std::string>());
        }
        if (!taken->loop_name.empty()) {
            int budget = graph.loop_budgets.at(taken->loop_name);
            if (ctx.loop_count(taken->loop_name) >= budget) {
                return finish(ctx, RunStatus::BudgetExhausted,
                              "loop '" + taken->loop_name + "' exhausted its budget of " +
                                  std::to_string(budget));
            }
            ctx.bump_loop(taken->loop_name);
        }
        current = graph.find_node(taken->to);
    }
}

}  // namespace aviator
