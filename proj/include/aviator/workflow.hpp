#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aviator/agents.hpp"
#include "aviator/providers.hpp"
#include "aviator/rag.hpp"
#include "aviator/validation.hpp"

namespace aviator {

using Json = nlohmann::ordered_json;

enum class NodeKind { LlmAgent, Tool, Control };

const char* to_string(NodeKind k);

struct AgentNode {
    std::string id;
    NodeKind kind = NodeKind::LlmAgent;
    std::vector<std::string> input_keys;
    std::vector<std::string> output_keys;
};

struct WorkflowEdge {
    std::string from;
    std::string to;
    std::string condition = "always";
    std::string loop_name;  // non-empty marks a budgeted corrective edge
};

struct WorkflowGraph {
    std::vector<AgentNode> nodes;
    std::vector<WorkflowEdge> edges;
    std::string entry;
    std::map<std::string, int> loop_budgets;

    const AgentNode* find_node(const std::string& id) const;
    // endpoints and entry exist; every cycle passes a budgeted loop edge
    void validate() const;
};

struct TraceEvent {
    std::string node;
    int iteration = 0;
    std::map<std::string, std::string> input_digests;
    std::map<std::string, std::string> output_digests;
    std::string ts;
};

std::string trace_to_jsonl(const std::vector<TraceEvent>& trace);

// Versioned, write-once artifact store confined to one execution. Reads and
// writes are checked against the active node's declared keys.
class RunContext {
public:
    void put(const std::string& key, Json value);
    const Json& get(const std::string& key) const;
    bool has(const std::string& key) const;
    const std::vector<Json>& versions(const std::string& key) const;
    int version_count(const std::string& key) const;

    int loop_count(const std::string& name) const;
    void bump_loop(const std::string& name);

    // engine hooks restricting access to the declared keys
    void begin_node(const AgentNode* node);
    void end_node();

    std::vector<TraceEvent> trace;

private:
    std::map<std::string, std::vector<Json>> artifacts_;
    std::map<std::string, int> loops_;
    const AgentNode* active_ = nullptr;
};

enum class RunStatus { Success, FailedValidation, BudgetExhausted, ProviderError };

const char* to_string(RunStatus s);

struct RunOutcome {
    RunStatus status = RunStatus::ProviderError;
    std::optional<std::string> final_candidate;
    std::vector<ValidationVerdict> verdicts;
    std::string trace_ref;
    std::vector<TraceEvent> trace;
    std::string failure_reason;
    int corrective_iterations = 0;
};

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::string now_iso8601() = 0;
};

class SystemClock final : public Clock {
public:
    std::string now_iso8601() override;
};

// Returns a fixed instant on every call; pins traces and provenance for
// reproducible runs.
class FixedClock final : public Clock {
public:
    explicit FixedClock(std::string instant) : instant_(std::move(instant)) {}
    std::string now_iso8601() override { return instant_; }

private:
    std::string instant_;
};

struct ExecutionEnv {
    TextGenerationProvider* provider = nullptr;
    const KnowledgeBase* kb = nullptr;
    EmbeddingProvider* embedder = nullptr;
    AgentConfig agent_config;
    ToolPaths tools;
    std::shared_ptr<Clock> clock;  // SystemClock when unset
    std::size_t retrieval_k = 4;
};

enum class PresetName { W1, W3, W5, W7, W9, W11, W13 };

PresetName preset_from_string(std::string_view name);  // unknown-preset error
const char* to_string(PresetName p);
int preset_rank(PresetName p);  // the numeral, equals the node count

WorkflowGraph build_preset(PresetName preset);

// Pure function of the context artifacts; throws MissingArtifact.
bool evaluate_condition(const std::string& name, const RunContext& ctx);

using NodeHandler =
    std::function<void(RunContext&, const SourceFunction&, const ExecutionEnv&)>;
using HandlerMap = std::map<std::string, NodeHandler>;

// Built-in handlers for the canonical preset node ids.
const HandlerMap& default_handlers();

RunOutcome execute(const WorkflowGraph& graph, const SourceFunction& sample,
                   const ExecutionEnv& env, const HandlerMap* overrides = nullptr);

}  // namespace aviator
