// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "last/tooling.hpp"

namespace last {

/// Deterministic text token estimate used for all context budgeting.
int estimate_text_tokens(const std::string& text);

struct TraceRound {
    std::string model_text;
    std::optional<ToolCall> tool_call;
    std::optional<ToolResult> tool_result;
    int text_tokens_in = 0;
    int text_tokens_out = 0;
    int visual_tokens_in = 0;
};

struct Trace {
    std::string question;
    std::vector<int> initial_frames;
    int initial_visual_tokens = 0;
    std::vector<TraceRound> rounds;
    std::string final_answer;
    std::string terminated_by;  // answer | max_rounds | budget_exhausted | parse_failure

    int tool_call_count() const;
};

struct EpisodeConfig {
    int max_rounds = 8;
    long context_budget = 32768;  // tokens, text + visual combined
    bool single_turn = false;
    nlohmann::json decoding = {{"temperature", 0.0}, {"top_k", 1}, {"top_p", 0.001}};
};

// ── Model client ───────────────────────────────────────────────────────

struct ChatItem {
    std::string role;  // "system" | "user" | "assistant" | "tool"
    std::string text;
    int visual_tokens = 0;
};

struct ChatContext {
    std::vector<ChatItem> items;
    nlohmann::json decoding;
};

class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual std::string complete(const ChatContext& context) = 0;
};

/// Replays a fixed list of responses in order; used by tests and offline runs.
class ScriptedModelClient : public ModelClient {
public:
    explicit ScriptedModelClient(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}
    std::string complete(const ChatContext& context) override;

private:
    std::vector<std::string> responses_;
    size_t next_ = 0;
};

/// POST /chat with {"messages": [...], "decoding": {...}} -> {"text": ...}.
class HttpModelClient : public ModelClient {
public:
    explicit HttpModelClient(std::string base_url, int timeout_seconds = 120)
        : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {}
    std::string complete(const ChatContext& context) override;

private:
    std::string base_url_;
    int timeout_seconds_;
};

// ── Episode machinery ──────────────────────────────────────────────────

/// Extracts the first fenced block of the form
///   ```tool
///   {"tool": <name>, "arguments": {...}}
///   ```
/// No block means the text is a final answer. A block that is not valid JSON,
/// lacks the two fields, or (when a registry is given) names an unknown tool
/// throws MalformedCall.
std::optional<ToolCall> parse_tool_call(const std::string& model_text,
                                        const ToolRegistry* registry = nullptr);

/// Which rounds of a trace survive context eviction.
struct ContextView {
    int first_round = 0;  // rounds [first_round, size) are kept
    bool stub = false;    // an "[earlier rounds omitted]" line stands in for the rest
    long token_estimate = 0;
};

/// Drops whole earliest rounds until the estimate fits the budget. The
/// question, initial frames, and the most recent round always survive;
/// if even those exceed the budget, throws BudgetTooSmall.
ContextView evict_to_budget(const Trace& trace, long budget);

/// Multi-turn loop: query the model, dispatch parsed tool calls, record
/// rounds, stop on a plain-text answer. Tool failures become textual
/// observations in the round and the episode continues.
Trace run_episode(ModelClient& model, const ToolRegistry& registry,
                  const std::string& question, const std::vector<int>& initial_frames,
                  int initial_visual_tokens, const EpisodeConfig& cfg);

// ── Aggregates ─────────────────────────────────────────────────────────

struct TraceStats {
    double mean_tool_calls = 0.0;
    std::map<std::string, double> tool_usage_pct;  // share of all calls, in percent
    double mean_input_text_tokens = 0.0;
    double mean_input_visual_tokens = 0.0;
    double mean_output_text_tokens = 0.0;
    int trace_count = 0;
};

TraceStats trace_stats(const std::vector<Trace>& traces);

// ── Serialization (stable field order) ─────────────────────────────────

nlohmann::ordered_json trace_to_json(const Trace& trace);
Trace trace_from_json(const nlohmann::json& doc);
void write_trace(const Trace& trace, const std::string& path);
Trace read_trace(const std::string& path);

}  // namespace last
