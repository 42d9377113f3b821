// SPDX-License-Identifier: Apache-2.0
#include "last/orchestrator.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>

namespace last {

namespace {

constexpr const char* kEvictionStub = "[earlier rounds omitted]";

long round_cost(const TraceRound& round) {
    long cost = estimate_text_tokens(round.model_text);
    if (round.tool_result) {
        cost += estimate_text_tokens(round.tool_result->payload.dump());
        cost += round.tool_result->token_cost;
    }
    return cost;
}

long base_cost(const Trace& trace) {
    return estimate_text_tokens(trace.question) + trace.initial_visual_tokens;
}

std::string system_prompt(const ToolRegistry& registry) {
    std::ostringstream out;
    out << "Answer the question about the given frames. To call a tool, emit a fenced "
           "block: ```tool\\n{\"tool\": <name>, \"arguments\": {...}}\\n```.";
    const auto names = registry.names();
    if (!names.empty()) {
        out << " Available tools:";
        for (size_t i = 0; i < names.size(); ++i) out << (i ? ", " : " ") << names[i];
        out << ".";
    } else {
        out << " No tools are available; think step by step in text.";
    }
    return out.str();
}

}  // namespace

int estimate_text_tokens(const std::string& text) {
    return static_cast<int>((text.size() + 3) / 4);
}

int Trace::tool_call_count() const {
    int n = 0;
    for (const auto& r : rounds) n += r.tool_call.has_value() ? 1 : 0;
    return n;
}

std::string ScriptedModelClient::complete(const ChatContext&) {
    if (next_ >= responses_.size()) {
        throw IOFailureError("scripted model exhausted after " +
                             std::to_string(responses_.size()) + " responses");
    }
    return responses_[next_++];
}

std::string HttpModelClient::complete(const ChatContext& context) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& item : context.items) {
        messages.push_back({{"role", item.role},
                            {"content", item.text},
                            {"visual_tokens", item.visual_tokens}});
    }
    const nlohmann::json body = {{"messages", messages}, {"decoding", context.decoding}};

    httplib::Client client(base_url_);
    client.set_connection_timeout(timeout_seconds_);
    client.set_read_timeout(timeout_seconds_);
    auto r = client.Post("/chat", body.dump(), "application/json");
    if (!r) r = client.Post("/chat", body.dump(), "application/json");
    if (!r || r->status != 200) throw IOFailureError("model endpoint failed: /chat");
    return nlohmann::json::parse(r->body).at("text").get<std::string>();
}

std::optional<ToolCall> parse_tool_call(const std::string& model_text,
                                        const ToolRegistry* registry) {
    const std::string open = "```tool";
    const size_t start = model_text.find(open);
    if (start == std::string::npos) return std::nullopt;

    const size_t body_start = model_text.find('\n', start);
    if (body_start == std::string::npos) throw MalformedCallError("unterminated tool block");
    const size_t end = model_text.find("```", body_start);
    if (end == std::string::npos) throw MalformedCallError("unterminated tool block");

    const std::string body = model_text.substr(body_start + 1, end - body_start - 1);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedCallError(std::string("tool block is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("tool") || !doc["tool"].is_string() ||
        !doc.contains("arguments") || !doc["arguments"].is_object()) {
        throw MalformedCallError("tool block must carry \"tool\" and \"arguments\"");
    }
    ToolCall call;
    call.tool = doc["tool"].get<std::string>();
    call.arguments = doc["arguments"];
    if (registry && !registry->has(call.tool)) {
        throw MalformedCallError("unknown tool: " + call.tool);
    }
    return call;
}

ContextView evict_to_budget(const Trace& trace, long budget) {
    const int n = static_cast<int>(trace.rounds.size());
    std::vector<long> costs(n);
    long total = base_cost(trace);
    for (int i = 0; i < n; ++i) {
        costs[i] = round_cost(trace.rounds[i]);
        total += costs[i];
    }

    ContextView view;
    view.token_estimate = total;
    while (view.token_estimate > budget && view.first_round < n - 1) {
        view.token_estimate -= costs[view.first_round];
        if (!view.stub) {
            view.stub = true;
            view.token_estimate += estimate_text_tokens(kEvictionStub);
        }
        ++view.first_round;
    }
    if (view.token_estimate > budget) {
        throw BudgetTooSmallError("context budget below question + latest round");
    }
    return view;
}

namespace {

ChatContext assemble_context(const Trace& trace, const ContextView& view,
                             const ToolRegistry& registry, const EpisodeConfig& cfg,
                             bool suppression_notice) {
    ChatContext ctx;
    ctx.decoding = cfg.decoding;
    ctx.items.push_back({"system", system_prompt(registry), 0});
    ctx.items.push_back({"user", trace.question, trace.initial_visual_tokens});
    if (view.stub) ctx.items.push_back({"system", kEvictionStub, 0});
    for (size_t i = view.first_round; i < trace.rounds.size(); ++i) {
        const auto& r = trace.rounds[i];
        ctx.items.push_back({"assistant", r.model_text, 0});
        if (r.tool_result) {
            ctx.items.push_back(
                {"tool", r.tool_result->payload.dump(), r.tool_result->token_cost});
        }
    }
    if (suppression_notice) {
        ctx.items.push_back(
            {"system", "Tool limit reached for this episode; answer directly.", 0});
    }
    return ctx;
}

void account_round(TraceRound& round, const ChatContext& ctx) {
    for (const auto& item : ctx.items) {
        round.text_tokens_in += estimate_text_tokens(item.text);
        round.visual_tokens_in += item.visual_tokens;
    }
    round.text_tokens_out = estimate_text_tokens(round.model_text);
}

}  // namespace

Trace run_episode(ModelClient& model, const ToolRegistry& registry,
                  const std::string& question, const std::vector<int>& initial_frames,
                  int initial_visual_tokens, const EpisodeConfig& cfg) {
    if (initial_frames.empty()) throw EmptyInputError("episode needs initial frames");

    Trace trace;
    trace.question = question;
    trace.initial_frames = initial_frames;
    trace.initial_visual_tokens = initial_visual_tokens;
    trace.terminated_by = "max_rounds";

    bool suppression_notice = false;
    int tool_calls = 0;

    while (static_cast<int>(trace.rounds.size()) < cfg.max_rounds) {
        ContextView view;
        try {
            view = evict_to_budget(trace, cfg.context_budget);
        } catch (const BudgetTooSmallError&) {
            trace.terminated_by = "budget_exhausted";
            return trace;
        }
        const ChatContext ctx =
            assemble_context(trace, view, registry, cfg, suppression_notice);
        suppression_notice = false;

        TraceRound round;
        round.model_text = model.complete(ctx);
        account_round(round, ctx);

        std::optional<ToolCall> call;
        try {
            call = parse_tool_call(round.model_text, &registry);
        } catch (const MalformedCallError&) {
            trace.rounds.push_back(std::move(round));
            trace.terminated_by = "parse_failure";
            return trace;
        }

        if (!call) {
            trace.final_answer = round.model_text;
            trace.rounds.push_back(std::move(round));
            trace.terminated_by = "answer";
            return trace;
        }

        if (cfg.single_turn && tool_calls >= 1) {
            // extra calls are suppressed; the model is re-queried for an answer
            trace.rounds.push_back(std::move(round));
            suppression_notice = true;
            continue;
        }

        call->round = static_cast<int>(trace.rounds.size());
        round.tool_call = call;
        try {
            round.tool_result = registry.dispatch(*call);
        } catch (const std::exception& e) {
            // tool failures become observations; the episode continues
            ToolResult err;
            err.kind = registry.spec(call->tool).result_kind;
            err.payload = {{"error", e.what()}};
            err.token_cost = 0;
            round.tool_result = err;
        }
        ++tool_calls;
        trace.rounds.push_back(std::move(round));
    }
    return trace;
}

TraceStats trace_stats(const std::vector<Trace>& traces) {
    if (traces.empty()) throw EmptyInputError("trace_stats needs at least one trace");

    TraceStats stats;
    stats.trace_count = static_cast<int>(traces.size());
    long total_calls = 0;
    std::map<std::string, long> per_tool;
    double in_text = 0, in_vis = 0, out_text = 0;
    for (const auto& t : traces) {
        for (const auto& r : t.rounds) {
            if (r.tool_call) {
                ++total_calls;
                ++per_tool[r.tool_call->tool];
            }
            in_text += r.text_tokens_in;
            in_vis += r.visual_tokens_in;
            out_text += r.text_tokens_out;
        }
    }
    stats.mean_tool_calls = static_cast<double>(total_calls) / traces.size();
    for (const auto& [name, count] : per_tool) {
        stats.tool_usage_pct[name] = 100.0 * static_cast<double>(count) / total_calls;
    }
    stats.mean_input_text_tokens = in_text / traces.size();
    stats.mean_input_visual_tokens = in_vis / traces.size();
    stats.mean_output_text_tokens = out_text / traces.size();
    return stats;
}

nlohmann::ordered_json trace_to_json(const Trace& trace) {
    nlohmann::ordered_json doc;
    doc["question"] = trace.question;
    doc["initial_frames"] = trace.initial_frames;
    doc["initial_visual_tokens"] = trace.initial_visual_tokens;
    doc["rounds"] = nlohmann::ordered_json::array();
    for (const auto& r : trace.rounds) {
        nlohmann::ordered_json rd;
        rd["model_text"] = r.model_text;
        if (r.tool_call) {
            rd["tool_call"] = {{"tool", r.tool_call->tool},
                               {"arguments", r.tool_call->arguments},
                               {"round", r.tool_call->round}};
        } else {
            rd["tool_call"] = nullptr;
        }
        if (r.tool_result) {
            rd["tool_result"] = {{"kind", to_string(r.tool_result->kind)},
                                 {"payload", r.tool_result->payload},
                                 {"token_cost", r.tool_result->token_cost},
                                 {"provenance", r.tool_result->provenance}};
        } else {
            rd["tool_result"] = nullptr;
        }
        rd["text_tokens_in"] = r.text_tokens_in;
        rd["text_tokens_out"] = r.text_tokens_out;
        rd["visual_tokens_in"] = r.visual_tokens_in;
        doc["rounds"].push_back(std::move(rd));
    }
    doc["final_answer"] = trace.final_answer;
    doc["terminated_by"] = trace.terminated_by;
    return doc;
}

Trace trace_from_json(const nlohmann::json& doc) {
    Trace trace;
    trace.question = doc.at("question").get<std::string>();
    trace.initial_frames = doc.at("initial_frames").get<std::vector<int>>();
    trace.initial_visual_tokens = doc.at("initial_visual_tokens").get<int>();
    for (const auto& rd : doc.at("rounds")) {
        TraceRound r;
        r.model_text = rd.at("model_text").get<std::string>();
        if (!rd.at("tool_call").is_null()) {
            const auto& tc = rd.at("tool_call");
            ToolCall call;
            call.tool = tc.at("tool").get<std::string>();
            call.arguments = tc.at("arguments");
            call.round = tc.at("round").get<int>();
            r.tool_call = std::move(call);
        }
        if (!rd.at("tool_result").is_null()) {
            const auto& tr = rd.at("tool_result");
            ToolResult result;
            result.kind = result_kind_from_string(tr.at("kind").get<std::string>());
            result.payload = tr.at("payload");
            result.token_cost = tr.at("token_cost").get<int>();
            result.provenance = tr.at("provenance").get<std::string>();
            r.tool_result = std::move(result);
        }
        r.text_tokens_in = rd.at("text_tokens_in").get<int>();
        r.text_tokens_out = rd.at("text_tokens_out").get<int>();
        r.visual_tokens_in = rd.at("visual_tokens_in").get<int>();
        trace.rounds.push_back(std::move(r));
    }
    trace.final_answer = doc.at("final_answer").get<std::string>();
    trace.terminated_by = doc.at("terminated_by").get<std::string>();
    return trace;
}

void write_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IOFailureError("cannot write trace: " + path);
    out << trace_to_json(trace).dump(2) << "\n";
}

Trace read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOFailureError("cannot read trace: " + path);
    nlohmann::json doc;
    in >> doc;
    return trace_from_json(doc);
}

}  // namespace last
