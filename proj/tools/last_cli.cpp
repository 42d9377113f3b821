// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: frame selection runs, episode execution, corpus
// curation, and metric reports. Exit codes: 0 success, 2 input format,
// 3 budget, 4 alignment, 1 otherwise.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "last/curation.hpp"
#include "last/embedding_io.hpp"
#include "last/metrics.hpp"
#include "last/orchestrator.hpp"
#include "last/selection.hpp"
#include "last/tooling.hpp"

namespace {

constexpr int kExitInputFormat = 2;
constexpr int kExitBudget = 3;
constexpr int kExitAlignment = 4;

struct Config {
    last::SelectionConfig selection;
    last::EpisodeConfig episode;
    std::string model_url;
    std::string tools_url;
    std::string embed_url;
};

// precedence: flag > env > file
std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

Config load_config(const std::string& path) {
    Config cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw last::IOFailureError("cannot open config: " + path);
        nlohmann::json doc;
        in >> doc;
        if (doc.contains("selection")) {
            const auto& s = doc["selection"];
            cfg.selection.k = s.value("k", cfg.selection.k);
            cfg.selection.pool_multiplier =
                s.value("pool_multiplier", cfg.selection.pool_multiplier);
            cfg.selection.epsilon = s.value("epsilon", cfg.selection.epsilon);
        }
        if (doc.contains("episode")) {
            const auto& e = doc["episode"];
            cfg.episode.max_rounds = e.value("max_rounds", cfg.episode.max_rounds);
            cfg.episode.context_budget =
                e.value("context_budget", cfg.episode.context_budget);
            cfg.episode.single_turn = e.value("single_turn", cfg.episode.single_turn);
            if (e.contains("decoding")) cfg.episode.decoding = e["decoding"];
        }
        if (doc.contains("endpoints")) {
            const auto& ep = doc["endpoints"];
            cfg.model_url = ep.value("model", "");
            cfg.tools_url = ep.value("tools", "");
            cfg.embed_url = ep.value("embeddings", "");
        }
    }
    cfg.model_url = env_or("LAST_MODEL_URL", cfg.model_url);
    cfg.tools_url = env_or("LAST_TOOLS_URL", cfg.tools_url);
    cfg.embed_url = env_or("LAST_EMBED_URL", cfg.embed_url);
    if (cfg.selection.k < 1) throw last::IOFailureError("config: K must be >= 1");
    return cfg;
}

std::string format_sig(double x, int digits = 6) {
    std::ostringstream out;
    out << std::setprecision(digits) << x;
    return out.str();
}

last::ScenarioContext scenario_from_files(const std::string& manifest_path,
                                          const std::string& embeddings_path,
                                          const std::string& query_path,
                                          const last::SelectionConfig& selection) {
    last::ScenarioContext ctx;
    ctx.manifest = last::load_manifest(manifest_path);
    ctx.frame_embeddings = last::read_embeddings(embeddings_path);
    const auto q = last::read_embeddings(query_path);
    if (q.size() != 1) throw last::IOFailureError("query embedding file must hold one row");
    ctx.query_embedding = q.front();
    ctx.selection = selection;
    return ctx;
}

int initial_tokens(const last::VideoManifest& m, const std::vector<int>& indices) {
    int total = 0;
    for (int idx : indices) {
        for (const auto& f : m.frames) {
            if (f.index == idx) {
                const last::Dims d = last::resize_plan(f.width, f.height);
                total += last::estimate_visual_tokens(d.width, d.height);
                break;
            }
        }
    }
    return total;
}

int cmd_select(const std::string& embeddings_path, const std::string& query_path, int k,
               int pool_multiplier, double epsilon, const std::string& pad,
               const std::string& out_path) {
    const auto frames = last::read_embeddings(embeddings_path);
    const auto query_rows = last::read_embeddings(query_path);
    if (query_rows.size() != 1) {
        throw last::IOFailureError("query embedding file must hold one row");
    }
    last::SelectionConfig cfg;
    cfg.k = k;
    cfg.pool_multiplier = pool_multiplier;
    cfg.epsilon = epsilon;
    last::SelectionResult res = last::select_frames(query_rows.front(), frames, cfg);

    std::vector<int> presented = res.presented_indices;
    if (pad == "uniform" && static_cast<int>(presented.size()) < cfg.k) {
        presented = last::pad_uniform(presented, static_cast<int>(frames.size()), cfg.k);
        std::sort(presented.begin(), presented.end());
    }

    nlohmann::ordered_json report;
    report["indices"] = presented;
    report["selection_order"] = res.indices;
    nlohmann::ordered_json gains = nlohmann::ordered_json::array();
    for (double g : res.gains) gains.push_back(format_sig(g));
    report["gains"] = std::move(gains);
    report["log_det"] = format_sig(res.log_det);
    report["epsilon_stopped"] = static_cast<int>(res.indices.size()) < cfg.k &&
                                cfg.k <= static_cast<int>(frames.size());

    const std::string text = report.dump(2);
    std::cout << text << "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << text << "\n";
    }
    return 0;
}

int cmd_episode(const Config& cfg, const std::string& question,
                const std::string& manifest_path, const std::string& embeddings_path,
                const std::string& query_path, const std::string& fixtures_path,
                bool live, bool single_turn, const std::string& out_path) {
    last::EpisodeConfig ecfg = cfg.episode;
    ecfg.single_turn = single_turn || ecfg.single_turn;

    const last::ScenarioContext ctx =
        scenario_from_files(manifest_path, embeddings_path, query_path, cfg.selection);

    last::ToolRegistry registry;
    std::unique_ptr<last::ModelClient> model;
    last::MockFixture fixture = last::MockFixture::parse(nlohmann::json::object());
    if (live) {
        if (cfg.model_url.empty() || cfg.tools_url.empty()) {
            throw last::IOFailureError("--live needs LAST_MODEL_URL and LAST_TOOLS_URL");
        }
        for (const auto& spec : last::standard_tool_specs()) {
            registry.register_tool(spec, last::make_remote_backend(cfg.tools_url, spec));
        }
        model = std::make_unique<last::HttpModelClient>(cfg.model_url);
    } else {
        fixture = last::MockFixture::load(fixtures_path);
        registry = last::make_mock_registry(fixture, ctx);
        std::vector<std::string> script;
        for (const auto& line : fixture.raw().at("model")) {
            script.push_back(line.get<std::string>());
        }
        model = std::make_unique<last::ScriptedModelClient>(std::move(script));
    }

    std::vector<int> initial;
    for (const auto& f : ctx.manifest.frames) initial.push_back(f.index);
    const last::Trace trace = last::run_episode(*model, registry, question, initial,
                                                initial_tokens(ctx.manifest, initial), ecfg);
    if (trace.terminated_by == "budget_exhausted") {
        std::cerr << "error: context budget below the irreducible episode floor\n";
        return kExitBudget;
    }
    last::write_trace(trace, out_path);
    std::cout << "rounds=" << trace.rounds.size()
              << " tool_calls=" << trace.tool_call_count()
              << " terminated_by=" << trace.terminated_by << "\n";
    return 0;
}

int cmd_curate(const Config& cfg, const std::string& corpus_path,
               const std::string& fixtures_path, const std::string& manifest_path,
               const std::string& embeddings_path, const std::string& query_path,
               const std::string& out_path, const std::string& stats_path) {
    const auto samples = last::read_source_corpus(corpus_path);
    if (samples.empty()) throw last::IOFailureError("corpus is empty");

    const last::ScenarioContext ctx =
        scenario_from_files(manifest_path, embeddings_path, query_path, cfg.selection);
    const last::MockFixture fixture = last::MockFixture::load(fixtures_path);
    const last::ToolRegistry registry = last::make_mock_registry(fixture, ctx);

    // model scripts live in the fixture under "curation": id -> {stage1: [...], stage2: [...]}
    const auto& scripts = fixture.raw().at("curation");
    last::ModelClientFactory factory =
        [&scripts](const last::SourceSample& s, int stage) -> std::unique_ptr<last::ModelClient> {
        const std::string key = stage == 1 ? "stage1" : "stage2";
        std::vector<std::string> lines;
        if (scripts.contains(s.id) && scripts.at(s.id).contains(key)) {
            for (const auto& line : scripts.at(s.id).at(key)) {
                lines.push_back(line.get<std::string>());
            }
        }
        return std::make_unique<last::ScriptedModelClient>(std::move(lines));
    };

    std::vector<int> initial;
    for (const auto& f : ctx.manifest.frames) initial.push_back(f.index);
    const last::CurationResult result =
        last::curate_corpus(factory, registry, samples, cfg.episode, initial,
                            initial_tokens(ctx.manifest, initial));

    last::export_training_records(result.dataset, out_path);

    nlohmann::ordered_json stats;
    stats["text_cot"] = result.stats.text_cot;
    stats["visual_trajectory"] = result.stats.visual_trajectory;
    stats["discarded"] = result.stats.discarded;
    stats["mean_tool_calls_visual"] =
        result.stats.mean_tool_calls_defined
            ? nlohmann::ordered_json(format_sig(result.stats.mean_tool_calls_visual))
            : nlohmann::ordered_json("undefined");
    nlohmann::ordered_json per_source;
    for (const auto& [tag, n] : result.stats.per_source) per_source[tag] = n;
    stats["per_source"] = std::move(per_source);

    const std::string text = stats.dump(2);
    std::cout << text << "\n";
    if (!stats_path.empty()) {
        std::ofstream out(stats_path);
        out << text << "\n";
    }
    return 0;
}

int cmd_eval(const std::string& records_path, const std::string& traces_path,
             const std::string& out_path) {
    const auto records = last::read_eval_records(records_path);
    std::vector<last::Trace> traces;
    if (!traces_path.empty()) {
        std::ifstream in(traces_path);
        if (!in) throw last::IOFailureError("cannot open traces: " + traces_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            traces.push_back(last::trace_from_json(nlohmann::json::parse(line)));
        }
    }
    const auto doc = last::report(traces, records);
    const std::string text = doc.dump(2);
    std::cout << text << "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << text << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"query-aware frame selection and visual thinking toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");

    // select
    auto* select = app.add_subcommand("select", "query-aware diverse frame selection");
    std::string embeddings_path, query_path, pad, select_out;
    int k = 8, pool_multiplier = 4;
    double epsilon = 1e-5;
    select->add_option("--embeddings", embeddings_path, "frame embedding matrix file")
        ->required();
    select->add_option("--query-embedding", query_path, "query embedding file")->required();
    select->add_option("--k", k, "number of frames to select");
    select->add_option("--pool-multiplier", pool_multiplier, "relevance pool factor");
    select->add_option("--epsilon", epsilon, "pivot stopping threshold");
    select->add_option("--pad", pad, "top-up rule for short selections (uniform)");
    select->add_option("--out", select_out, "write the report here as well");

    // episode
    auto* episode = app.add_subcommand("episode", "run one multi-turn episode");
    std::string question, manifest_path, fixtures_path, trace_out = "trace.json";
    std::string ep_embeddings, ep_query;
    bool live = false, single_turn = false;
    episode->add_option("--question", question, "question text")->required();
    episode->add_option("--manifest", manifest_path, "frame manifest")->required();
    episode->add_option("--embeddings", ep_embeddings, "frame embedding matrix")->required();
    episode->add_option("--query-embedding", ep_query, "query embedding file")->required();
    episode->add_option("--fixtures", fixtures_path, "scenario fixture (offline mode)");
    episode->add_flag("--live", live, "use remote model/tool endpoints");
    episode->add_flag("--single-turn", single_turn, "allow at most one tool call");
    episode->add_option("--out", trace_out, "trace output path");

    // curate
    auto* curate = app.add_subcommand("curate", "two-stage corpus curation");
    std::string corpus_path, cur_fixtures, cur_manifest, cur_embeddings, cur_query;
    std::string dataset_out = "dataset.ndjson", stats_out;
    curate->add_option("--corpus", corpus_path, "source corpus ndjson")->required();
    curate->add_option("--fixtures", cur_fixtures, "scenario fixture")->required();
    curate->add_option("--manifest", cur_manifest, "frame manifest")->required();
    curate->add_option("--embeddings", cur_embeddings, "frame embedding matrix")->required();
    curate->add_option("--query-embedding", cur_query, "query embedding file")->required();
    curate->add_option("--out", dataset_out, "dataset output path");
    curate->add_option("--stats", stats_out, "stats output path");

    // eval
    auto* eval = app.add_subcommand("eval", "score predictions and report");
    std::string records_path, traces_path, report_out;
    eval->add_option("--records", records_path, "eval records ndjson")->required();
    eval->add_option("--traces", traces_path, "trace ndjson (one per line)");
    eval->add_option("--out", report_out, "report output path");

    CLI11_PARSE(app, argc, argv);

    try {
        const Config cfg = load_config(config_path);
        if (select->parsed()) {
            return cmd_select(embeddings_path, query_path, k, pool_multiplier, epsilon, pad,
                              select_out);
        }
        if (episode->parsed()) {
            if (!live && fixtures_path.empty()) {
                std::cerr << "error: offline mode needs --fixtures\n";
                return kExitInputFormat;
            }
            return cmd_episode(cfg, question, manifest_path, ep_embeddings, ep_query,
                               fixtures_path, live, single_turn, trace_out);
        }
        if (curate->parsed()) {
            return cmd_curate(cfg, corpus_path, cur_fixtures, cur_manifest, cur_embeddings,
                              cur_query, dataset_out, stats_out);
        }
        if (eval->parsed()) {
            return cmd_eval(records_path, traces_path, report_out);
        }
    } catch (const last::IdMismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAlignment;
    } catch (const last::BudgetTooSmallError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const last::IOFailureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputFormat;
    } catch (const last::EmptyManifestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
