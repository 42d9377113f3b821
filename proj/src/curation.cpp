// SPDX-License-Identifier: Apache-2.0
#include "last/curation.hpp"

#include <fstream>
#include <sstream>

namespace last {

std::string to_string(SampleKind kind) {
    return kind == SampleKind::text_cot ? "text_cot" : "visual_trajectory";
}

SampleKind sample_kind_from_string(const std::string& s) {
    if (s == "text_cot") return SampleKind::text_cot;
    if (s == "visual_trajectory") return SampleKind::visual_trajectory;
    throw IOFailureError("unknown sample kind: " + s);
}

Judge make_judge(TaskKind kind) {
    switch (kind) {
        case TaskKind::open:
            return [](const std::string& pred, const std::string& key) {
                return em1(pred, key) == 1;
            };
        case TaskKind::multiple_choice:
            return [](const std::string& pred, const std::string& key) {
                const std::string letter = extract_option_letter(pred);
                return !letter.empty() && letter == key;
            };
        case TaskKind::numerical:
            return [](const std::string& pred, const std::string& key) {
                try {
                    const double gt = std::stod(key);
                    const double p = std::stod(pred);
                    return mra(p, gt) == 1.0;
                } catch (const std::exception&) {
                    return false;
                }
            };
    }
    return {};
}

CurationOutcome curate_sample(const ModelClientFactory& make_client,
                              const ToolRegistry& registry, const SourceSample& s,
                              const Judge& judge, const EpisodeConfig& cfg,
                              const std::vector<int>& initial_frames,
                              int initial_visual_tokens) {
    try {
        const ToolRegistry empty;
        auto stage1_client = make_client(s, 1);
        const Trace stage1 = run_episode(*stage1_client, empty, s.question, initial_frames,
                                         initial_visual_tokens, cfg);
        if (stage1.terminated_by == "answer" && judge(stage1.final_answer, s.answer_key)) {
            TrainingSample out{s.id, SampleKind::text_cot, s.source_tag, stage1};
            if (out.trace.tool_call_count() != 0) {
                return {std::nullopt, "stage-1 trace unexpectedly used tools"};
            }
            return {std::move(out), ""};
        }

        // stage 2 reuses the question verbatim; nothing from stage 1 leaks in
        auto stage2_client = make_client(s, 2);
        const Trace stage2 = run_episode(*stage2_client, registry, s.question,
                                         initial_frames, initial_visual_tokens, cfg);
        if (stage2.terminated_by == "answer" && judge(stage2.final_answer, s.answer_key)) {
            if (stage2.tool_call_count() == 0) {
                return {std::nullopt, "stage-2 answer used no tools"};
            }
            TrainingSample out{s.id, SampleKind::visual_trajectory, s.source_tag, stage2};
            return {std::move(out), ""};
        }
        return {std::nullopt, "wrong answer in both stages"};
    } catch (const std::exception& e) {
        return {std::nullopt, std::string("episode error: ") + e.what()};
    }
}

CurationResult curate_corpus(const ModelClientFactory& make_client,
                             const ToolRegistry& registry,
                             const std::vector<SourceSample>& samples,
                             const EpisodeConfig& cfg,
                             const std::vector<int>& initial_frames,
                             int initial_visual_tokens) {
    if (samples.empty()) throw EmptyInputError("curate_corpus needs samples");

    CurationResult result;
    int discarded = 0;
    for (const auto& s : samples) {
        const Judge judge = make_judge(s.kind);
        CurationOutcome outcome = curate_sample(make_client, registry, s, judge, cfg,
                                                initial_frames, initial_visual_tokens);
        if (outcome.sample) {
            result.dataset.push_back(std::move(*outcome.sample));
        } else {
            ++discarded;
        }
    }
    result.stats = stats_from_dataset(result.dataset, discarded);
    return result;
}

CorpusStats stats_from_dataset(const std::vector<TrainingSample>& dataset, int discarded) {
    CorpusStats stats;
    stats.discarded = discarded;
    long visual_calls = 0;
    for (const auto& s : dataset) {
        ++stats.per_source[s.source_tag];
        if (s.kind == SampleKind::text_cot) {
            ++stats.text_cot;
        } else {
            ++stats.visual_trajectory;
            visual_calls += s.trace.tool_call_count();
        }
    }
    if (stats.visual_trajectory > 0) {
        stats.mean_tool_calls_defined = true;
        stats.mean_tool_calls_visual =
            static_cast<double>(visual_calls) / stats.visual_trajectory;
    }
    return stats;
}

void export_training_records(const std::vector<TrainingSample>& dataset,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IOFailureError("cannot write dataset: " + path);
    nlohmann::ordered_json header;
    header["record"] = "header";
    header["format"] = "last-training-v1";
    header["count"] = static_cast<int>(dataset.size());
    out << header.dump() << "\n";
    for (const auto& s : dataset) {
        nlohmann::ordered_json doc;
        doc["record"] = "sample";
        doc["id"] = s.id;
        doc["kind"] = to_string(s.kind);
        doc["source"] = s.source_tag;
        doc["trace"] = trace_to_json(s.trace);
        out << doc.dump() << "\n";
    }
    if (!out) throw IOFailureError("write failed: " + path);
}

std::vector<TrainingSample> import_training_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOFailureError("cannot read dataset: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IOFailureError("dataset missing header: " + path);
    const auto header = nlohmann::json::parse(line);
    if (header.value("record", "") != "header") {
        throw IOFailureError("dataset missing header record: " + path);
    }

    std::vector<TrainingSample> dataset;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto doc = nlohmann::json::parse(line);
        TrainingSample s;
        s.id = doc.at("id").get<std::string>();
        s.kind = sample_kind_from_string(doc.at("kind").get<std::string>());
        s.source_tag = doc.at("source").get<std::string>();
        s.trace = trace_from_json(doc.at("trace"));
        dataset.push_back(std::move(s));
    }
    if (static_cast<int>(dataset.size()) != header.at("count").get<int>()) {
        throw IOFailureError("dataset record count does not match header");
    }
    return dataset;
}

std::vector<SourceSample> read_source_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOFailureError("cannot open corpus: " + path);
    std::vector<SourceSample> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto doc = nlohmann::json::parse(line);
        SourceSample s;
        s.id = doc.at("id").get<std::string>();
        s.question = doc.at("question").get<std::string>();
        s.answer_key = doc.at("answer").get<std::string>();
        s.manifest_path = doc.value("manifest", "");
        s.source_tag = doc.value("source", "unknown");
        s.kind = task_kind_from_string(doc.value("kind", "open"));
        if (s.answer_key.empty()) throw IOFailureError("answer key empty for " + s.id);
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace last
