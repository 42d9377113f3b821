// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "last/metrics.hpp"
#include "last/orchestrator.hpp"

namespace last {

struct SourceSample {
    std::string id;
    std::string question;
    std::string answer_key;
    std::string manifest_path;
    std::string source_tag;  // video | scene3d | image dataset label
    TaskKind kind = TaskKind::open;
};

enum class SampleKind { text_cot, visual_trajectory };

std::string to_string(SampleKind kind);
SampleKind sample_kind_from_string(const std::string& s);

struct TrainingSample {
    std::string id;
    SampleKind kind = SampleKind::text_cot;
    std::string source_tag;
    Trace trace;
};

/// Answer-correctness check; pluggable per task kind.
using Judge = std::function<bool(const std::string& prediction, const std::string& key)>;

/// em1 for open answers, option-letter match for multiple choice, mra == 1
/// for numerical keys.
Judge make_judge(TaskKind kind);

/// Fresh model client per (sample, stage); stage is 1 or 2.
using ModelClientFactory =
    std::function<std::unique_ptr<ModelClient>(const SourceSample& sample, int stage)>;

struct CurationOutcome {
    std::optional<TrainingSample> sample;  // empty means Discard
    std::string discard_reason;
};

/// Stage 1: text-only episode (empty registry); keep the trace when the
/// judge accepts the answer. Stage 2: rerun with the full registry. Both
/// wrong, or any stage error, means Discard.
CurationOutcome curate_sample(const ModelClientFactory& make_client,
                              const ToolRegistry& registry, const SourceSample& s,
                              const Judge& judge, const EpisodeConfig& cfg,
                              const std::vector<int>& initial_frames,
                              int initial_visual_tokens);

struct CorpusStats {
    int text_cot = 0;
    int visual_trajectory = 0;
    int discarded = 0;
    double mean_tool_calls_visual = 0.0;  // 0 with the flag below when no visual samples
    bool mean_tool_calls_defined = false;
    std::map<std::string, int> per_source;
};

struct CurationResult {
    std::vector<TrainingSample> dataset;
    CorpusStats stats;
};

CurationResult curate_corpus(const ModelClientFactory& make_client,
                             const ToolRegistry& registry,
                             const std::vector<SourceSample>& samples,
                             const EpisodeConfig& cfg,
                             const std::vector<int>& initial_frames,
                             int initial_visual_tokens);

/// Newline-delimited export: a header record, then one record per sample
/// embedding the full trace. Round-trips losslessly.
void export_training_records(const std::vector<TrainingSample>& dataset,
                             const std::string& path);
std::vector<TrainingSample> import_training_records(const std::string& path);

/// Source corpus file: ndjson {id, question, answer, manifest, source, kind}.
std::vector<SourceSample> read_source_corpus(const std::string& path);

CorpusStats stats_from_dataset(const std::vector<TrainingSample>& dataset, int discarded);

}  // namespace last
