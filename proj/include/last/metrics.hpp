// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "last/orchestrator.hpp"

namespace last {

enum class TaskKind { open, multiple_choice, numerical };

TaskKind task_kind_from_string(const std::string& s);
std::string to_string(TaskKind kind);

struct EvalRecord {
    std::string id;
    std::string prediction;
    std::string ground_truth;
    TaskKind kind = TaskKind::open;
};

/// Lowercase, trim, collapse whitespace, strip terminal punctuation, drop a
/// leading article (a/an/the).
std::string normalize_answer(const std::string& text);

/// Exact match after normalization.
int em1(const std::string& pred, const std::string& gt);

/// em1, or token-boundary containment in either direction.
int em_r1(const std::string& pred, const std::string& gt);

/// First standalone capital letter A-E in the prediction; empty when absent.
std::string extract_option_letter(const std::string& prediction);

/// Fraction of multiple-choice records whose extracted letter matches.
double mca_accuracy(const std::vector<EvalRecord>& records);

/// Mean over thresholds of indicator(|pred - gt| / |gt| < 1 - theta).
/// Default thresholds are 0.50, 0.55, ..., 0.95.
double mra(double pred, double gt);
double mra(double pred, double gt, const std::vector<double>& thresholds);

/// Combined per-metric report plus tool-usage and token columns.
nlohmann::ordered_json report(const std::vector<Trace>& traces,
                              const std::vector<EvalRecord>& records);

/// Newline-delimited eval records: {"id", "prediction", "ground_truth", "kind"}.
std::vector<EvalRecord> read_eval_records(const std::string& path);

}  // namespace last
