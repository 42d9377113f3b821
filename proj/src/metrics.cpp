// SPDX-License-Identifier: Apache-2.0
#include "last/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace last {

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "open") return TaskKind::open;
    if (s == "multiple_choice") return TaskKind::multiple_choice;
    if (s == "numerical") return TaskKind::numerical;
    throw IOFailureError("unknown task kind: " + s);
}

std::string to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::open: return "open";
        case TaskKind::multiple_choice: return "multiple_choice";
        case TaskKind::numerical: return "numerical";
    }
    return "open";
}

namespace {

std::vector<std::string> split_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

bool is_terminal_punct(char c) {
    return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
}

/// True when `needle` appears as a contiguous token run inside `hay`.
bool token_run_contained(const std::vector<std::string>& needle,
                         const std::vector<std::string>& hay) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    for (size_t start = 0; start + needle.size() <= hay.size(); ++start) {
        if (std::equal(needle.begin(), needle.end(), hay.begin() + start)) return true;
    }
    return false;
}

}  // namespace

std::string normalize_answer(const std::string& text) {
    std::string lower;
    lower.reserve(text.size());
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

    auto tokens = split_tokens(lower);  // trims and collapses whitespace
    std::string joined;
    for (const auto& tok : tokens) {
        if (!joined.empty()) joined.push_back(' ');
        joined += tok;
    }
    while (!joined.empty() && is_terminal_punct(joined.back())) joined.pop_back();

    for (const char* article : {"a ", "an ", "the "}) {
        const size_t len = std::strlen(article);
        if (joined.compare(0, len, article) == 0) {
            joined.erase(0, len);
            break;
        }
    }
    return joined;
}

int em1(const std::string& pred, const std::string& gt) {
    return normalize_answer(pred) == normalize_answer(gt) ? 1 : 0;
}

int em_r1(const std::string& pred, const std::string& gt) {
    if (em1(pred, gt)) return 1;
    const auto p = split_tokens(normalize_answer(pred));
    const auto g = split_tokens(normalize_answer(gt));
    return (token_run_contained(g, p) || token_run_contained(p, g)) ? 1 : 0;
}

std::string extract_option_letter(const std::string& prediction) {
    for (auto tok : split_tokens(prediction)) {
        while (!tok.empty() && !std::isalnum(static_cast<unsigned char>(tok.front()))) {
            tok.erase(tok.begin());
        }
        while (!tok.empty() && !std::isalnum(static_cast<unsigned char>(tok.back()))) {
            tok.pop_back();
        }
        if (tok.size() == 1 && tok[0] >= 'A' && tok[0] <= 'E') return tok;
    }
    return "";
}

double mca_accuracy(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw EmptyInputError("mca_accuracy needs records");
    int correct = 0;
    for (const auto& r : records) {
        const std::string letter = extract_option_letter(r.prediction);
        if (!letter.empty() && letter == r.ground_truth) ++correct;
    }
    return static_cast<double>(correct) / records.size();
}

double mra(double pred, double gt) {
    static const std::vector<double> thresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                                   0.75, 0.80, 0.85, 0.90, 0.95};
    return mra(pred, gt, thresholds);
}

double mra(double pred, double gt, const std::vector<double>& thresholds) {
    if (gt == 0.0) throw ZeroGroundTruthError("mra requires nonzero ground truth");
    if (thresholds.empty()) throw EmptyInputError("mra needs thresholds");
    const double rel_err = std::abs(pred - gt) / std::abs(gt);
    int passed = 0;
    for (double theta : thresholds) {
        if (rel_err < 1.0 - theta) ++passed;
    }
    return static_cast<double>(passed) / thresholds.size();
}

namespace {

double round_sig(double x, int digits = 6) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    const double mag = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(
                                                       std::log10(std::abs(x)))));
    return std::round(x * mag) / mag;
}

double parse_number(const std::string& text, bool* ok) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    *ok = (end != begin) && std::isfinite(v);
    return v;
}

}  // namespace

nlohmann::ordered_json report(const std::vector<Trace>& traces,
                              const std::vector<EvalRecord>& records) {
    if (records.empty()) throw EmptyInputError("report needs eval records");
    if (!traces.empty() && traces.size() != records.size()) {
        throw IdMismatchError("trace and record counts differ");
    }

    double em1_sum = 0, emr1_sum = 0, mra_sum = 0;
    int open_n = 0, mca_n = 0, num_n = 0;
    std::vector<EvalRecord> mca_records;
    for (const auto& r : records) {
        switch (r.kind) {
            case TaskKind::open:
                em1_sum += em1(r.prediction, r.ground_truth);
                emr1_sum += em_r1(r.prediction, r.ground_truth);
                ++open_n;
                break;
            case TaskKind::multiple_choice:
                mca_records.push_back(r);
                ++mca_n;
                break;
            case TaskKind::numerical: {
                bool gt_ok = false;
                const double gt = parse_number(r.ground_truth, &gt_ok);
                if (!gt_ok) {
                    throw std::invalid_argument("numerical ground truth must be a finite real");
                }
                bool pred_ok = false;
                const double pred = parse_number(r.prediction, &pred_ok);
                mra_sum += pred_ok ? mra(pred, gt) : 0.0;
                ++num_n;
                break;
            }
        }
    }

    nlohmann::ordered_json doc;
    doc["records"] = static_cast<int>(records.size());
    nlohmann::ordered_json metrics;
    if (open_n) {
        metrics["em1"] = round_sig(em1_sum / open_n);
        metrics["em_r1"] = round_sig(emr1_sum / open_n);
    }
    if (mca_n) metrics["mca_accuracy"] = round_sig(mca_accuracy(mca_records));
    if (num_n) metrics["mra"] = round_sig(mra_sum / num_n);
    doc["metrics"] = std::move(metrics);

    if (!traces.empty()) {
        const TraceStats stats = trace_stats(traces);
        doc["mean_tool_calls"] = round_sig(stats.mean_tool_calls);
        nlohmann::ordered_json usage;
        for (const auto& [name, pct] : stats.tool_usage_pct) usage[name] = round_sig(pct);
        doc["tool_usage_pct"] = std::move(usage);
        doc["tokens"] = {{"input_text", round_sig(stats.mean_input_text_tokens)},
                         {"input_visual", round_sig(stats.mean_input_visual_tokens)},
                         {"output_text", round_sig(stats.mean_output_text_tokens)}};
    }
    return doc;
}

std::vector<EvalRecord> read_eval_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOFailureError("cannot open eval records: " + path);
    std::vector<EvalRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IOFailureError(std::string("bad eval record: ") + e.what());
        }
        EvalRecord r;
        r.id = doc.at("id").get<std::string>();
        r.prediction = doc.at("prediction").get<std::string>();
        if (doc.at("ground_truth").is_number()) {
            std::ostringstream num;
            num << doc.at("ground_truth").get<double>();
            r.ground_truth = num.str();
        } else {
            r.ground_truth = doc.at("ground_truth").get<std::string>();
        }
        r.kind = task_kind_from_string(doc.at("kind").get<std::string>());
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace last
