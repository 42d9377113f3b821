// SPDX-License-Identifier: Apache-2.0
#include "last/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace last {

namespace {

void check_kernel(const SimilarityKernel& kernel) {
    if (kernel.entries.rows() == 0 || kernel.entries.rows() != kernel.entries.cols()) {
        throw InvalidKernelError("kernel must be square and nonempty");
    }
    if (!kernel.entries.allFinite()) {
        throw InvalidKernelError("kernel contains non-finite entries");
    }
}

double det_of_subset(const SimilarityKernel& kernel, const std::vector<int>& subset) {
    return kernel.restricted(subset).entries.determinant();
}

}  // namespace

std::vector<int> uniform_sample(int t, int k) {
    if (t <= 0) return {};
    k = std::min(k, t);
    if (k <= 0) return {};

    std::vector<bool> used(t, false);
    std::vector<int> picks;
    picks.reserve(k);
    for (int j = 0; j < k; ++j) {
        int idx = (k == 1) ? 0
                           : static_cast<int>(std::llround(
                                 static_cast<double>(j) * (t - 1) / (k - 1)));
        if (used[idx]) {
            // nearest unused neighbor restores the count
            for (int off = 1; off < t; ++off) {
                if (idx - off >= 0 && !used[idx - off]) {
                    idx -= off;
                    break;
                }
                if (idx + off < t && !used[idx + off]) {
                    idx += off;
                    break;
                }
            }
        }
        used[idx] = true;
        picks.push_back(idx);
    }
    std::sort(picks.begin(), picks.end());
    return picks;
}

std::vector<int> top_k_relevance(const EmbeddingVector& q,
                                 const std::vector<EmbeddingVector>& frames, int k) {
    const auto scores = relevance_scores(q, frames);
    std::vector<int> order(frames.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    if (k < static_cast<int>(order.size())) {
        order.resize(k);
    }
    return order;
}

SelectionResult greedy_dpp_map(const SimilarityKernel& kernel, int k, double epsilon) {
    check_kernel(kernel);
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be > 0");

    const int t = kernel.size();
    const int max_picks = std::min(k, t);
    const int stride = std::max(1, max_picks - 1);

    std::vector<double> d2(t);
    for (int i = 0; i < t; ++i) d2[i] = kernel.entries(i, i);
    std::vector<double> c(static_cast<size_t>(t) * stride, 0.0);
    std::vector<bool> selected(t, false);

    SelectionResult res;

    int j = 0;
    for (int i = 1; i < t; ++i) {
        if (d2[i] > d2[j]) j = i;
    }
    selected[j] = true;
    res.indices.push_back(j);
    res.gains.push_back(d2[j]);
    res.log_det = std::log(d2[j]);

    int len = 0;  // columns of c filled so far
    while (static_cast<int>(res.indices.size()) < max_picks) {
        const double dj = std::sqrt(res.gains.back());
        for (int i = 0; i < t; ++i) {
            if (selected[i]) continue;
            double dot = 0.0;
            const double* cj = &c[static_cast<size_t>(j) * stride];
            const double* ci = &c[static_cast<size_t>(i) * stride];
            for (int m = 0; m < len; ++m) dot += cj[m] * ci[m];
            const double e = (kernel.entries(j, i) - dot) / dj;
            c[static_cast<size_t>(i) * stride + len] = e;
            d2[i] -= e * e;
            res.inner_ops += static_cast<std::uint64_t>(len) + 1;
        }
        ++len;

        int best = -1;
        for (int i = 0; i < t; ++i) {
            if (selected[i]) continue;
            if (best < 0 || d2[i] > d2[best]) best = i;
        }
        if (best < 0 || d2[best] < epsilon) break;  // epsilon stop: shorter result

        selected[best] = true;
        res.indices.push_back(best);
        res.gains.push_back(d2[best]);
        res.log_det += std::log(d2[best]);
        j = best;
    }

    res.presented_indices = res.indices;
    std::sort(res.presented_indices.begin(), res.presented_indices.end());
    return res;
}

std::vector<int> naive_greedy_reference(const SimilarityKernel& kernel, int k,
                                        double epsilon) {
    check_kernel(kernel);
    if (k < 1) throw std::invalid_argument("k must be >= 1");

    const int t = kernel.size();
    const int max_picks = std::min(k, t);

    std::vector<int> chosen;
    std::vector<bool> selected(t, false);
    double current_det = 1.0;  // det over the empty set

    while (static_cast<int>(chosen.size()) < max_picks) {
        int best = -1;
        double best_det = 0.0;
        std::vector<int> trial = chosen;
        trial.push_back(0);
        for (int i = 0; i < t; ++i) {
            if (selected[i]) continue;
            trial.back() = i;
            const double det = det_of_subset(kernel, trial);
            if (best < 0 || det > best_det) {
                best = i;
                best_det = det;
            }
        }
        if (best < 0 || best_det / current_det < epsilon) break;
        selected[best] = true;
        chosen.push_back(best);
        current_det = best_det;
    }
    return chosen;
}

BruteForceResult brute_force_map(const SimilarityKernel& kernel, int k) {
    check_kernel(kernel);
    const int t = kernel.size();
    k = std::min(k, t);
    if (k < 1) throw std::invalid_argument("k must be >= 1");

    double count = 1.0;
    for (int i = 0; i < k; ++i) count = count * (t - i) / (i + 1);
    if (count > 1e6) {
        throw TooLargeError("subset enumeration bound exceeded");
    }

    std::vector<int> subset(k);
    std::iota(subset.begin(), subset.end(), 0);
    BruteForceResult best;
    bool first = true;
    while (true) {
        const double det = det_of_subset(kernel, subset);
        if (first || det > best.det) {
            best.det = det;
            best.indices = subset;
            first = false;
        }
        // next lexicographic combination
        int pos = k - 1;
        while (pos >= 0 && subset[pos] == t - k + pos) --pos;
        if (pos < 0) break;
        ++subset[pos];
        for (int p = pos + 1; p < k; ++p) subset[p] = subset[p - 1] + 1;
    }
    return best;
}

SelectionResult select_frames(const EmbeddingVector& q,
                              const std::vector<EmbeddingVector>& frames,
                              const SelectionConfig& cfg) {
    if (frames.empty()) throw EmptyInputError("select_frames requires frames");
    if (cfg.k < 1 || cfg.pool_multiplier < 1 || !(cfg.epsilon > 0)) {
        throw std::invalid_argument("invalid selection config");
    }

    const int t = static_cast<int>(frames.size());
    const int pool_size = cfg.pool_multiplier * cfg.k;

    std::vector<int> pool;
    if (t <= pool_size) {
        pool.resize(t);
        std::iota(pool.begin(), pool.end(), 0);
    } else {
        pool = top_k_relevance(q, frames, pool_size);
        std::sort(pool.begin(), pool.end());  // lowest-index ties stay temporal
    }

    const SimilarityKernel full = build_kernel(frames);
    SelectionResult res = greedy_dpp_map(full.restricted(pool), cfg.k, cfg.epsilon);
    for (auto& idx : res.indices) idx = pool[idx];
    res.presented_indices = res.indices;
    std::sort(res.presented_indices.begin(), res.presented_indices.end());
    return res;
}

std::vector<int> pad_uniform(const std::vector<int>& selected, int t, int k) {
    k = std::min(k, t);
    std::vector<int> out = selected;
    if (static_cast<int>(out.size()) >= k) return out;

    std::vector<bool> used(t, false);
    for (int idx : out) used[idx] = true;
    for (int cand : uniform_sample(t, k)) {
        if (static_cast<int>(out.size()) >= k) break;
        if (!used[cand]) {
            used[cand] = true;
            out.push_back(cand);
        }
    }
    for (int i = 0; i < t && static_cast<int>(out.size()) < k; ++i) {
        if (!used[i]) {
            used[i] = true;
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace last
