// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "last/embedding.hpp"

namespace last {

struct SelectionConfig {
    int k = 8;
    int pool_multiplier = 4;
    double epsilon = 1e-5;
};

/// Result of greedy diverse selection. `indices` is in selection order,
/// `presented_indices` is the same set sorted ascending (temporal order).
struct SelectionResult {
    std::vector<int> indices;
    std::vector<double> gains;  // squared Cholesky pivot at selection time
    double log_det = 0.0;
    std::vector<int> presented_indices;
    std::uint64_t inner_ops = 0;  // multiply-accumulate count of the update loop
};

/// Endpoint-inclusive even spacing: round(j*(T-1)/(K-1)), deduplicated then
/// topped up with nearest unused indices. Clamps K to T.
std::vector<int> uniform_sample(int t, int k);

/// Indices of the k largest relevance scores, descending score then ascending
/// index. Returns all indices when k >= T.
std::vector<int> top_k_relevance(const EmbeddingVector& q,
                                 const std::vector<EmbeddingVector>& frames, int k);

/// Greedy MAP inference on the kernel via incremental Cholesky pivots.
/// Stops at K items or when the best remaining pivot drops below epsilon.
SelectionResult greedy_dpp_map(const SimilarityKernel& kernel, int k, double epsilon = 1e-5);

/// Validation oracle: per step, picks the item maximizing the determinant of
/// the grown principal submatrix, computed directly. Lowest-index ties.
std::vector<int> naive_greedy_reference(const SimilarityKernel& kernel, int k,
                                        double epsilon = 1e-5);

struct BruteForceResult {
    std::vector<int> indices;
    double det = 0.0;
};

/// Exhaustive argmax over all size-K subsets. Throws TooLargeError when
/// C(T, K) exceeds 1e6.
BruteForceResult brute_force_map(const SimilarityKernel& kernel, int k);

/// Two-stage recipe: relevance pool of size pool_multiplier*K, then greedy
/// diverse selection restricted to the pool, mapped back to original indices.
SelectionResult select_frames(const EmbeddingVector& q,
                              const std::vector<EmbeddingVector>& frames,
                              const SelectionConfig& cfg);

/// Tops up an epsilon-stopped selection to `k` indices using evenly spaced
/// unused frames; no-op when the selection already has k entries.
std::vector<int> pad_uniform(const std::vector<int>& selected, int t, int k);

}  // namespace last
