// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "last/errors.hpp"

namespace last {

/// Unit-norm feature vector of a frame or a text query.
struct EmbeddingVector {
    Eigen::VectorXd values;

    int dim() const { return static_cast<int>(values.size()); }
    double dot(const EmbeddingVector& other) const;
};

/// Dense T x T similarity kernel, entries exp(i_p . i_q).
struct SimilarityKernel {
    using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Matrix entries;

    int size() const { return static_cast<int>(entries.rows()); }

    /// Principal submatrix gathered at the given row/column indices.
    SimilarityKernel restricted(const std::vector<int>& indices) const;
};

/// Scales v to unit l2 norm. Throws ZeroVectorError when the norm is below 1e-12.
EmbeddingVector normalize(const Eigen::VectorXd& v);

/// Per-frame query relevance q . i_k, each in [-1, 1] for unit vectors.
std::vector<double> relevance_scores(const EmbeddingVector& q,
                                     const std::vector<EmbeddingVector>& frames);

/// Builds the kernel L_pq = exp(i_p . i_q) over all frame pairs.
SimilarityKernel build_kernel(const std::vector<EmbeddingVector>& frames);

}  // namespace last
