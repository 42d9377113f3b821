// SPDX-License-Identifier: Apache-2.0
#include "last/embedding.hpp"

#include <cmath>

namespace last {

double EmbeddingVector::dot(const EmbeddingVector& other) const {
    if (dim() != other.dim()) {
        throw DimensionMismatchError("embedding dimensions differ");
    }
    return values.dot(other.values);
}

SimilarityKernel SimilarityKernel::restricted(const std::vector<int>& indices) const {
    SimilarityKernel out;
    const auto n = static_cast<Eigen::Index>(indices.size());
    out.entries.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            out.entries(r, c) = entries(indices[r], indices[c]);
        }
    }
    return out;
}

EmbeddingVector normalize(const Eigen::VectorXd& v) {
    const double norm = v.norm();
    if (norm < 1e-12) {
        throw ZeroVectorError("cannot normalize a (near-)zero vector");
    }
    return EmbeddingVector{v / norm};
}

std::vector<double> relevance_scores(const EmbeddingVector& q,
                                     const std::vector<EmbeddingVector>& frames) {
    std::vector<double> scores;
    scores.reserve(frames.size());
    for (const auto& f : frames) {
        scores.push_back(q.dot(f));
    }
    return scores;
}

SimilarityKernel build_kernel(const std::vector<EmbeddingVector>& frames) {
    if (frames.empty()) {
        throw EmptyInputError("build_kernel requires at least one frame");
    }
    const int d = frames.front().dim();
    const auto t = static_cast<Eigen::Index>(frames.size());
    for (const auto& f : frames) {
        if (f.dim() != d) {
            throw DimensionMismatchError("frame embedding dimensions differ");
        }
    }
    SimilarityKernel kernel;
    kernel.entries.resize(t, t);
    for (Eigen::Index p = 0; p < t; ++p) {
        kernel.entries(p, p) = std::exp(frames[p].values.squaredNorm());
        for (Eigen::Index q = p + 1; q < t; ++q) {
            const double s = std::exp(frames[p].values.dot(frames[q].values));
            kernel.entries(p, q) = s;
            kernel.entries(q, p) = s;
        }
    }
    return kernel;
}

}  // namespace last
