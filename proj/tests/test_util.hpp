// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <vector>

#include "last/embedding.hpp"
#include "last/ingest.hpp"

namespace last::testing {

inline EmbeddingVector random_unit_vector(std::mt19937& rng, int d) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = gauss(rng);
    if (v.norm() < 1e-9) v(0) = 1.0;
    return normalize(v);
}

inline std::vector<EmbeddingVector> random_unit_frames(std::mt19937& rng, int t, int d) {
    std::vector<EmbeddingVector> frames;
    frames.reserve(t);
    for (int i = 0; i < t; ++i) frames.push_back(random_unit_vector(rng, d));
    return frames;
}

/// Synthetic manifest: n frames at a fixed rate, uniform dimensions.
inline VideoManifest synthetic_manifest(int n, double fps, int width = 224,
                                        int height = 224) {
    VideoManifest m;
    m.native_fps = fps;
    m.duration = n / fps;
    for (int i = 0; i < n; ++i) {
        FrameMeta f;
        f.index = i;
        f.timestamp = i / fps;
        f.width = width;
        f.height = height;
        f.uri = "frame://" + std::to_string(i);
        f.embedding_row = i;
        m.frames.push_back(std::move(f));
    }
    return m;
}

}  // namespace last::testing
