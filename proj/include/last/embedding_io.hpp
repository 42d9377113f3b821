// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "last/embedding.hpp"

namespace last {

/// Embedding matrix file: first line "d T", then T lines of d decimals.
/// Rows are l2-normalized on load.
std::vector<EmbeddingVector> read_embeddings(const std::string& path);
std::vector<EmbeddingVector> parse_embeddings(const std::string& text);
std::string serialize_embeddings(const std::vector<EmbeddingVector>& rows);

}  // namespace last
