// SPDX-License-Identifier: Apache-2.0
#include "last/embedding_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace last {

std::vector<EmbeddingVector> parse_embeddings(const std::string& text) {
    std::istringstream in(text);
    int d = 0, t = 0;
    if (!(in >> d >> t) || d < 1 || t < 1) {
        throw IOFailureError("embedding file needs a 'd T' header");
    }
    std::vector<EmbeddingVector> rows;
    rows.reserve(t);
    for (int r = 0; r < t; ++r) {
        Eigen::VectorXd v(d);
        for (int c = 0; c < d; ++c) {
            if (!(in >> v(c))) {
                throw IOFailureError("embedding file truncated at row " + std::to_string(r));
            }
        }
        rows.push_back(normalize(v));
    }
    return rows;
}

std::vector<EmbeddingVector> read_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOFailureError("cannot open embedding file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_embeddings(buf.str());
}

std::string serialize_embeddings(const std::vector<EmbeddingVector>& rows) {
    if (rows.empty()) throw EmptyInputError("no embeddings to serialize");
    std::ostringstream out;
    out << rows.front().dim() << " " << rows.size() << "\n";
    out << std::setprecision(17);
    for (const auto& row : rows) {
        for (int c = 0; c < row.dim(); ++c) {
            if (c) out << " ";
            out << row.values(c);
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace last
