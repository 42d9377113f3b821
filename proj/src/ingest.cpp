// SPDX-License-Identifier: Apache-2.0
#include "last/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace last {

VideoManifest parse_manifest(const std::string& text) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header)) {
        throw EmptyManifestError("manifest is empty");
    }
    VideoManifest m;
    if (std::sscanf(header.c_str(), "fps=%lf duration=%lf", &m.native_fps, &m.duration) != 2) {
        throw IOFailureError("bad manifest header: " + header);
    }
    if (!(m.native_fps > 0)) {
        throw IOFailureError("manifest fps must be positive");
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        FrameMeta f;
        if (!(ls >> f.index >> f.timestamp >> f.width >> f.height >> f.uri)) {
            throw IOFailureError("bad manifest frame line: " + line);
        }
        if (f.width < 1 || f.height < 1) {
            throw IOFailureError("frame dimensions must be positive: " + line);
        }
        int row;
        if (ls >> row) f.embedding_row = row;
        if (!m.frames.empty() && f.timestamp <= m.frames.back().timestamp) {
            throw IOFailureError("manifest timestamps must be strictly increasing");
        }
        m.frames.push_back(std::move(f));
    }
    if (m.frames.empty()) {
        throw EmptyManifestError("manifest lists no frames");
    }
    return m;
}

VideoManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOFailureError("cannot open manifest: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str());
}

std::string serialize_manifest(const VideoManifest& m) {
    std::ostringstream out;
    out << "fps=" << m.native_fps << " duration=" << m.duration << "\n";
    for (const auto& f : m.frames) {
        out << f.index << " " << f.timestamp << " " << f.width << " " << f.height << " "
            << f.uri;
        if (f.embedding_row) out << " " << *f.embedding_row;
        out << "\n";
    }
    return out.str();
}

std::vector<int> downsample_plan(const VideoManifest& m, double target_fps) {
    if (m.frames.empty()) throw EmptyManifestError("manifest lists no frames");
    if (!(target_fps > 0)) throw std::invalid_argument("target_fps must be > 0");

    const int n = static_cast<int>(m.frames.size());
    std::vector<int> out;
    if (m.native_fps <= target_fps) {
        out.reserve(n);
        for (int i = 0; i < n; ++i) out.push_back(i);
        return out;
    }

    int cursor = 0;
    for (long tick_no = 0;; ++tick_no) {
        const double tick = static_cast<double>(tick_no) / target_fps;
        while (cursor < n && m.frames[cursor].timestamp < tick) ++cursor;
        if (cursor >= n) break;
        out.push_back(cursor);
        ++cursor;
    }
    return out;
}

Dims resize_plan(int width, int height, int max_pixels) {
    if (width < 1 || height < 1) throw std::invalid_argument("dimensions must be >= 1");
    const long long px = static_cast<long long>(width) * height;
    if (px < max_pixels) return {width, height};

    const double s = std::sqrt(static_cast<double>(max_pixels) / static_cast<double>(px));
    int w = std::max(1, static_cast<int>(std::floor(width * s)));
    int h = std::max(1, static_cast<int>(std::floor(height * s)));
    // flooring can land exactly on the budget; the budget is strict
    while (static_cast<long long>(w) * h >= max_pixels) {
        if (w >= h && w > 1) {
            --w;
        } else if (h > 1) {
            --h;
        } else {
            break;
        }
    }
    return {w, h};
}

int estimate_visual_tokens(int width, int height, int patch) {
    if (patch < 1) throw std::invalid_argument("patch must be >= 1");
    const int pw = (width + patch - 1) / patch;
    const int ph = (height + patch - 1) / patch;
    return pw * ph;
}

}  // namespace last
