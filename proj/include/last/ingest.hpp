// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "last/errors.hpp"

namespace last {

struct FrameMeta {
    int index = 0;
    double timestamp = 0.0;  // seconds
    int width = 0;
    int height = 0;
    std::string uri;
    std::optional<int> embedding_row;
};

struct VideoManifest {
    std::vector<FrameMeta> frames;
    double native_fps = 0.0;
    double duration = 0.0;  // seconds
};

/// Parses the line-oriented manifest format:
///   fps=<real> duration=<real>
///   <index> <timestamp> <width> <height> <uri> [embedding_row]
VideoManifest parse_manifest(const std::string& text);
VideoManifest load_manifest(const std::string& path);
std::string serialize_manifest(const VideoManifest& m);

/// Frame indices for resampling at target_fps: for each tick 0, 1/fps, 2/fps...
/// the earliest not-yet-taken frame with timestamp >= tick. Returns all frames
/// when the native rate is at or below the target (no upsampling).
std::vector<int> downsample_plan(const VideoManifest& m, double target_fps = 4.0);

struct Dims {
    int width = 0;
    int height = 0;
    bool operator==(const Dims&) const = default;
};

/// Shrinks dimensions so width*height stays strictly under max_pixels,
/// preserving aspect ratio. Dimensions already under budget pass through.
Dims resize_plan(int width, int height, int max_pixels = 50176);

/// Patch-grid token count: ceil(w/patch) * ceil(h/patch).
int estimate_visual_tokens(int width, int height, int patch = 14);

}  // namespace last
