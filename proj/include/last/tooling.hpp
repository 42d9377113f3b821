// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "last/embedding.hpp"
#include "last/ingest.hpp"
#include "last/selection.hpp"

namespace last {

// ── Visual payloads ────────────────────────────────────────────────────

using Rgb = std::array<std::uint8_t, 3>;

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major

    static Image solid(int width, int height, Rgb color);
    Rgb at(int x, int y) const;
    void set(int x, int y, Rgb color);
};

struct Annotation {
    int frame_index = 0;
    int center_x = 0;
    int center_y = 0;
    int radius = 4;
    int object_id = 0;
    std::string label;
};

/// Fixed palette color for an object id (stable across frames and runs).
Rgb marker_color(int object_id);

/// Draws a filled disk per annotation onto copies of the frames; pixels
/// outside the disks are untouched. Throws OutOfBounds for centers outside
/// the frame.
std::vector<Image> overlay_markers(const std::vector<Image>& frames,
                                   const std::vector<Annotation>& tracks);

/// Restricts the manifest to frames with t0 <= timestamp <= t1, keeping
/// parent frame indices. Throws EmptySegment when nothing falls inside.
VideoManifest trim_segment(const VideoManifest& m, double t0, double t1);

struct BBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};

/// Crops to bbox, then shrinks the crop to the pixel budget.
Image zoom(const Image& frame, const BBox& bbox, int max_pixels = 50176);

// ── Tool registry ──────────────────────────────────────────────────────

enum class ResultKind {
    new_frame_set,
    annotated_frames,
    segment,
    region,
    depth_map,
    cropped_image,
};

std::string to_string(ResultKind kind);
ResultKind result_kind_from_string(const std::string& s);

struct ArgField {
    std::string name;
    std::string type;  // "string" | "number" | "integer" | "array"
    bool required = true;
};

struct ToolSpec {
    std::string name;
    std::vector<ArgField> arguments;
    ResultKind result_kind = ResultKind::new_frame_set;
};

struct ToolCall {
    std::string tool;
    nlohmann::json arguments;
    int round = 0;
};

struct ToolResult {
    ResultKind kind = ResultKind::new_frame_set;
    nlohmann::json payload;
    int token_cost = 0;
    std::string provenance = "mock";  // "mock" | "remote"
};

using ToolBackend = std::function<ToolResult(const nlohmann::json& arguments)>;

class ToolRegistry {
public:
    void register_tool(ToolSpec spec, ToolBackend backend);
    bool has(const std::string& name) const;
    const ToolSpec& spec(const std::string& name) const;
    std::vector<std::string> names() const;
    bool empty() const { return tools_.empty(); }

    /// Validates arguments against the spec, then invokes the backend.
    ToolResult dispatch(const ToolCall& call) const;

private:
    struct Entry {
        ToolSpec spec;
        ToolBackend backend;
    };
    std::map<std::string, Entry> tools_;
};

/// The six standard tool specs: frame_selection, object_tracking,
/// temporal_grounding, image_grounding, depth_estimation, zoom.
std::vector<ToolSpec> standard_tool_specs();

// ── Deterministic mock backends ────────────────────────────────────────

/// One JSON document per scenario, mapping tool name -> label -> scripted
/// output. Everything the mocks return is read verbatim from here.
class MockFixture {
public:
    static MockFixture parse(const nlohmann::json& doc);
    static MockFixture load(const std::string& path);

    const nlohmann::json& lookup(const std::string& tool, const std::string& label) const;
    const nlohmann::json& raw() const { return doc_; }

private:
    nlohmann::json doc_;
};

std::vector<Annotation> mock_tracker(const MockFixture& script, const std::string& label);
nlohmann::json mock_grounder(const MockFixture& script, const std::string& label);
std::pair<double, double> mock_temporal(const MockFixture& script, const std::string& query);
nlohmann::json mock_depth(const MockFixture& script, const std::string& label);

/// Inputs the mock tools operate on: the episode's frames and query.
struct ScenarioContext {
    VideoManifest manifest;
    std::vector<EmbeddingVector> frame_embeddings;
    EmbeddingVector query_embedding;
    SelectionConfig selection;
};

/// Registry wired to the mock backends. frame_selection and zoom run the
/// real algorithms; the neural stand-ins replay the fixture.
ToolRegistry make_mock_registry(const MockFixture& fixture, const ScenarioContext& ctx);

// ── Remote service client ──────────────────────────────────────────────

/// Backend speaking POST /tools/<name> with {"arguments": ..., "frames": [...]}
/// against an external tool service. Retries once on transport failure.
ToolBackend make_remote_backend(const std::string& base_url, const ToolSpec& spec,
                                int timeout_seconds = 30);

}  // namespace last
