// SPDX-License-Identifier: Apache-2.0
#include "last/tooling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <httplib.h>

namespace last {

// ── Visual payloads ────────────────────────────────────────────────────

Image Image::solid(int width, int height, Rgb color) {
    Image img;
    img.width = width;
    img.height = height;
    img.rgb.resize(static_cast<size_t>(width) * height * 3);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) img.set(x, y, color);
    }
    return img;
}

Rgb Image::at(int x, int y) const {
    const size_t off = (static_cast<size_t>(y) * width + x) * 3;
    return {rgb[off], rgb[off + 1], rgb[off + 2]};
}

void Image::set(int x, int y, Rgb color) {
    const size_t off = (static_cast<size_t>(y) * width + x) * 3;
    rgb[off] = color[0];
    rgb[off + 1] = color[1];
    rgb[off + 2] = color[2];
}

Rgb marker_color(int object_id) {
    static const std::array<Rgb, 8> palette = {{
        {230, 25, 75},   // red
        {60, 180, 75},   // green
        {0, 130, 200},   // blue
        {255, 225, 25},  // yellow
        {145, 30, 180},  // purple
        {70, 240, 240},  // cyan
        {245, 130, 48},  // orange
        {240, 50, 230},  // magenta
    }};
    return palette[static_cast<unsigned>(object_id) % palette.size()];
}

std::vector<Image> overlay_markers(const std::vector<Image>& frames,
                                   const std::vector<Annotation>& tracks) {
    std::vector<Image> out = frames;
    for (const auto& a : tracks) {
        if (a.frame_index < 0 || a.frame_index >= static_cast<int>(out.size())) {
            throw OutOfBoundsError("annotation frame index out of range");
        }
        Image& img = out[a.frame_index];
        if (a.center_x < 0 || a.center_x >= img.width || a.center_y < 0 ||
            a.center_y >= img.height) {
            throw OutOfBoundsError("annotation center outside frame");
        }
        if (a.radius <= 0) throw OutOfBoundsError("annotation radius must be > 0");

        const Rgb color = marker_color(a.object_id);
        const int r = a.radius;
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                if (dx * dx + dy * dy > r * r) continue;
                const int x = a.center_x + dx;
                const int y = a.center_y + dy;
                if (x < 0 || x >= img.width || y < 0 || y >= img.height) continue;
                img.set(x, y, color);
            }
        }
    }
    return out;
}

VideoManifest trim_segment(const VideoManifest& m, double t0, double t1) {
    if (!(t0 < t1) || t0 < 0) throw std::invalid_argument("need 0 <= t0 < t1");
    VideoManifest out;
    out.native_fps = m.native_fps;
    out.duration = t1 - t0;
    for (const auto& f : m.frames) {
        if (f.timestamp >= t0 && f.timestamp <= t1) out.frames.push_back(f);
    }
    if (out.frames.empty()) throw EmptySegmentError("no frame inside segment");
    return out;
}

Image zoom(const Image& frame, const BBox& bbox, int max_pixels) {
    if (bbox.w < 1 || bbox.h < 1 || bbox.x < 0 || bbox.y < 0 ||
        bbox.x + bbox.w > frame.width || bbox.y + bbox.h > frame.height) {
        throw OutOfBoundsError("zoom bbox outside frame");
    }
    const Dims dims = resize_plan(bbox.w, bbox.h, max_pixels);
    Image out;
    out.width = dims.width;
    out.height = dims.height;
    out.rgb.resize(static_cast<size_t>(dims.width) * dims.height * 3);
    for (int y = 0; y < dims.height; ++y) {
        const int sy = bbox.y + y * bbox.h / dims.height;
        for (int x = 0; x < dims.width; ++x) {
            const int sx = bbox.x + x * bbox.w / dims.width;
            out.set(x, y, frame.at(sx, sy));
        }
    }
    return out;
}

// ── Tool registry ──────────────────────────────────────────────────────

std::string to_string(ResultKind kind) {
    switch (kind) {
        case ResultKind::new_frame_set: return "new_frame_set";
        case ResultKind::annotated_frames: return "annotated_frames";
        case ResultKind::segment: return "segment";
        case ResultKind::region: return "region";
        case ResultKind::depth_map: return "depth_map";
        case ResultKind::cropped_image: return "cropped_image";
    }
    return "new_frame_set";
}

ResultKind result_kind_from_string(const std::string& s) {
    if (s == "new_frame_set") return ResultKind::new_frame_set;
    if (s == "annotated_frames") return ResultKind::annotated_frames;
    if (s == "segment") return ResultKind::segment;
    if (s == "region") return ResultKind::region;
    if (s == "depth_map") return ResultKind::depth_map;
    if (s == "cropped_image") return ResultKind::cropped_image;
    throw IOFailureError("unknown result kind: " + s);
}

void ToolRegistry::register_tool(ToolSpec spec, ToolBackend backend) {
    const auto name = spec.name;
    if (tools_.count(name)) throw DuplicateToolError("tool already registered: " + name);
    tools_.emplace(name, Entry{std::move(spec), std::move(backend)});
}

bool ToolRegistry::has(const std::string& name) const { return tools_.count(name) > 0; }

const ToolSpec& ToolRegistry::spec(const std::string& name) const {
    auto it = tools_.find(name);
    if (it == tools_.end()) throw MalformedCallError("unknown tool: " + name);
    return it->second.spec;
}

std::vector<std::string> ToolRegistry::names() const {
    std::vector<std::string> out;
    out.reserve(tools_.size());
    for (const auto& [name, _] : tools_) out.push_back(name);
    return out;
}

namespace {

bool type_matches(const nlohmann::json& value, const std::string& type) {
    if (type == "string") return value.is_string();
    if (type == "integer") return value.is_number_integer();
    if (type == "number") return value.is_number();
    if (type == "array") return value.is_array();
    return false;
}

}  // namespace

ToolResult ToolRegistry::dispatch(const ToolCall& call) const {
    auto it = tools_.find(call.tool);
    if (it == tools_.end()) throw MalformedCallError("unknown tool: " + call.tool);
    const auto& [spec, backend] = it->second;

    if (!call.arguments.is_object()) {
        throw MalformedCallError("arguments must be an object");
    }
    for (const auto& field : spec.arguments) {
        if (!call.arguments.contains(field.name)) {
            if (field.required) {
                throw MalformedCallError(call.tool + ": missing argument " + field.name);
            }
            continue;
        }
        if (!type_matches(call.arguments.at(field.name), field.type)) {
            throw MalformedCallError(call.tool + ": argument " + field.name +
                                     " must be of type " + field.type);
        }
    }
    return backend(call.arguments);
}

std::vector<ToolSpec> standard_tool_specs() {
    return {
        {"frame_selection",
         {{"k", "integer", true}},
         ResultKind::new_frame_set},
        {"object_tracking",
         {{"object", "string", true}},
         ResultKind::annotated_frames},
        {"temporal_grounding",
         {{"query", "string", true}},
         ResultKind::segment},
        {"image_grounding",
         {{"label", "string", true}, {"frame", "integer", false}},
         ResultKind::region},
        {"depth_estimation",
         {{"target", "string", true}},
         ResultKind::depth_map},
        {"zoom",
         {{"frame", "integer", true}, {"bbox", "array", true}},
         ResultKind::cropped_image},
    };
}

// ── Deterministic mock backends ────────────────────────────────────────

MockFixture MockFixture::parse(const nlohmann::json& doc) {
    if (!doc.is_object()) throw IOFailureError("fixture must be a JSON object");
    MockFixture f;
    f.doc_ = doc;
    return f;
}

MockFixture MockFixture::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOFailureError("cannot open fixture: " + path);
    nlohmann::json doc;
    in >> doc;
    return parse(doc);
}

const nlohmann::json& MockFixture::lookup(const std::string& tool,
                                          const std::string& label) const {
    auto tool_it = doc_.find(tool);
    if (tool_it == doc_.end() || !tool_it->contains(label)) {
        throw UnknownLabelError("no fixture entry for " + tool + "/" + label);
    }
    return tool_it->at(label);
}

std::vector<Annotation> mock_tracker(const MockFixture& script, const std::string& label) {
    const auto& entries = script.lookup("object_tracking", label);
    std::vector<Annotation> anns;
    for (const auto& e : entries) {
        Annotation a;
        a.frame_index = e.at("frame").get<int>();
        a.center_x = e.at("cx").get<int>();
        a.center_y = e.at("cy").get<int>();
        a.radius = e.value("radius", 4);
        a.object_id = e.value("object_id", 0);
        a.label = e.value("label", label);
        anns.push_back(std::move(a));
    }
    return anns;
}

nlohmann::json mock_grounder(const MockFixture& script, const std::string& label) {
    return script.lookup("image_grounding", label);
}

std::pair<double, double> mock_temporal(const MockFixture& script, const std::string& query) {
    const auto& seg = script.lookup("temporal_grounding", query);
    return {seg.at(0).get<double>(), seg.at(1).get<double>()};
}

nlohmann::json mock_depth(const MockFixture& script, const std::string& label) {
    return script.lookup("depth_estimation", label);
}

namespace {

int frame_visual_tokens(const FrameMeta& f) {
    const Dims d = resize_plan(f.width, f.height);
    return estimate_visual_tokens(d.width, d.height);
}

const FrameMeta& frame_by_index(const VideoManifest& m, int index) {
    for (const auto& f : m.frames) {
        if (f.index == index) return f;
    }
    throw OutOfBoundsError("frame index not in manifest: " + std::to_string(index));
}

nlohmann::json annotation_to_json(const Annotation& a) {
    return {{"frame", a.frame_index}, {"cx", a.center_x},      {"cy", a.center_y},
            {"radius", a.radius},     {"object_id", a.object_id}, {"label", a.label}};
}

}  // namespace

ToolRegistry make_mock_registry(const MockFixture& fixture, const ScenarioContext& ctx) {
    ToolRegistry registry;

    for (auto& spec : standard_tool_specs()) {
        const std::string name = spec.name;
        const ResultKind kind = spec.result_kind;

        if (name == "frame_selection") {
            registry.register_tool(spec, [kind, fixture, ctx](const nlohmann::json& args) {
                SelectionConfig cfg = ctx.selection;
                cfg.k = args.at("k").get<int>();
                const SelectionResult sel =
                    select_frames(ctx.query_embedding, ctx.frame_embeddings, cfg);
                ToolResult res;
                res.kind = kind;
                res.payload = {{"indices", sel.presented_indices},
                               {"selection_order", sel.indices}};
                for (int idx : sel.presented_indices) {
                    res.token_cost += frame_visual_tokens(frame_by_index(ctx.manifest, idx));
                }
                return res;
            });
        } else if (name == "object_tracking") {
            registry.register_tool(spec, [kind, fixture, ctx](const nlohmann::json& args) {
                const auto anns = mock_tracker(fixture, args.at("object").get<std::string>());
                ToolResult res;
                res.kind = kind;
                res.payload["annotations"] = nlohmann::json::array();
                std::set<int> touched;
                for (const auto& a : anns) {
                    const FrameMeta& f = frame_by_index(ctx.manifest, a.frame_index);
                    if (a.center_x < 0 || a.center_x >= f.width || a.center_y < 0 ||
                        a.center_y >= f.height) {
                        throw OutOfBoundsError("tracked center outside frame");
                    }
                    res.payload["annotations"].push_back(annotation_to_json(a));
                    touched.insert(a.frame_index);
                }
                for (int idx : touched) {
                    res.token_cost += frame_visual_tokens(frame_by_index(ctx.manifest, idx));
                }
                return res;
            });
        } else if (name == "temporal_grounding") {
            registry.register_tool(spec, [kind, fixture, ctx](const nlohmann::json& args) {
                const auto [t0, t1] =
                    mock_temporal(fixture, args.at("query").get<std::string>());
                const VideoManifest seg = trim_segment(ctx.manifest, t0, t1);
                ToolResult res;
                res.kind = kind;
                nlohmann::json indices = nlohmann::json::array();
                for (const auto& f : seg.frames) {
                    indices.push_back(f.index);
                    res.token_cost += frame_visual_tokens(f);
                }
                res.payload = {{"t0", t0}, {"t1", t1}, {"indices", indices}};
                return res;
            });
        } else if (name == "image_grounding") {
            registry.register_tool(spec, [kind, fixture](const nlohmann::json& args) {
                ToolResult res;
                res.kind = kind;
                res.payload = mock_grounder(fixture, args.at("label").get<std::string>());
                return res;
            });
        } else if (name == "depth_estimation") {
            registry.register_tool(spec, [kind, fixture, ctx](const nlohmann::json& args) {
                ToolResult res;
                res.kind = kind;
                res.payload = mock_depth(fixture, args.at("target").get<std::string>());
                if (!ctx.manifest.frames.empty()) {
                    res.token_cost = frame_visual_tokens(ctx.manifest.frames.front());
                }
                return res;
            });
        } else if (name == "zoom") {
            registry.register_tool(spec, [kind, ctx](const nlohmann::json& args) {
                const int index = args.at("frame").get<int>();
                const auto& box = args.at("bbox");
                if (!box.is_array() || box.size() != 4) {
                    throw MalformedCallError("zoom bbox must be [x, y, w, h]");
                }
                BBox bbox{box.at(0).get<int>(), box.at(1).get<int>(), box.at(2).get<int>(),
                          box.at(3).get<int>()};
                const FrameMeta& f = frame_by_index(ctx.manifest, index);
                if (bbox.w < 1 || bbox.h < 1 || bbox.x < 0 || bbox.y < 0 ||
                    bbox.x + bbox.w > f.width || bbox.y + bbox.h > f.height) {
                    throw OutOfBoundsError("zoom bbox outside frame");
                }
                const Dims d = resize_plan(bbox.w, bbox.h);
                ToolResult res;
                res.kind = kind;
                res.payload = {{"frame", index},
                               {"bbox", {bbox.x, bbox.y, bbox.w, bbox.h}},
                               {"width", d.width},
                               {"height", d.height}};
                res.token_cost = estimate_visual_tokens(d.width, d.height);
                return res;
            });
        }
    }
    return registry;
}

// ── Remote service client ──────────────────────────────────────────────

ToolBackend make_remote_backend(const std::string& base_url, const ToolSpec& spec,
                                int timeout_seconds) {
    const std::string path = "/tools/" + spec.name;
    return [base_url, path, timeout_seconds](const nlohmann::json& args) {
        nlohmann::json body = {{"arguments", args}, {"frames", nlohmann::json::array()}};
        const std::string payload = body.dump();

        httplib::Client client(base_url);
        client.set_connection_timeout(timeout_seconds);
        client.set_read_timeout(timeout_seconds);

        httplib::Result r = client.Post(path, payload, "application/json");
        if (!r) {
            r = client.Post(path, payload, "application/json");  // one retry
        }
        if (!r || r->status != 200) {
            throw IOFailureError("remote tool call failed: " + path);
        }
        const auto doc = nlohmann::json::parse(r->body);
        ToolResult res;
        res.kind = result_kind_from_string(doc.at("kind").get<std::string>());
        res.payload = doc.at("payload");
        res.token_cost = doc.value("token_cost", 0);
        res.provenance = "remote";
        return res;
    };
}

}  // namespace last
