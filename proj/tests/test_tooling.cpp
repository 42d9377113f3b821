// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <thread>

#include "last/tooling.hpp"
#include "test_util.hpp"

#include <httplib.h>

using namespace last;

namespace {

MockFixture sofa_fixture() {
    nlohmann::json doc = {
        {"object_tracking",
         {{"sofa",
           {{{"frame", 0}, {"cx", 10}, {"cy", 10}, {"object_id", 0}},
            {{"frame", 1}, {"cx", 40}, {"cy", 12}, {"object_id", 0}},
            {{"frame", 1}, {"cx", 100}, {"cy", 80}, {"object_id", 1}}}}}},
        {"temporal_grounding", {{"sofa scene", {0.5, 1.5}}}},
        {"image_grounding", {{"sofa", {{"bbox", {20, 20, 60, 40}}, {"score", 0.9}}}}},
        {"depth_estimation", {{"sofa", {{"relative_depth", 0.42}}}}},
    };
    return MockFixture::parse(doc);
}

ScenarioContext sofa_context() {
    ScenarioContext ctx;
    ctx.manifest = last::testing::synthetic_manifest(20, 10.0, 224, 224);
    std::mt19937 rng(71);
    ctx.frame_embeddings = last::testing::random_unit_frames(rng, 20, 8);
    ctx.query_embedding = last::testing::random_unit_vector(rng, 8);
    ctx.selection.k = 4;
    return ctx;
}

}  // namespace

TEST_CASE("registry rejects duplicate names and unknown dispatch") {
    ToolRegistry registry;
    auto specs = standard_tool_specs();
    registry.register_tool(specs[5], [](const nlohmann::json&) { return ToolResult{}; });
    CHECK_THROWS_AS(
        registry.register_tool(specs[5], [](const nlohmann::json&) { return ToolResult{}; }),
        DuplicateToolError);
    CHECK_THROWS_AS(registry.dispatch({"no_such_tool", nlohmann::json::object(), 0}),
                    MalformedCallError);
}

TEST_CASE("registry covers all six tool categories") {
    const auto registry = make_mock_registry(sofa_fixture(), sofa_context());
    const auto names = registry.names();
    CHECK(names == std::vector<std::string>{"depth_estimation", "frame_selection",
                                            "image_grounding", "object_tracking",
                                            "temporal_grounding", "zoom"});
}

TEST_CASE("dispatch validates argument schemas") {
    const auto registry = make_mock_registry(sofa_fixture(), sofa_context());
    CHECK_THROWS_AS(registry.dispatch({"zoom", {{"frame", 0}}, 0}), MalformedCallError);
    CHECK_THROWS_AS(registry.dispatch({"zoom", {{"frame", "zero"}, {"bbox", {0, 0, 4, 4}}}, 0}),
                    MalformedCallError);
    CHECK_NOTHROW(registry.dispatch({"zoom", {{"frame", 0}, {"bbox", {0, 0, 4, 4}}}, 0}));
}

TEST_CASE("overlay_markers: empty track list leaves frames unchanged") {
    std::vector<Image> frames = {Image::solid(32, 32, {0, 0, 0})};
    const auto out = overlay_markers(frames, {});
    CHECK(out[0].rgb == frames[0].rgb);
}

TEST_CASE("overlay_markers recolors exactly the marker disk") {
    std::vector<Image> frames = {Image::solid(224, 224, {7, 7, 7})};
    Annotation a;
    a.frame_index = 0;
    a.center_x = 10;
    a.center_y = 10;
    a.radius = 4;
    a.object_id = 0;
    const auto out = overlay_markers(frames, {a});
    const Rgb color = marker_color(0);
    for (int y = 0; y < 224; ++y) {
        for (int x = 0; x < 224; ++x) {
            const double dist = std::hypot(x - 10.0, y - 10.0);
            if (dist <= 4.0) {
                CHECK(out[0].at(x, y) == color);
            } else {
                CHECK(out[0].at(x, y) == Rgb{7, 7, 7});
            }
        }
    }
}

TEST_CASE("overlay_markers: two objects get two stable colors") {
    std::vector<Image> frames = {Image::solid(64, 64, {0, 0, 0}),
                                 Image::solid(64, 64, {0, 0, 0})};
    std::vector<Annotation> tracks = {
        {0, 10, 10, 4, 0, "a"}, {0, 40, 40, 4, 1, "b"},
        {1, 12, 10, 4, 0, "a"}, {1, 42, 40, 4, 1, "b"}};
    const auto out = overlay_markers(frames, tracks);
    CHECK(marker_color(0) != marker_color(1));
    CHECK(out[0].at(10, 10) == marker_color(0));
    CHECK(out[0].at(40, 40) == marker_color(1));
    CHECK(out[1].at(12, 10) == marker_color(0));
    CHECK(out[1].at(42, 40) == marker_color(1));
}

TEST_CASE("overlay_markers rejects out-of-bounds centers") {
    std::vector<Image> frames = {Image::solid(16, 16, {0, 0, 0})};
    Annotation a;
    a.frame_index = 0;
    a.center_x = 20;
    a.center_y = 4;
    CHECK_THROWS_AS(overlay_markers(frames, {a}), OutOfBoundsError);
}

TEST_CASE("trim_segment: identity, single frame, and range scan") {
    const auto m = last::testing::synthetic_manifest(10, 2.0);  // ts 0.0 .. 4.5
    const auto whole = trim_segment(m, 0.0, m.duration);
    CHECK(whole.frames.size() == 10);

    const auto one = trim_segment(m, 1.49, 1.51);
    REQUIRE(one.frames.size() == 1);
    CHECK(one.frames[0].index == 3);  // ts 1.5

    const auto mid = trim_segment(m, 2.0, 5.0);
    std::vector<int> got;
    for (const auto& f : mid.frames) got.push_back(f.index);
    std::vector<int> expected;
    for (const auto& f : m.frames) {
        if (f.timestamp >= 2.0 && f.timestamp <= 5.0) expected.push_back(f.index);
    }
    CHECK(got == expected);

    CHECK_THROWS_AS(trim_segment(m, 4.6, 4.7), EmptySegmentError);
}

TEST_CASE("trim_segment is idempotent") {
    const auto m = last::testing::synthetic_manifest(10, 2.0);
    const auto once = trim_segment(m, 1.0, 3.0);
    const auto twice = trim_segment(once, 1.0, 3.0);
    CHECK(serialize_manifest(once) == serialize_manifest(twice));
}

TEST_CASE("zoom: full frame, 1x1, and budget-respecting crops") {
    const Image frame = Image::solid(100, 80, {1, 2, 3});
    const Image full = zoom(frame, {0, 0, 100, 80});
    CHECK(full.width == 100);
    CHECK(full.height == 80);
    CHECK(full.rgb == frame.rgb);

    const Image tiny = zoom(frame, {5, 5, 1, 1});
    CHECK(tiny.width == 1);
    CHECK(tiny.height == 1);

    const Image big = Image::solid(600, 500, {9, 9, 9});
    const Image crop = zoom(big, {10, 20, 500, 400});
    CHECK(static_cast<long long>(crop.width) * crop.height < 50176);

    CHECK_THROWS_AS(zoom(frame, {90, 0, 20, 20}), OutOfBoundsError);
}

TEST_CASE("mock backends replay the fixture verbatim") {
    const auto fixture = sofa_fixture();
    const auto anns = mock_tracker(fixture, "sofa");
    REQUIRE(anns.size() == 3);
    CHECK(anns[0].center_x == 10);
    CHECK(anns[2].object_id == 1);
    CHECK(anns[0].radius == 4);

    const auto [t0, t1] = mock_temporal(fixture, "sofa scene");
    CHECK(t0 == doctest::Approx(0.5));
    CHECK(t1 == doctest::Approx(1.5));

    CHECK(mock_grounder(fixture, "sofa").at("score") == doctest::Approx(0.9));
    CHECK_THROWS_AS(mock_tracker(fixture, "basket"), UnknownLabelError);
}

TEST_CASE("mock dispatch is deterministic including token cost") {
    const auto registry = make_mock_registry(sofa_fixture(), sofa_context());
    const ToolCall call{"object_tracking", {{"object", "sofa"}}, 0};
    const auto a = registry.dispatch(call);
    const auto b = registry.dispatch(call);
    CHECK(a.payload == b.payload);
    CHECK(a.token_cost == b.token_cost);
    CHECK(a.token_cost > 0);
    CHECK(a.provenance == "mock");
}

TEST_CASE("frame_selection tool equals the library path") {
    const auto ctx = sofa_context();
    const auto registry = make_mock_registry(sofa_fixture(), ctx);
    const auto result = registry.dispatch({"frame_selection", {{"k", 4}}, 0});

    const auto direct = select_frames(ctx.query_embedding, ctx.frame_embeddings, ctx.selection);
    CHECK(result.payload.at("indices").get<std::vector<int>>() == direct.presented_indices);
    CHECK(result.payload.at("selection_order").get<std::vector<int>>() == direct.indices);
}

TEST_CASE("temporal grounding tool trims through the manifest") {
    const auto registry = make_mock_registry(sofa_fixture(), sofa_context());
    const auto result = registry.dispatch({"temporal_grounding", {{"query", "sofa scene"}}, 0});
    // manifest at 10 fps: timestamps 0.5..1.5 are frames 5..15
    const auto indices = result.payload.at("indices").get<std::vector<int>>();
    CHECK(indices.front() == 5);
    CHECK(indices.back() == 15);
}

TEST_CASE("remote backend round-trips through an HTTP tool server") {
    httplib::Server server;
    server.Post("/tools/zoom", [](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json reply = {{"kind", "cropped_image"},
                                {"payload", {{"echo", body.at("arguments")}}},
                                {"token_cost", 12}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const auto spec = standard_tool_specs()[5];
    REQUIRE(spec.name == "zoom");
    auto backend = make_remote_backend("http://127.0.0.1:" + std::to_string(port), spec, 5);
    const auto result = backend({{"frame", 0}, {"bbox", {0, 0, 4, 4}}});
    CHECK(result.kind == ResultKind::cropped_image);
    CHECK(result.token_cost == 12);
    CHECK(result.provenance == "remote");
    CHECK(result.payload.at("echo").at("frame") == 0);

    server.stop();
    thread.join();
}
