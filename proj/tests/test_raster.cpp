#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alv/raster.hpp"
#include "alv/synthetic.hpp"
#include "support.hpp"

using namespace alv;

TEST_CASE("fully transparent primitive has an all-zero alpha map") {
    const PathPrimitive prim = make_seed_primitive({8, 8}, 4, {1, 0, 0, 0});
    const AlphaMap map = primitive_alpha(prim, testutil::rc(16, 16));
    for (double v : map.values.data) CHECK(v == 0.0);
}

TEST_CASE("opaque circle alpha area matches a supersampled hard-coverage oracle") {
    const PathPrimitive prim = make_seed_primitive({32, 32}, 10, {1, 1, 1, 1});
    const AlphaMap map = primitive_alpha(prim, testutil::rc(64, 64));

    double soft_area = 0.0;
    for (double v : map.values.data) soft_area += v;

    // 16x-supersampled hard coverage of the underlying circle.
    double hard_area = 0.0;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            int hits = 0;
            for (int sy = 0; sy < 16; ++sy)
                for (int sx = 0; sx < 16; ++sx) {
                    const double dx = x + (sx + 0.5) / 16.0 - 32.0;
                    const double dy = y + (sy + 0.5) / 16.0 - 32.0;
                    if (dx * dx + dy * dy <= 100.0) ++hits;
                }
            hard_area += hits / 256.0;
        }

    CHECK(std::abs(soft_area - hard_area) <= 0.02 * hard_area);
    CHECK(std::abs(soft_area - M_PI * 100.0) <= 0.02 * M_PI * 100.0);
}

TEST_CASE("circle outside the canvas renders nothing") {
    const PathPrimitive prim = make_seed_primitive({-40, -40}, 5, {1, 0, 0, 1});
    const AlphaMap map = primitive_alpha(prim, testutil::rc(16, 16));
    for (double v : map.values.data) CHECK(v == 0.0);
}

TEST_CASE("degenerate path yields a zero map with a flag, not an error") {
    PathPrimitive prim = make_seed_primitive({8, 8}, 3, {1, 0, 0, 1});
    for (Vec2& p : prim.points) p = {8.0, 8.0};
    const AlphaMap map = primitive_alpha(prim, testutil::rc(16, 16));
    CHECK(map.degenerate);
    for (double v : map.values.data) CHECK(v == 0.0);
}

TEST_CASE("alpha vanishes outside the smoothing-dilated bounding box") {
    const double s = 1.0;
    const PathPrimitive prim = make_seed_primitive({16, 16}, 5, {1, 0, 0, 1});
    BBox bb = prim.control_bounds();
    const AlphaMap map = primitive_alpha(prim, testutil::rc(32, 32, s));
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const double cx = x + 0.5, cy = y + 0.5;
            if (cx < bb.min_x - s || cx > bb.max_x + s || cy < bb.min_y - s ||
                cy > bb.max_y + s)
                CHECK(map.values.at(x, y) == 0.0);
        }
}

TEST_CASE("empty layer composites to zero alpha") {
    const RenderOutput out = composite(LayerVector{}, testutil::rc(8, 8));
    for (double v : out.alpha.data) CHECK(v == 0.0);
}

TEST_CASE("one opaque full-canvas path gives flat color away from the boundary band") {
    const PathPrimitive prim = make_seed_primitive({8, 8}, 40, {0.2, 0.5, 0.9, 1.0});
    const RenderOutput out = composite({{prim}, "l"}, testutil::rc(16, 16));
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            CHECK(out.alpha.at(x, y) == 1.0);
            CHECK(out.rgb.at(x, y, 0) == doctest::Approx(0.2));
            CHECK(out.rgb.at(x, y, 2) == doctest::Approx(0.9));
        }
}

TEST_CASE("composite matches the per-pixel painter-loop reference") {
    for (uint64_t seed : {1u, 2u, 3u}) {
        const LayerVector layer = synthetic::random_blob_layer(seed, 8, 16, 16, 0.2, 0.9);
        const RenderConfig cfg = testutil::rc(16, 16);
        const RenderOutput fast = composite(layer, cfg);
        const RenderOutput ref = serial_ref::composite(layer, cfg);
        for (size_t k = 0; k < fast.alpha.data.size(); ++k)
            CHECK(fast.alpha.data[k] == doctest::Approx(ref.alpha.data[k]).epsilon(1e-6));
        for (size_t k = 0; k < fast.rgb.data.size(); ++k)
            CHECK(std::abs(fast.rgb.data[k] - ref.rgb.data[k]) < 1e-6);
    }
}

TEST_CASE("topmost occlusion field is identically zero") {
    const LayerVector layer = synthetic::random_blob_layer(5, 6, 16, 16);
    const auto fields = cumulative_occlusion(layer, testutil::rc(16, 16));
    for (double v : fields.back().values.data) CHECK(v == 0.0);
}

TEST_CASE("opaque top saturates the occlusion of the one below") {
    LayerVector layer{{make_seed_primitive({8, 8}, 3, {1, 0, 0, 1}),
                       make_seed_primitive({8, 8}, 6, {0, 1, 0, 1})},
                      "l"};
    const auto fields = cumulative_occlusion(layer, testutil::rc(16, 16));
    // Interior of the small bottom primitive lies under the opaque top.
    for (int y = 7; y <= 9; ++y)
        for (int x = 7; x <= 9; ++x) CHECK(fields[0].values.at(x, y) == 1.0);
}

TEST_CASE("occlusion recursion equals the closed-form product") {
    for (uint64_t seed : {10u, 11u, 12u}) {
        const LayerVector layer = synthetic::random_blob_layer(seed, 12, 16, 16, 0.2, 0.95);
        const RenderConfig cfg = testutil::rc(16, 16);
        const auto fields = cumulative_occlusion(layer, cfg);
        const auto ref = serial_ref::cumulative_occlusion(layer, cfg);
        for (size_t i = 0; i < fields.size(); ++i)
            for (size_t k = 0; k < fields[i].values.data.size(); ++k)
                CHECK(std::abs(fields[i].values.data[k] - ref[i].values.data[k]) < 1e-6);
        // Monotone non-decreasing with depth.
        for (size_t i = 1; i < fields.size(); ++i)
            for (size_t k = 0; k < fields[i].values.data.size(); ++k)
                CHECK(fields[i - 1].values.data[k] >= fields[i].values.data[k] - 1e-12);
    }
}

TEST_CASE("contribution of an isolated primitive equals its alpha area") {
    const LayerVector layer{{make_seed_primitive({8, 8}, 4, {1, 0, 0, 1})}, "l"};
    const RenderConfig cfg = testutil::rc(16, 16);
    const auto scores = contribution_scores(layer, cfg);
    const auto areas = alpha_area_scores(layer, cfg);
    CHECK(std::abs(scores[0] - areas[0]) < 1e-6);
}

TEST_CASE("fully covered primitive contributes nothing") {
    const LayerVector layer{{make_seed_primitive({8, 8}, 3, {1, 0, 0, 1}),
                             make_seed_primitive({8, 8}, 7, {0, 1, 0, 1})},
                            "l"};
    const auto scores = contribution_scores(layer, testutil::rc(16, 16));
    CHECK(scores[0] == 0.0);
    CHECK(scores[1] > 0.0);
}

TEST_CASE("conservation: visible contributions sum to composite alpha per pixel") {
    for (uint64_t seed : {21u, 22u}) {
        const LayerVector layer = synthetic::random_blob_layer(seed, 10, 16, 16, 0.2, 0.95);
        const RenderConfig cfg = testutil::rc(16, 16);
        const auto fields = cumulative_occlusion(layer, cfg);
        const RenderOutput out = composite(layer, cfg);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                double sum = 0.0;
                for (size_t i = 0; i < layer.primitives.size(); ++i) {
                    const AlphaMap am = primitive_alpha(layer.primitives[i], cfg);
                    sum += am.values.at(x, y) * (1.0 - fields[i].values.at(x, y));
                }
                CHECK(std::abs(sum - out.alpha.at(x, y)) < 1e-6);
            }
    }
}

TEST_CASE("permuting overlapping primitives changes the render, disjoint ones do not") {
    const RenderConfig cfg = testutil::rc(24, 24);
    SUBCASE("overlapping, different colors") {
        LayerVector a{{make_seed_primitive({10, 10}, 5, {1, 0, 0, 0.8}),
                       make_seed_primitive({13, 10}, 5, {0, 0, 1, 0.8})},
                      "l"};
        LayerVector b = a;
        std::swap(b.primitives[0], b.primitives[1]);
        const RenderOutput ra = composite(a, cfg), rb = composite(b, cfg);
        double diff = 0.0;
        for (size_t k = 0; k < ra.rgb.data.size(); ++k)
            diff = std::max(diff, std::abs(ra.rgb.data[k] - rb.rgb.data[k]));
        CHECK(diff > 1e-3);
    }
    SUBCASE("disjoint") {
        LayerVector a{{make_seed_primitive({6, 6}, 3, {1, 0, 0, 0.8}),
                       make_seed_primitive({18, 18}, 3, {0, 0, 1, 0.8})},
                      "l"};
        LayerVector b = a;
        std::swap(b.primitives[0], b.primitives[1]);
        const RenderOutput ra = composite(a, cfg), rb = composite(b, cfg);
        for (size_t k = 0; k < ra.rgb.data.size(); ++k)
            CHECK(std::abs(ra.rgb.data[k] - rb.rgb.data[k]) < 1e-9);
        for (size_t k = 0; k < ra.alpha.data.size(); ++k)
            CHECK(std::abs(ra.alpha.data[k] - rb.alpha.data[k]) < 1e-9);
    }
}

TEST_CASE("opaque scene with tiny smoothing: contribution equals top-of-stack pixel count") {
    const RenderConfig cfg = testutil::rc(32, 32, 0.05);
    const LayerVector layer = synthetic::random_blob_layer(31, 6, 32, 32, 1.0, 1.0, 4.0, 9.0);
    const auto scores = contribution_scores(layer, cfg);

    // Hard top-of-stack oracle at pixel centers.
    std::vector<FlatPath> flats;
    for (const auto& p : layer.primitives) flats.push_back(flatten_path(p, 32));
    std::vector<long long> counts(layer.primitives.size(), 0);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            for (int i = static_cast<int>(layer.primitives.size()) - 1; i >= 0; --i) {
                if (polyline_winding(flats[i].verts, {x + 0.5, y + 0.5}) != 0) {
                    ++counts[i];
                    break;
                }
            }
        }
    for (size_t i = 0; i < scores.size(); ++i)
        CHECK(std::abs(scores[i] - counts[i]) <= std::max(0.02 * counts[i], 1.0));
}

TEST_CASE("parallel kernels agree with the serial reference") {
    const LayerVector layer = synthetic::random_blob_layer(77, 10, 24, 24, 0.3, 1.0);
    const RenderConfig cfg = testutil::rc(24, 24);
    const auto fast_scores = contribution_scores(layer, cfg);
    const auto ref_scores = serial_ref::contribution_scores(layer, cfg);
    for (size_t i = 0; i < fast_scores.size(); ++i)
        CHECK(fast_scores[i] == doctest::Approx(ref_scores[i]).epsilon(1e-9));

    const AlphaMap fast_map = primitive_alpha(layer.primitives[0], cfg);
    const AlphaMap ref_map = serial_ref::primitive_alpha(layer.primitives[0], cfg);
    for (size_t k = 0; k < fast_map.values.data.size(); ++k)
        CHECK(std::abs(fast_map.values.data[k] - ref_map.values.data[k]) < 1e-12);
}
