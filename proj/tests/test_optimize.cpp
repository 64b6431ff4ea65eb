#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alv/errors.hpp"
#include "alv/optimize.hpp"
#include "alv/raster.hpp"
#include "support.hpp"

using namespace alv;

namespace {

LayerTarget flat_target(int w, int h, std::array<double, 3> rgb, const MaskImage& mask) {
    ImageF img(w, h, 4, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[c];
            img.at(x, y, 3) = mask.at(x, y) ? 1.0 : 0.0;
        }
    return make_layer_target(std::move(img), mask, "flat");
}

}  // namespace

TEST_CASE("perfect fit yields zero loss") {
    // Target := the render of the layer composited over the gray reference.
    const LayerVector layer{{make_seed_primitive({8, 8}, 4, {0.8, 0.3, 0.1, 1.0})}, "l"};
    const RenderConfig rc = testutil::rc(16, 16);
    const RenderOutput out = composite(layer, rc);
    ImageF img(16, 16, 4, 1.0);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const double a = out.alpha.at(x, y);
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = out.rgb.at(x, y, c) * a + 0.5 * (1.0 - a);
        }
    const LayerTarget target = make_layer_target(std::move(img), MaskImage(16, 16, 1), "l");
    const LossBreakdown loss = compute_loss(layer, target, LossConfig{});
    CHECK(loss.recon == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(loss.mask == 0.0);
    CHECK(loss.total == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("empty layer against a black-inside-mask target: hand-computed 2x2 value") {
    MaskImage mask(2, 2, 0);
    mask.at(0, 0) = mask.at(0, 1) = 1;  // mask covers half the canvas
    const LayerTarget target = flat_target(2, 2, {0, 0, 0}, mask);
    const LossBreakdown loss = compute_loss(LayerVector{}, target, LossConfig{});
    // Inside the mask the empty render shows the gray reference (0.5) against
    // black: 2 pixels * 3 channels * 0.25, averaged over 4 pixels * 3 channels.
    CHECK(loss.recon == doctest::Approx(2.0 * 3.0 * 0.25 / 12.0).epsilon(1e-12));
    CHECK(loss.mask == 0.0);
    CHECK(loss.total == doctest::Approx(loss.recon).epsilon(1e-12));
}

TEST_CASE("opaque coverage outside the mask: mask term is m / (H*W)") {
    MaskImage mask(8, 8, 0);
    for (int y = 0; y < 8; ++y) mask.at(0, y) = 1;  // mask is one column
    const LayerTarget target = flat_target(8, 8, {0.5, 0.5, 0.5}, mask);
    // Full-canvas opaque primitive: unit alpha everywhere, m = 56 pixels outside.
    const LayerVector layer{{make_seed_primitive({4, 4}, 30, {0.5, 0.5, 0.5, 1.0})}, "l"};
    const LossBreakdown loss = compute_loss(layer, target, LossConfig{});
    CHECK(loss.mask == doctest::Approx(56.0 / 64.0).epsilon(1e-12));
}

TEST_CASE("loss rejects mismatched dimensions") {
    LayerTarget target;
    target.image = ImageF(4, 4, 4, 0.0);
    target.mask = MaskImage(3, 4, 1);
    target.layer_id = "bad";
    CHECK_THROWS_AS(compute_loss(LayerVector{}, target, LossConfig{}), validation_error);
}

TEST_CASE("color gradient of a fully occluded primitive is zero") {
    const LayerVector layer{{make_seed_primitive({12, 12}, 3, {0.9, 0.1, 0.1, 1.0}),
                             make_seed_primitive({12, 12}, 7, {0.1, 0.9, 0.1, 1.0})},
                            "l"};
    const LayerTarget target = testutil::noise_target(4, 24, 24);
    LayerGradients grads;
    compute_gradients(layer, target, LossConfig{}, grads);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(grads.colors[c]) < 1e-8);
}

TEST_CASE("analytic gradients match central finite differences") {
    int failed = 0, checked = 0;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        const LayerVector layer = testutil::fd_scene(100 + seed, 3, 24, 24);
        const LayerTarget target = testutil::noise_target(200 + seed, 24, 24);
        const auto rep = testutil::finite_difference_check(layer, target, LossConfig{}, 1e-3,
                                                           1e-4);
        failed += rep.failed;
        checked += rep.checked;
    }
    CHECK(checked == 10 * (3 * 24 + 12));
    CHECK(failed == 0);
}

TEST_CASE("radially symmetric scene has no net translation gradient") {
    const int n = 25;
    const Vec2 center{12.5, 12.5};
    const LayerVector layer{{make_seed_primitive(center, 6, {0.8, 0.2, 0.2, 1.0})}, "l"};
    ImageF img(n, n, 4, 1.0);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double d = norm(Vec2{x + 0.5, y + 0.5} - center);
            const double v = std::clamp(8.0 - d, 0.0, 1.0);
            img.at(x, y, 0) = v;
            img.at(x, y, 1) = 0.3 * v;
            img.at(x, y, 2) = 0.3 * v;
        }
    const LayerTarget target = make_layer_target(std::move(img), MaskImage(n, n, 1), "sym");
    LayerGradients grads;
    compute_gradients(layer, target, LossConfig{}, grads);
    double net_x = 0.0, net_y = 0.0;
    for (size_t k = 0; k < grads.points.size(); k += 2) {
        net_x += grads.points[k];
        net_y += grads.points[k + 1];
    }
    CHECK(std::abs(net_x) < 1e-5);
    CHECK(std::abs(net_y) < 1e-5);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
    LayerVector layer = testutil::fd_scene(7, 2, 16, 16);
    const LayerVector before = layer;
    OptimizerState opt(layer, OptimizerConfig{});
    LayerGradients grads;
    grads.points.assign(2 * 2 * 12, 0.0);
    grads.colors.assign(2 * 4, 0.0);
    opt.step(layer, grads);
    for (size_t i = 0; i < layer.primitives.size(); ++i)
        for (size_t p = 0; p < layer.primitives[i].points.size(); ++p) {
            CHECK(std::abs(layer.primitives[i].points[p].x - before.primitives[i].points[p].x) <
                  1e-12);
            CHECK(std::abs(layer.primitives[i].points[p].y - before.primitives[i].points[p].y) <
                  1e-12);
        }
}

TEST_CASE("constant positive gradient drives a monotone decrease") {
    LayerVector layer{{make_seed_primitive({8, 8}, 3, {0.5, 0.5, 0.5, 1.0})}, "l"};
    OptimizerConfig cfg;
    cfg.total_steps = 100;
    OptimizerState opt(layer, cfg);
    double prev = layer.primitives[0].points[0].x;
    for (int it = 0; it < 100; ++it) {
        LayerGradients grads;
        grads.points.assign(24, 0.0);
        grads.colors.assign(4, 0.0);
        grads.points[0] = 1.0;  // d(loss)/dx > 0 pushes x down
        opt.step(layer, grads);
        CHECK(layer.primitives[0].points[0].x < prev);
        prev = layer.primitives[0].points[0].x;
    }
}

TEST_CASE("learning rate decays linearly to the configured ratio") {
    LayerVector layer{{make_seed_primitive({4, 4}, 2, {0, 0, 0, 1})}, "l"};
    OptimizerConfig cfg;
    cfg.total_steps = 137;
    OptimizerState opt(layer, cfg);
    CHECK(opt.current_lr_points() == doctest::Approx(cfg.lr_points).epsilon(1e-12));
    LayerGradients grads;
    grads.points.assign(24, 0.0);
    grads.colors.assign(4, 0.0);
    double prev_lr = 1e300;
    for (int it = 0; it < 137; ++it) {
        opt.step(layer, grads);
        CHECK(opt.current_lr_points() <= prev_lr);
        prev_lr = opt.current_lr_points();
    }
    CHECK(std::abs(opt.current_lr_points() - 0.4 * cfg.lr_points) < 1e-9);
    CHECK(std::abs(opt.current_lr_colors() - 0.4 * cfg.lr_colors) < 1e-9);
}

TEST_CASE("optimizer rejects mismatched gradient shapes") {
    LayerVector layer{{make_seed_primitive({4, 4}, 2, {0, 0, 0, 1})}, "l"};
    OptimizerState opt(layer, OptimizerConfig{});
    LayerGradients grads;
    grads.points.assign(10, 0.0);
    grads.colors.assign(4, 0.0);
    CHECK_THROWS_AS(opt.step(layer, grads), validation_error);
}

TEST_CASE("colors and opacity stay clamped to [0,1] under violent gradients") {
    LayerVector layer = testutil::fd_scene(13, 3, 16, 16);
    OptimizerState opt(layer, OptimizerConfig{});
    Rng rng(5);
    size_t n_points = 0;
    for (const auto& p : layer.primitives) n_points += p.points.size();
    for (int it = 0; it < 40; ++it) {
        LayerGradients grads;
        grads.points.assign(n_points * 2, 0.0);
        grads.colors.resize(layer.primitives.size() * 4);
        for (double& g : grads.colors) g = rng.uniform(-50.0, 50.0);
        opt.step(layer, grads);
        for (const PathPrimitive& prim : layer.primitives) {
            for (double c : prim.fill_rgb) {
                CHECK(c >= 0.0);
                CHECK(c <= 1.0);
            }
            CHECK(prim.fill_opacity >= 0.0);
            CHECK(prim.fill_opacity <= 1.0);
        }
    }
}

TEST_CASE("descent sanity: color fit with frozen geometry cuts loss by 90%") {
    // Full-canvas primitive so the color mismatch is the whole loss.
    LayerVector layer{{make_seed_primitive({12, 12}, 40, {0.9, 0.9, 0.9, 1.0})}, "l"};
    MaskImage mask(24, 24, 1);
    const LayerTarget target = flat_target(24, 24, {0.1, 0.4, 0.7}, mask);
    OptimizerConfig cfg;
    cfg.total_steps = 200;
    cfg.lr_points = 0.0;  // geometry frozen
    OptimizerState opt(layer, cfg);
    const double initial = compute_loss(layer, target, LossConfig{}).total;
    LayerGradients grads;
    for (int it = 0; it < 200; ++it) {
        compute_gradients(layer, target, LossConfig{}, grads);
        opt.step(layer, grads);
    }
    const double final_loss = compute_loss(layer, target, LossConfig{}).total;
    CHECK(final_loss <= 0.1 * initial);
}

TEST_CASE("geometrically collapsed primitives get no point gradients") {
    LayerVector layer = testutil::fd_scene(19, 2, 20, 20);
    // shrink primitive 0 to sub-half-pixel area
    Vec2 c{10, 10};
    for (Vec2& p : layer.primitives[0].points) p = {c.x + (p.x - c.x) * 1e-4, c.y};
    const LayerTarget target = testutil::noise_target(23, 20, 20);
    LayerGradients grads;
    compute_gradients(layer, target, LossConfig{}, grads);
    const size_t n0 = layer.primitives[0].points.size() * 2;
    for (size_t k = 0; k < n0; ++k) CHECK(grads.points[k] == 0.0);
    double mag1 = 0.0;
    for (size_t k = n0; k < grads.points.size(); ++k) mag1 += std::abs(grads.points[k]);
    CHECK(mag1 > 0.0);
}

TEST_CASE("loss is non-negative and decomposes exactly") {
    for (uint64_t seed : {31u, 32u, 33u}) {
        const LayerVector layer = testutil::fd_scene(seed, 4, 20, 20);
        const LayerTarget target = testutil::noise_target(seed + 50, 20, 20);
        LossConfig cfg;
        cfg.lambda_mask = 0.7;
        const LossBreakdown loss = compute_loss(layer, target, cfg);
        CHECK(loss.recon >= 0.0);
        CHECK(loss.mask >= 0.0);
        CHECK(std::abs(loss.total - (loss.recon + cfg.lambda_mask * loss.mask)) < 1e-9);
    }
}
