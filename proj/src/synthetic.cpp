#include "alv/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "alv/io.hpp"
#include "alv/rng.hpp"

namespace alv::synthetic {

namespace {

// 4x4 supersampled coverage of a polygon (nonzero winding).
double polygon_coverage(const std::vector<Vec2>& poly, int px, int py) {
    int hits = 0;
    for (int sy = 0; sy < 4; ++sy) {
        for (int sx = 0; sx < 4; ++sx) {
            const Vec2 p{px + (sx + 0.5) / 4.0, py + (sy + 0.5) / 4.0};
            if (polyline_winding(poly, p) != 0) ++hits;
        }
    }
    return hits / 16.0;
}

}  // namespace

LayerTarget gradient_target(int width, int height, const std::array<double, 3>& left,
                            const std::array<double, 3>& right, std::string layer_id) {
    ImageF img(width, height, 4, 0.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double t = width > 1 ? static_cast<double>(x) / (width - 1) : 0.0;
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = left[c] + t * (right[c] - left[c]);
            img.at(x, y, 3) = 1.0;
        }
    }
    MaskImage mask(width, height, 1);
    return make_layer_target(std::move(img), std::move(mask), std::move(layer_id));
}

LayerTarget disk_target(int width, int height, Vec2 center, double radius,
                        const std::array<double, 3>& rgb, std::string layer_id) {
    ImageF img(width, height, 4, 0.0);
    MaskImage mask(width, height, 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double d = norm(Vec2{x + 0.5, y + 0.5} - center);
            const double a = std::clamp(radius - d + 0.5, 0.0, 1.0);  // 1px linear edge
            if (a <= 0.0) continue;
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[c];
            img.at(x, y, 3) = a;
            if (a >= 0.5) mask.at(x, y) = 1;
        }
    }
    return make_layer_target(std::move(img), std::move(mask), std::move(layer_id));
}

LayerTarget star_target(int width, int height, Vec2 center, double r_outer, double r_inner,
                        int points, const std::array<double, 3>& rgb, std::string layer_id) {
    std::vector<Vec2> poly;
    for (int k = 0; k < 2 * points; ++k) {
        const double r = (k % 2 == 0) ? r_outer : r_inner;
        const double a = -M_PI / 2.0 + k * M_PI / points;
        poly.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
    }
    ImageF img(width, height, 4, 0.0);
    MaskImage mask(width, height, 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double a = polygon_coverage(poly, x, y);
            if (a <= 0.0) continue;
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[c];
            img.at(x, y, 3) = a;
            if (a >= 0.5) mask.at(x, y) = 1;
        }
    }
    return make_layer_target(std::move(img), std::move(mask), std::move(layer_id));
}

std::vector<LayerTarget> three_layer_fixture() {
    std::vector<LayerTarget> targets;
    targets.push_back(gradient_target(128, 128, {0.20, 0.35, 0.62}, {0.55, 0.68, 0.82},
                                      "background"));
    targets.push_back(disk_target(128, 128, {48.0, 56.0}, 30.0, {0.82, 0.28, 0.20}, "disk"));
    targets.push_back(
        star_target(128, 128, {86.0, 78.0}, 34.0, 14.0, 5, {0.95, 0.80, 0.18}, "star"));
    return targets;
}

std::filesystem::path write_three_layer_fixture(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto targets = three_layer_fixture();
    LayerManifest manifest;
    manifest.canvas_width = 128;
    manifest.canvas_height = 128;
    long long z = 0;
    for (const LayerTarget& t : targets) {
        const std::string image_name = t.layer_id + ".png";
        const std::string mask_name = t.layer_id + "_mask.png";
        save_raster(dir / image_name, t.image);
        ImageF m(t.mask.width, t.mask.height, 1);
        for (size_t k = 0; k < t.mask.values.size(); ++k) m.data[k] = t.mask.values[k];
        save_raster(dir / mask_name, m);
        manifest.entries.push_back({t.layer_id, image_name, mask_name, z++});
    }
    save_raster(dir / "composite.png", compose_targets_rgba(targets));
    const auto manifest_path = dir / "manifest.json";
    save_manifest(manifest_path, manifest);
    return manifest_path;
}

LayerVector random_blob_layer(uint64_t seed, int count, int width, int height,
                              double opacity_min, double opacity_max, double radius_min,
                              double radius_max) {
    Rng rng(seed);
    LayerVector layer;
    layer.layer_id = "random";
    for (int i = 0; i < count; ++i) {
        const Vec2 c{rng.uniform(0.0, width), rng.uniform(0.0, height)};
        const double r = rng.uniform(radius_min, radius_max);
        const Rgba color{rng.uniform(), rng.uniform(), rng.uniform(),
                         rng.uniform(opacity_min, opacity_max)};
        layer.primitives.push_back(make_seed_primitive(c, r, color));
    }
    return layer;
}

LayerVector prune_comparison_scene(uint64_t seed, int count, int width, int height) {
    Rng rng(seed);
    LayerVector layer;
    layer.layer_id = "prune_scene";
    const double w = width, h = height;

    const int n_cover = 2;
    const int n_hidden = std::max(1, count * 35 / 100);
    const int n_detail = std::max(1, count * 20 / 100);
    const int n_wash = std::max(1, count * 15 / 100);
    const int n_mid = std::max(0, count - n_cover - n_hidden - n_detail - n_wash);

    // Opaque covers, chosen first so the junk can be planted underneath.
    std::vector<Vec2> cover_centers;
    std::vector<double> cover_radii;
    for (int i = 0; i < n_cover; ++i) {
        cover_centers.push_back({rng.uniform(0.3 * w, 0.7 * w), rng.uniform(0.3 * h, 0.7 * h)});
        cover_radii.push_back(rng.uniform(0.22 * w, 0.32 * w));
    }

    // Bottom of the stack: primitives that end up fully occluded.
    for (int i = 0; i < n_hidden; ++i) {
        const int k = rng.uniform_int(0, n_cover - 1);
        const double r = rng.uniform(1.5, 0.25 * cover_radii[k]);
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        const double d = rng.uniform(0.0, cover_radii[k] * 0.5 - r);
        const Vec2 c{cover_centers[k].x + std::max(0.0, d) * std::cos(ang),
                     cover_centers[k].y + std::max(0.0, d) * std::sin(ang)};
        layer.primitives.push_back(make_seed_primitive(
            c, std::max(1.5, r), {rng.uniform(), rng.uniform(), rng.uniform(), 1.0}));
    }
    for (int i = 0; i < n_cover; ++i) {
        layer.primitives.push_back(make_seed_primitive(
            cover_centers[i], cover_radii[i],
            {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(0.92, 1.0)}));
    }
    for (int i = 0; i < n_mid; ++i) {
        layer.primitives.push_back(make_seed_primitive(
            {rng.uniform(0.1 * w, 0.9 * w), rng.uniform(0.1 * h, 0.9 * h)},
            rng.uniform(0.08 * w, 0.16 * w),
            {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(0.6, 1.0)}));
    }
    // Small opaque details: area-based pruning's preferred victims.
    for (int i = 0; i < n_detail; ++i) {
        layer.primitives.push_back(make_seed_primitive(
            {rng.uniform(0.05 * w, 0.95 * w), rng.uniform(0.05 * h, 0.95 * h)},
            rng.uniform(1.5, 2.8), {rng.uniform(), rng.uniform(), rng.uniform(), 1.0}));
    }
    // Translucent washes on top: opacity-based pruning's preferred victims.
    for (int i = 0; i < n_wash; ++i) {
        layer.primitives.push_back(make_seed_primitive(
            {rng.uniform(0.2 * w, 0.8 * w), rng.uniform(0.2 * h, 0.8 * h)},
            rng.uniform(0.12 * w, 0.2 * w),
            {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(0.15, 0.4)}));
    }
    return layer;
}

LayerVector bench_scene(uint64_t seed, int count, int width, int height, double radius) {
    Rng rng(seed);
    LayerVector layer;
    layer.layer_id = "bench";
    for (int i = 0; i < count; ++i) {
        layer.primitives.push_back(make_seed_primitive(
            {rng.uniform(0.0, width), rng.uniform(0.0, height)}, radius,
            {rng.uniform(), rng.uniform(), rng.uniform(), 0.6}));
    }
    return layer;
}

}  // namespace alv::synthetic
