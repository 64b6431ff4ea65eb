#pragma once

// Deterministic synthetic targets and scenes for demos, benchmarks and the
// pruning-strategy comparison corpus.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "alv/scene.hpp"

namespace alv::synthetic {

// Full-canvas opaque horizontal gradient; mask covers everything.
LayerTarget gradient_target(int width, int height, const std::array<double, 3>& left,
                            const std::array<double, 3>& right, std::string layer_id);

// Anti-aliased opaque disk on a transparent ground.
LayerTarget disk_target(int width, int height, Vec2 center, double radius,
                        const std::array<double, 3>& rgb, std::string layer_id);

// Anti-aliased opaque star polygon on a transparent ground.
LayerTarget star_target(int width, int height, Vec2 center, double r_outer, double r_inner,
                        int points, const std::array<double, 3>& rgb, std::string layer_id);

// The bundled desk-scale document: background gradient, occluding disk,
// occluding star, 128 x 128.
std::vector<LayerTarget> three_layer_fixture();

// Writes the fixture as manifest + PNG rasters (plus composite.png, the
// white-composited reference) into `dir`; returns the manifest path.
std::filesystem::path write_three_layer_fixture(const std::filesystem::path& dir);

// Uniform random blobs (for algebra/property tests).
LayerVector random_blob_layer(uint64_t seed, int count, int width, int height,
                              double opacity_min = 0.2, double opacity_max = 1.0,
                              double radius_min = 2.0, double radius_max = 6.0);

// Structured scene for pruning comparisons: plants fully occluded primitives
// (junk under opaque covers), small visible details, and translucent washes,
// so the heuristics' failure modes are actually exercised.
LayerVector prune_comparison_scene(uint64_t seed, int count, int width, int height);

// Fixed-size blobs for the complexity scaling benchmark.
LayerVector bench_scene(uint64_t seed, int count, int width, int height, double radius);

}  // namespace alv::synthetic
