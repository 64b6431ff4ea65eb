#pragma once

#include <vector>

#include "alv/image.hpp"
#include "alv/scene.hpp"

namespace alv {

struct RenderConfig {
    int width = 0;
    int height = 0;
    double smoothing = 1.0;    // boundary transition band width, pixels
    int flatten_samples = 32;  // polyline vertices per cubic segment

    RenderConfig() = default;
    RenderConfig(int w, int h, double s = 1.0) : width(w), height(h), smoothing(s) {}
};

// Per-primitive alpha: fill_opacity * soft coverage, H x W.
struct AlphaMap {
    ImageF values;  // H x W x 1
    int primitive_index = -1;
    bool degenerate = false;
};

// Aggregate opacity of all primitives overlying the one at depth_index.
struct OcclusionField {
    ImageF values;  // H x W x 1
    int depth_index = -1;
};

struct RenderOutput {
    ImageF rgb;    // H x W x 3, straight (non-premultiplied)
    ImageF alpha;  // H x W x 1, composite coverage
};

AlphaMap primitive_alpha(const PathPrimitive& prim, const RenderConfig& cfg);

// Back-to-front over-compositing onto a transparent canvas.
RenderOutput composite(const LayerVector& layer, const RenderConfig& cfg);

// One field per primitive; the topmost field is identically zero and the
// recursion O_below = O + alpha * (1 - O) is applied top to bottom, rendering
// each primitive's alpha exactly once.
std::vector<OcclusionField> cumulative_occlusion(const LayerVector& layer,
                                                 const RenderConfig& cfg);

// Visible alpha area per primitive: C_i = sum_p alpha_i(p) * (1 - O_i(p)),
// computed in a single top-to-bottom pass.
std::vector<double> contribution_scores(const LayerVector& layer, const RenderConfig& cfg);

// Raw alpha area per primitive (occlusion ignored): sum_p alpha_i(p).
std::vector<double> alpha_area_scores(const LayerVector& layer, const RenderConfig& cfg);

// Straightforward single-threaded reference implementations.  These share
// only the flattening geometry with the production kernels; coverage,
// winding, compositing and scoring are all recomputed per pixel the naive
// way.  Kept as the test oracle and as the baseline for the kernel benchmark.
namespace serial_ref {

AlphaMap primitive_alpha(const PathPrimitive& prim, const RenderConfig& cfg);

// Per-pixel sequential painter loop, no spatial batching.
RenderOutput composite(const LayerVector& layer, const RenderConfig& cfg);

// Closed-form product: O_i(p) = 1 - prod_{j>i} (1 - alpha_j(p)).
std::vector<OcclusionField> cumulative_occlusion(const LayerVector& layer,
                                                 const RenderConfig& cfg);

std::vector<double> contribution_scores(const LayerVector& layer, const RenderConfig& cfg);

}  // namespace serial_ref

}  // namespace alv
