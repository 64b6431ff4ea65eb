#include "alv/raster.hpp"

#include <algorithm>
#include <cmath>

#include "alv/errors.hpp"
#include "coverage.hpp"

namespace alv {

namespace {

void validate_canvas(const RenderConfig& cfg) {
    if (cfg.width <= 0 || cfg.height <= 0)
        throw validation_error("canvas dimensions must be positive");
    if (!(cfg.smoothing > 0.0)) throw validation_error("smoothing must be positive");
}

}  // namespace

AlphaMap primitive_alpha(const PathPrimitive& prim, const RenderConfig& cfg) {
    validate_canvas(cfg);
    AlphaMap map;
    map.values = ImageF(cfg.width, cfg.height, 1, 0.0);
    detail::CoverageTile tile = detail::rasterize_coverage(prim, cfg, false);
    map.degenerate = tile.degenerate;
    if (tile.empty()) return map;
    const double op = prim.fill_opacity;
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < tile.h; ++iy) {
        for (int ix = 0; ix < tile.w; ++ix) {
            map.values.at(tile.x0 + ix, tile.y0 + iy) = op * tile.cov_at_local(ix, iy);
        }
    }
    return map;
}

RenderOutput composite(const LayerVector& layer, const RenderConfig& cfg) {
    validate_canvas(cfg);
    const int W = cfg.width, H = cfg.height;
    RenderOutput out;
    out.rgb = ImageF(W, H, 3, 0.0);
    out.alpha = ImageF(W, H, 1, 0.0);
    const auto tiles = detail::rasterize_layer(layer, cfg, false);

    // Premultiplied accumulation, back to front.  Parallel over row stripes;
    // within a stripe primitives are applied in z order.
    ImageF premult(W, H, 3, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < H; ++y) {
        for (size_t i = 0; i < tiles.size(); ++i) {
            const detail::CoverageTile& tile = tiles[i];
            if (tile.empty() || y < tile.y0 || y >= tile.y0 + tile.h) continue;
            const PathPrimitive& prim = layer.primitives[i];
            const double op = prim.fill_opacity;
            const int iy = y - tile.y0;
            for (int ix = 0; ix < tile.w; ++ix) {
                const double a = op * tile.cov_at_local(ix, iy);
                if (a == 0.0) continue;
                const int x = tile.x0 + ix;
                const double keep = 1.0 - a;
                premult.at(x, y, 0) = premult.at(x, y, 0) * keep + prim.fill_rgb[0] * a;
                premult.at(x, y, 1) = premult.at(x, y, 1) * keep + prim.fill_rgb[1] * a;
                premult.at(x, y, 2) = premult.at(x, y, 2) * keep + prim.fill_rgb[2] * a;
                out.alpha.at(x, y) = out.alpha.at(x, y) * keep + a;
            }
        }
        for (int x = 0; x < W; ++x) {
            const double a = out.alpha.at(x, y);
            if (a > 0.0) {
                out.rgb.at(x, y, 0) = premult.at(x, y, 0) / a;
                out.rgb.at(x, y, 1) = premult.at(x, y, 1) / a;
                out.rgb.at(x, y, 2) = premult.at(x, y, 2) / a;
            }
        }
    }
    return out;
}

std::vector<OcclusionField> cumulative_occlusion(const LayerVector& layer,
                                                 const RenderConfig& cfg) {
    validate_canvas(cfg);
    const int n = static_cast<int>(layer.primitives.size());
    const auto tiles = detail::rasterize_layer(layer, cfg, false);
    std::vector<OcclusionField> fields(n);
    ImageF occ(cfg.width, cfg.height, 1, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        fields[i].depth_index = i;
        fields[i].values = occ;  // occlusion above primitive i, before folding i in
        const detail::CoverageTile& tile = tiles[i];
        if (tile.empty()) continue;
        const double op = layer.primitives[i].fill_opacity;
#pragma omp parallel for schedule(static)
        for (int iy = 0; iy < tile.h; ++iy) {
            for (int ix = 0; ix < tile.w; ++ix) {
                const double a = op * tile.cov_at_local(ix, iy);
                if (a == 0.0) continue;
                double& o = occ.at(tile.x0 + ix, tile.y0 + iy);
                o = o + a * (1.0 - o);
            }
        }
    }
    return fields;
}

std::vector<double> contribution_scores(const LayerVector& layer, const RenderConfig& cfg) {
    validate_canvas(cfg);
    const int n = static_cast<int>(layer.primitives.size());
    const auto tiles = detail::rasterize_layer(layer, cfg, false);
    std::vector<double> scores(n, 0.0);
    ImageF occ(cfg.width, cfg.height, 1, 0.0);
    std::vector<double> row_sum;
    for (int i = n - 1; i >= 0; --i) {
        const detail::CoverageTile& tile = tiles[i];
        if (tile.empty()) continue;
        const double op = layer.primitives[i].fill_opacity;
        row_sum.assign(tile.h, 0.0);
#pragma omp parallel for schedule(static)
        for (int iy = 0; iy < tile.h; ++iy) {
            double acc = 0.0;
            for (int ix = 0; ix < tile.w; ++ix) {
                const double a = op * tile.cov_at_local(ix, iy);
                if (a == 0.0) continue;
                double& o = occ.at(tile.x0 + ix, tile.y0 + iy);
                acc += a * (1.0 - o);
                o = o + a * (1.0 - o);
            }
            row_sum[iy] = acc;
        }
        double total = 0.0;
        for (double v : row_sum) total += v;  // serial combine keeps sums deterministic
        scores[i] = total;
    }
    return scores;
}

std::vector<double> alpha_area_scores(const LayerVector& layer, const RenderConfig& cfg) {
    validate_canvas(cfg);
    const int n = static_cast<int>(layer.primitives.size());
    const auto tiles = detail::rasterize_layer(layer, cfg, false);
    std::vector<double> scores(n, 0.0);
    std::vector<double> row_sum;
    for (int i = 0; i < n; ++i) {
        const detail::CoverageTile& tile = tiles[i];
        if (tile.empty()) continue;
        const double op = layer.primitives[i].fill_opacity;
        row_sum.assign(tile.h, 0.0);
#pragma omp parallel for schedule(static)
        for (int iy = 0; iy < tile.h; ++iy) {
            double acc = 0.0;
            for (int ix = 0; ix < tile.w; ++ix) acc += op * tile.cov_at_local(ix, iy);
            row_sum[iy] = acc;
        }
        double total = 0.0;
        for (double v : row_sum) total += v;
        scores[i] = total;
    }
    return scores;
}

}  // namespace alv
