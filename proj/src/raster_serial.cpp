#include <cmath>
#include <vector>

#include "alv/errors.hpp"
#include "alv/raster.hpp"
#include "coverage.hpp"

// Naive single-threaded reference: winding and distance are recomputed per
// pixel over the full polyline, compositing is a per-pixel painter loop, and
// occlusion uses the closed-form product instead of the recursion.

namespace alv::serial_ref {

namespace {

double coverage_at(const FlatPath& flat, Vec2 p, double smoothing) {
    if (flat.degenerate) return 0.0;
    const bool inside = polyline_winding(flat.verts, p) != 0;
    double best = std::numeric_limits<double>::infinity();
    const size_t n = flat.verts.size();
    for (size_t e = 0; e < n; ++e) {
        const double d2 = distance_sq_point_segment(p, flat.verts[e], flat.verts[(e + 1) % n]);
        if (d2 < best) best = d2;
    }
    const double sd = (inside ? -1.0 : 1.0) * std::sqrt(best);
    return detail::smoothstep_coverage(sd, smoothing);
}

std::vector<FlatPath> flatten_all(const LayerVector& layer, const RenderConfig& cfg) {
    std::vector<FlatPath> flats;
    flats.reserve(layer.primitives.size());
    for (const PathPrimitive& prim : layer.primitives)
        flats.push_back(flatten_path(prim, cfg.flatten_samples));
    return flats;
}

}  // namespace

AlphaMap primitive_alpha(const PathPrimitive& prim, const RenderConfig& cfg) {
    AlphaMap map;
    map.values = ImageF(cfg.width, cfg.height, 1, 0.0);
    map.primitive_index = -1;
    const FlatPath flat = flatten_path(prim, cfg.flatten_samples);
    map.degenerate = flat.degenerate;
    if (flat.degenerate) return map;
    for (int y = 0; y < cfg.height; ++y)
        for (int x = 0; x < cfg.width; ++x)
            map.values.at(x, y) =
                prim.fill_opacity * coverage_at(flat, {x + 0.5, y + 0.5}, cfg.smoothing);
    return map;
}

RenderOutput composite(const LayerVector& layer, const RenderConfig& cfg) {
    RenderOutput out;
    out.rgb = ImageF(cfg.width, cfg.height, 3, 0.0);
    out.alpha = ImageF(cfg.width, cfg.height, 1, 0.0);
    const auto flats = flatten_all(layer, cfg);
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            double pr = 0.0, pg = 0.0, pb = 0.0, pa = 0.0;
            for (size_t i = 0; i < layer.primitives.size(); ++i) {
                const PathPrimitive& prim = layer.primitives[i];
                const double a =
                    prim.fill_opacity * coverage_at(flats[i], {x + 0.5, y + 0.5}, cfg.smoothing);
                const double keep = 1.0 - a;
                pr = pr * keep + prim.fill_rgb[0] * a;
                pg = pg * keep + prim.fill_rgb[1] * a;
                pb = pb * keep + prim.fill_rgb[2] * a;
                pa = pa * keep + a;
            }
            if (pa > 0.0) {
                out.rgb.at(x, y, 0) = pr / pa;
                out.rgb.at(x, y, 1) = pg / pa;
                out.rgb.at(x, y, 2) = pb / pa;
            }
            out.alpha.at(x, y) = pa;
        }
    }
    return out;
}

std::vector<OcclusionField> cumulative_occlusion(const LayerVector& layer,
                                                 const RenderConfig& cfg) {
    const int n = static_cast<int>(layer.primitives.size());
    const auto flats = flatten_all(layer, cfg);
    std::vector<OcclusionField> fields(n);
    for (int i = 0; i < n; ++i) {
        fields[i].depth_index = i;
        fields[i].values = ImageF(cfg.width, cfg.height, 1, 0.0);
    }
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            for (int i = 0; i < n; ++i) {
                double transmit = 1.0;
                for (int j = i + 1; j < n; ++j) {
                    const double a = layer.primitives[j].fill_opacity *
                                     coverage_at(flats[j], {x + 0.5, y + 0.5}, cfg.smoothing);
                    transmit *= 1.0 - a;
                }
                fields[i].values.at(x, y) = 1.0 - transmit;
            }
        }
    }
    return fields;
}

std::vector<double> contribution_scores(const LayerVector& layer, const RenderConfig& cfg) {
    const int n = static_cast<int>(layer.primitives.size());
    const auto flats = flatten_all(layer, cfg);
    std::vector<double> scores(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        for (int y = 0; y < cfg.height; ++y) {
            for (int x = 0; x < cfg.width; ++x) {
                const double a = layer.primitives[i].fill_opacity *
                                 coverage_at(flats[i], {x + 0.5, y + 0.5}, cfg.smoothing);
                if (a == 0.0) continue;
                double transmit = 1.0;
                for (int j = i + 1; j < n; ++j) {
                    const double aj = layer.primitives[j].fill_opacity *
                                      coverage_at(flats[j], {x + 0.5, y + 0.5}, cfg.smoothing);
                    transmit *= 1.0 - aj;
                }
                total += a * transmit;
            }
        }
        scores[i] = total;
    }
    return scores;
}

}  // namespace alv::serial_ref
