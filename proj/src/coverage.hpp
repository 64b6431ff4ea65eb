#pragma once

// Internal coverage engine shared by the raster, optimize and adapt modules.
// Not part of the installed interface.

#include <cstdint>
#include <vector>

#include "alv/geometry.hpp"
#include "alv/raster.hpp"
#include "alv/scene.hpp"

namespace alv::detail {

// A pixel whose coverage is strictly between 0 and 1, with everything needed
// to chain d(coverage)/d(control points).
struct BandPixel {
    int32_t x, y;     // canvas coordinates
    int32_t edge;     // closest polyline edge (vertex index of its start)
    double t;         // closest-point parameter on that edge
    double snx, sny;  // signed unit normal: d(sd)/d(vertex a) = -(1-t)*sn, /d(b) = -t*sn
    double dcov_dsd;  // derivative of coverage w.r.t. signed distance
};

// Coverage of one primitive over its canvas-clipped dilated bounding box.
struct CoverageTile {
    int x0 = 0, y0 = 0, w = 0, h = 0;
    std::vector<double> cov;  // w*h, row-major, in [0,1]
    std::vector<BandPixel> band;
    FlatPath flat;
    bool degenerate = false;

    bool empty() const { return w <= 0 || h <= 0; }
    double cov_at_local(int ix, int iy) const {
        return cov[static_cast<size_t>(iy) * w + ix];
    }
};

// Scanline winding plus band-limited exact distances.  `keep_flat` retains
// the flattened geometry for gradient chaining.
CoverageTile rasterize_coverage(const PathPrimitive& prim, const RenderConfig& cfg,
                                bool keep_flat);

std::vector<CoverageTile> rasterize_layer(const LayerVector& layer, const RenderConfig& cfg,
                                          bool keep_flat);

// C1 smoothstep of the signed distance over a band of width `smoothing`.
inline double smoothstep_coverage(double signed_distance, double smoothing) {
    double u = 0.5 - signed_distance / smoothing;
    u = u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
    return u * u * (3.0 - 2.0 * u);
}

}  // namespace alv::detail
