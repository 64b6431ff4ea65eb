#include "coverage.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace alv::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Row range of pixel centers inside [lo, hi] for a tile starting at origin.
inline void center_range(double lo, double hi, int origin, int extent, int& first, int& last) {
    first = static_cast<int>(std::ceil(lo - origin - 0.5));
    last = static_cast<int>(std::floor(hi - origin - 0.5));
    if (first < 0) first = 0;
    if (last > extent - 1) last = extent - 1;
}

}  // namespace

CoverageTile rasterize_coverage(const PathPrimitive& prim, const RenderConfig& cfg,
                                bool keep_flat) {
    CoverageTile tile;
    FlatPath flat = flatten_path(prim, cfg.flatten_samples);
    if (flat.degenerate) {
        tile.degenerate = true;
        if (keep_flat) tile.flat = std::move(flat);
        return tile;
    }

    const double s = cfg.smoothing;
    const double dilation = 3.0 * s + 1.0;
    int first_x, last_x, first_y, last_y;
    center_range(flat.bounds.min_x - dilation, flat.bounds.max_x + dilation, 0, cfg.width,
                 first_x, last_x);
    center_range(flat.bounds.min_y - dilation, flat.bounds.max_y + dilation, 0, cfg.height,
                 first_y, last_y);
    if (first_x > last_x || first_y > last_y) {
        if (keep_flat) tile.flat = std::move(flat);
        return tile;  // fully clipped
    }
    tile.x0 = first_x;
    tile.y0 = first_y;
    tile.w = last_x - first_x + 1;
    tile.h = last_y - first_y + 1;
    tile.cov.assign(static_cast<size_t>(tile.w) * tile.h, 0.0);

    const size_t nv = flat.verts.size();
    const auto& verts = flat.verts;

    // Winding numbers per scanline via difference arrays.
    std::vector<int> winding(static_cast<size_t>(tile.w) * tile.h, 0);
    {
        std::vector<int> diff(tile.w + 1);
        for (int iy = 0; iy < tile.h; ++iy) {
            std::fill(diff.begin(), diff.end(), 0);
            const double yc = tile.y0 + iy + 0.5;
            for (size_t e = 0; e < nv; ++e) {
                const Vec2 a = verts[e];
                const Vec2 b = verts[(e + 1) % nv];
                if ((a.y <= yc) == (b.y <= yc)) continue;
                const double x_int = a.x + (yc - a.y) / (b.y - a.y) * (b.x - a.x);
                // pixels with center x < x_int
                int end = static_cast<int>(std::ceil(x_int - tile.x0 - 0.5));
                if (end <= 0) continue;
                if (end > tile.w) end = tile.w;
                const int dir = (b.y > a.y) ? 1 : -1;
                diff[0] += dir;
                diff[end] -= dir;
            }
            int acc = 0;
            int* wrow = winding.data() + static_cast<size_t>(iy) * tile.w;
            for (int ix = 0; ix < tile.w; ++ix) {
                acc += diff[ix];
                wrow[ix] = acc;
            }
        }
    }

    // Exact distances near the boundary only: every pixel center within s/2 of
    // an edge lies inside that edge's margin-dilated bounding box.
    const double margin = 0.5 * s + 0.25;
    std::vector<double> dist_sq(static_cast<size_t>(tile.w) * tile.h, kInf);
    std::vector<int32_t> nearest(static_cast<size_t>(tile.w) * tile.h, -1);
    std::vector<double> nearest_t(static_cast<size_t>(tile.w) * tile.h, 0.0);
    for (size_t e = 0; e < nv; ++e) {
        const Vec2 a = verts[e];
        const Vec2 b = verts[(e + 1) % nv];
        int ex0, ex1, ey0, ey1;
        center_range(std::min(a.x, b.x) - margin, std::max(a.x, b.x) + margin, tile.x0, tile.w,
                     ex0, ex1);
        center_range(std::min(a.y, b.y) - margin, std::max(a.y, b.y) + margin, tile.y0, tile.h,
                     ey0, ey1);
        for (int iy = ey0; iy <= ey1; ++iy) {
            const double yc = tile.y0 + iy + 0.5;
            double* drow = dist_sq.data() + static_cast<size_t>(iy) * tile.w;
            for (int ix = ex0; ix <= ex1; ++ix) {
                const Vec2 p = {tile.x0 + ix + 0.5, yc};
                double t;
                const double d2 = distance_sq_point_segment(p, a, b, &t);
                if (d2 < drow[ix]) {
                    drow[ix] = d2;
                    nearest[static_cast<size_t>(iy) * tile.w + ix] = static_cast<int32_t>(e);
                    nearest_t[static_cast<size_t>(iy) * tile.w + ix] = t;
                }
            }
        }
    }

    const double half_band = 0.5 * s;
    for (int iy = 0; iy < tile.h; ++iy) {
        for (int ix = 0; ix < tile.w; ++ix) {
            const size_t k = static_cast<size_t>(iy) * tile.w + ix;
            const bool inside = winding[k] != 0;
            if (nearest[k] < 0) {
                tile.cov[k] = inside ? 1.0 : 0.0;
                continue;
            }
            const double dist = std::sqrt(dist_sq[k]);
            if (dist >= half_band) {
                tile.cov[k] = inside ? 1.0 : 0.0;
                continue;
            }
            const double sign = inside ? -1.0 : 1.0;
            const double sd = sign * dist;
            const double u = 0.5 - sd / s;
            const double c = u * u * (3.0 - 2.0 * u);
            tile.cov[k] = c;
            if (c <= 0.0 || c >= 1.0 || dist < 1e-12) continue;

            BandPixel bp;
            bp.x = tile.x0 + ix;
            bp.y = tile.y0 + iy;
            bp.edge = nearest[k];
            bp.t = nearest_t[k];
            const Vec2 a = verts[bp.edge];
            const Vec2 b = verts[(static_cast<size_t>(bp.edge) + 1) % nv];
            const Vec2 q = {a.x + bp.t * (b.x - a.x), a.y + bp.t * (b.y - a.y)};
            const Vec2 p = {tile.x0 + ix + 0.5, tile.y0 + iy + 0.5};
            bp.snx = sign * (p.x - q.x) / dist;
            bp.sny = sign * (p.y - q.y) / dist;
            bp.dcov_dsd = -6.0 * u * (1.0 - u) / s;
            tile.band.push_back(bp);
        }
    }

    if (keep_flat) tile.flat = std::move(flat);
    return tile;
}

std::vector<CoverageTile> rasterize_layer(const LayerVector& layer, const RenderConfig& cfg,
                                          bool keep_flat) {
    const int n = static_cast<int>(layer.primitives.size());
    std::vector<CoverageTile> tiles(n);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        tiles[i] = rasterize_coverage(layer.primitives[i], cfg, keep_flat);
    }
    return tiles;
}

}  // namespace alv::detail
