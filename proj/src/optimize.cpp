#include "alv/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "alv/errors.hpp"
#include "coverage.hpp"

namespace alv {

namespace detail {

namespace {

constexpr int kTileSize = 16;

struct TileGrid {
    int tiles_x = 0, tiles_y = 0;
    // per canvas tile: indices of primitives whose coverage tile intersects it
    std::vector<std::vector<int>> prims;
};

TileGrid build_grid(const std::vector<CoverageTile>& tiles, int width, int height) {
    TileGrid grid;
    grid.tiles_x = (width + kTileSize - 1) / kTileSize;
    grid.tiles_y = (height + kTileSize - 1) / kTileSize;
    grid.prims.resize(static_cast<size_t>(grid.tiles_x) * grid.tiles_y);
    for (size_t i = 0; i < tiles.size(); ++i) {
        const CoverageTile& t = tiles[i];
        if (t.empty()) continue;
        const int tx0 = t.x0 / kTileSize;
        const int tx1 = (t.x0 + t.w - 1) / kTileSize;
        const int ty0 = t.y0 / kTileSize;
        const int ty1 = (t.y0 + t.h - 1) / kTileSize;
        for (int ty = ty0; ty <= ty1; ++ty)
            for (int tx = tx0; tx <= tx1; ++tx)
                grid.prims[static_cast<size_t>(ty) * grid.tiles_x + tx].push_back(
                    static_cast<int>(i));
    }
    return grid;
}

inline void reference_background(const LayerTarget& target, const LossConfig& cfg, int x, int y,
                                 double bg[3]) {
    switch (cfg.background) {
        case ReconBackground::white: bg[0] = bg[1] = bg[2] = 1.0; return;
        case ReconBackground::gray: bg[0] = bg[1] = bg[2] = 0.5; return;
        case ReconBackground::black: bg[0] = bg[1] = bg[2] = 0.0; return;
        case ReconBackground::target_outside_gray_inside:
            if (target.mask.at(x, y)) {
                bg[0] = bg[1] = bg[2] = 0.5;
            } else {
                bg[0] = target.image.at(x, y, 0);
                bg[1] = target.image.at(x, y, 1);
                bg[2] = target.image.at(x, y, 2);
            }
            return;
    }
}

struct PerPrimGrad {
    std::vector<double> points;  // 2 * point count
    double color[4] = {0, 0, 0, 0};
};

// Loss (and optionally gradients) evaluated over one canvas tile.
struct TileResult {
    double recon = 0.0;
    double mask = 0.0;
    std::vector<std::pair<int, PerPrimGrad>> grads;  // primitive index -> contributions
};

}  // namespace

// Shared forward/backward engine.  `want_grads` controls whether the
// composite prefixes are stored and backpropagated.
static LossBreakdown loss_engine(const LayerVector& layer, const LayerTarget& target,
                                 const LossConfig& cfg, bool want_grads, LayerGradients* grads,
                                 ImageF* pixel_error_out) {
    const int W = target.image.width, H = target.image.height;
    if (W <= 0 || H <= 0) throw validation_error("empty target");
    RenderConfig rc(W, H, cfg.smoothing);
    rc.flatten_samples = cfg.flatten_samples;

    const auto tiles = rasterize_layer(layer, rc, want_grads);
    const TileGrid grid = build_grid(tiles, W, H);
    const int n_tiles = grid.tiles_x * grid.tiles_y;
    const int n_prims = static_cast<int>(layer.primitives.size());

    // Bucket band pixels of each primitive by canvas tile.
    std::vector<std::vector<std::vector<const BandPixel*>>> band_by_tile;
    if (want_grads) {
        band_by_tile.assign(n_prims, {});
        for (int i = 0; i < n_prims; ++i) {
            band_by_tile[i].resize(n_tiles);
            for (const BandPixel& bp : tiles[i].band) {
                const int tid = (bp.y / kTileSize) * grid.tiles_x + (bp.x / kTileSize);
                band_by_tile[i][tid].push_back(&bp);
            }
        }
    }

    const double recon_norm = 1.0 / (static_cast<double>(W) * H * 3.0);
    const double mask_norm = 1.0 / (static_cast<double>(W) * H);

    std::vector<TileResult> results(n_tiles);
#pragma omp parallel for schedule(dynamic)
    for (int tid = 0; tid < n_tiles; ++tid) {
        TileResult& res = results[tid];
        const int tx = tid % grid.tiles_x, ty = tid / grid.tiles_x;
        const int px0 = tx * kTileSize, py0 = ty * kTileSize;
        const int pw = std::min(kTileSize, W - px0), ph = std::min(kTileSize, H - py0);
        const size_t n_px = static_cast<size_t>(pw) * ph;
        const auto& local = grid.prims[tid];

        // Forward: premultiplied composite with per-primitive prefixes.
        std::vector<double> accum(n_px * 4, 0.0);  // premult rgb + alpha
        std::vector<double> prefix;                 // [local prim][pixel][4]
        if (want_grads) prefix.assign(local.size() * n_px * 4, 0.0);
        for (size_t li = 0; li < local.size(); ++li) {
            const int i = local[li];
            const CoverageTile& ct = tiles[i];
            const double op = layer.primitives[i].fill_opacity;
            const double* rgb = layer.primitives[i].fill_rgb.data();
            double* pre = want_grads ? prefix.data() + li * n_px * 4 : nullptr;
            if (want_grads) std::memcpy(pre, accum.data(), n_px * 4 * sizeof(double));
            const int ix0 = std::max(px0, ct.x0), ix1 = std::min(px0 + pw, ct.x0 + ct.w);
            const int iy0 = std::max(py0, ct.y0), iy1 = std::min(py0 + ph, ct.y0 + ct.h);
            for (int y = iy0; y < iy1; ++y) {
                for (int x = ix0; x < ix1; ++x) {
                    const double a = op * ct.cov_at_local(x - ct.x0, y - ct.y0);
                    if (a == 0.0) continue;
                    double* px = accum.data() + (static_cast<size_t>(y - py0) * pw + (x - px0)) * 4;
                    const double keep = 1.0 - a;
                    px[0] = px[0] * keep + rgb[0] * a;
                    px[1] = px[1] * keep + rgb[1] * a;
                    px[2] = px[2] * keep + rgb[2] * a;
                    px[3] = px[3] * keep + a;
                }
            }
        }

        // Loss over every pixel of the tile, plus dL/dout and dL/dA.
        std::vector<double> g_accum;  // running dL/dC (3) + dL/dA per pixel
        if (want_grads) g_accum.assign(n_px * 4, 0.0);
        for (int y = py0; y < py0 + ph; ++y) {
            for (int x = px0; x < px0 + pw; ++x) {
                const size_t k = (static_cast<size_t>(y - py0) * pw + (x - px0)) * 4;
                double bg[3] = {0.0, 0.0, 0.0};
                reference_background(target, cfg, x, y, bg);
                const double A = accum[k + 3];
                const bool outside = target.mask.at(x, y) == 0;
                const double ta = target.image.at(x, y, 3);
                double w[3];
                for (int c = 0; c < 3; ++c) {
                    // Both sides composited over the same reference background.
                    const double out_c = accum[k + c] + bg[c] * (1.0 - A);
                    const double target_c =
                        target.image.at(x, y, c) * ta + bg[c] * (1.0 - ta);
                    const double diff = out_c - target_c;
                    res.recon += diff * diff;
                    w[c] = 2.0 * diff * recon_norm;
                }
                if (outside) res.mask += A * A;
                if (want_grads) {
                    g_accum[k + 0] = w[0];
                    g_accum[k + 1] = w[1];
                    g_accum[k + 2] = w[2];
                    double ga = -(w[0] * bg[0] + w[1] * bg[1] + w[2] * bg[2]);
                    if (outside) ga += cfg.lambda_mask * 2.0 * A * mask_norm;
                    g_accum[k + 3] = ga;
                }
                if (pixel_error_out) {
                    double err = 0.0;
                    for (int c = 0; c < 3; ++c) {
                        const double out_c = accum[k + c] + bg[c] * (1.0 - A);
                        const double target_c =
                            target.image.at(x, y, c) * ta + bg[c] * (1.0 - ta);
                        const double d = out_c - target_c;
                        err += d * d;
                    }
                    pixel_error_out->at(x, y) = err;
                }
            }
        }

        if (!want_grads) continue;

        // Backward, top to bottom.
        std::vector<double> dperf(n_px, 0.0);  // dL/d(alpha_i) scratch for current primitive
        for (size_t li = local.size(); li-- > 0;) {
            const int i = local[li];
            const CoverageTile& ct = tiles[i];
            const PathPrimitive& prim = layer.primitives[i];
            const double op = prim.fill_opacity;
            const double* rgb = prim.fill_rgb.data();
            const double* pre = prefix.data() + li * n_px * 4;
            PerPrimGrad pg;
            pg.points.assign(prim.points.size() * 2, 0.0);
            const int ix0 = std::max(px0, ct.x0), ix1 = std::min(px0 + pw, ct.x0 + ct.w);
            const int iy0 = std::max(py0, ct.y0), iy1 = std::min(py0 + ph, ct.y0 + ct.h);
            std::fill(dperf.begin(), dperf.end(), 0.0);
            for (int y = iy0; y < iy1; ++y) {
                for (int x = ix0; x < ix1; ++x) {
                    const size_t pk = static_cast<size_t>(y - py0) * pw + (x - px0);
                    const double cov = ct.cov_at_local(x - ct.x0, y - ct.y0);
                    const double a = op * cov;
                    double* g = g_accum.data() + pk * 4;
                    const double* pb = pre + pk * 4;
                    // dL/d(alpha) is needed even at a == 0 (opacity gradient);
                    // it only vanishes when coverage itself is zero.
                    double dLda = 0.0;
                    for (int c = 0; c < 3; ++c) dLda += g[c] * (rgb[c] - pb[c]);
                    dLda += g[3] * (1.0 - pb[3]);
                    if (cov != 0.0) {
                        for (int c = 0; c < 3; ++c) pg.color[c] += g[c] * a;
                        pg.color[3] += dLda * cov;
                        dperf[pk] = dLda;
                        const double keep = 1.0 - a;
                        g[0] *= keep;
                        g[1] *= keep;
                        g[2] *= keep;
                        g[3] *= keep;
                    }
                }
            }
            // Geometry chain through the band pixels in this tile.
            const size_t nv = ct.flat.verts.size();
            for (const BandPixel* bp : band_by_tile[i][tid]) {
                if (bp->x < px0 || bp->x >= px0 + pw || bp->y < py0 || bp->y >= py0 + ph)
                    continue;
                const size_t pk = static_cast<size_t>(bp->y - py0) * pw + (bp->x - px0);
                const double dLdsd = dperf[pk] * op * bp->dcov_dsd;
                if (dLdsd == 0.0) continue;
                const size_t ea = bp->edge;
                const size_t eb = (ea + 1) % nv;
                const double wa = -(1.0 - bp->t), wb = -bp->t;
                const VertexBasis& ba = ct.flat.basis[ea];
                const VertexBasis& bb = ct.flat.basis[eb];
                for (int q = 0; q < 4; ++q) {
                    pg.points[2 * ba.idx[q] + 0] += dLdsd * wa * bp->snx * ba.w[q];
                    pg.points[2 * ba.idx[q] + 1] += dLdsd * wa * bp->sny * ba.w[q];
                    pg.points[2 * bb.idx[q] + 0] += dLdsd * wb * bp->snx * bb.w[q];
                    pg.points[2 * bb.idx[q] + 1] += dLdsd * wb * bp->sny * bb.w[q];
                }
            }
            res.grads.emplace_back(i, std::move(pg));
        }
    }

    LossBreakdown loss;
    for (const TileResult& r : results) {
        loss.recon += r.recon;
        loss.mask += r.mask;
    }
    loss.recon *= recon_norm;
    loss.mask *= mask_norm;
    loss.total = loss.recon + cfg.lambda_mask * loss.mask;

    if (want_grads) {
        std::vector<size_t> point_offset(n_prims, 0);
        size_t total_points = 0;
        for (int i = 0; i < n_prims; ++i) {
            point_offset[i] = total_points;
            total_points += layer.primitives[i].points.size();
        }
        grads->points.assign(total_points * 2, 0.0);
        grads->colors.assign(static_cast<size_t>(n_prims) * 4, 0.0);
        for (const TileResult& r : results) {  // tile order: deterministic merge
            for (const auto& [i, pg] : r.grads) {
                double* dst = grads->points.data() + point_offset[i] * 2;
                for (size_t k = 0; k < pg.points.size(); ++k) dst[k] += pg.points[k];
                for (int c = 0; c < 4; ++c) grads->colors[static_cast<size_t>(i) * 4 + c] +=
                    pg.color[c];
            }
        }
        // Geometrically freeze primitives collapsed below half a pixel of area
        // so the distance field cannot blow up before the next prune pass.
        for (int i = 0; i < n_prims; ++i) {
            if (tiles[i].degenerate || std::abs(tiles[i].flat.signed_area) < 0.5) {
                double* dst = grads->points.data() + point_offset[i] * 2;
                std::fill(dst, dst + layer.primitives[i].points.size() * 2, 0.0);
            }
        }
    }
    return loss;
}

ImageF per_pixel_error(const LayerVector& layer, const LayerTarget& target,
                       const LossConfig& cfg) {
    ImageF err(target.image.width, target.image.height, 1, 0.0);
    loss_engine(layer, target, cfg, false, nullptr, &err);
    return err;
}

}  // namespace detail

namespace {

void validate_dims(const LayerVector&, const LayerTarget& target) {
    if (target.image.width != target.mask.width || target.image.height != target.mask.height)
        throw validation_error("target image and mask dimensions differ");
}

}  // namespace

LossBreakdown compute_loss(const LayerVector& layer, const LayerTarget& target,
                           const LossConfig& cfg) {
    validate_dims(layer, target);
    return detail::loss_engine(layer, target, cfg, false, nullptr, nullptr);
}

LossBreakdown compute_gradients(const LayerVector& layer, const LayerTarget& target,
                                const LossConfig& cfg, LayerGradients& grads) {
    validate_dims(layer, target);
    return detail::loss_engine(layer, target, cfg, true, &grads, nullptr);
}

OptimizerState::OptimizerState(const LayerVector& layer, const OptimizerConfig& cfg)
    : cfg_(cfg) {
    size_t total_points = 0;
    for (const PathPrimitive& p : layer.primitives) {
        prim_points_.push_back(static_cast<int>(p.points.size()));
        total_points += p.points.size();
    }
    m_points_.assign(total_points * 2, 0.0);
    v_points_.assign(total_points * 2, 0.0);
    m_colors_.assign(layer.primitives.size() * 4, 0.0);
    v_colors_.assign(layer.primitives.size() * 4, 0.0);
}

double OptimizerState::decay_factor() const {
    if (cfg_.total_steps <= 1) return 1.0;
    const int t = std::clamp(step_, 1, cfg_.total_steps);
    const double frac = static_cast<double>(t - 1) / (cfg_.total_steps - 1);
    return 1.0 - (1.0 - cfg_.decay_ratio) * frac;
}

void OptimizerState::step(LayerVector& layer, const LayerGradients& grads) {
    size_t total_points = 0;
    for (const PathPrimitive& p : layer.primitives) total_points += p.points.size();
    if (grads.points.size() != total_points * 2 ||
        grads.colors.size() != layer.primitives.size() * 4 ||
        m_points_.size() != total_points * 2 ||
        m_colors_.size() != layer.primitives.size() * 4)
        throw validation_error("gradient shape does not match layer parameters");

    ++step_;
    const double decay = decay_factor();
    const double lr_p = cfg_.lr_points * decay;
    const double lr_c = cfg_.lr_colors * decay;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);

    auto adam = [&](double g, double& m, double& v, double lr) {
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g * g;
        const double mhat = m / bc1;
        const double vhat = v / bc2;
        return -lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    };

    size_t pk = 0;
    for (size_t i = 0; i < layer.primitives.size(); ++i) {
        PathPrimitive& prim = layer.primitives[i];
        for (Vec2& p : prim.points) {
            p.x += adam(grads.points[pk], m_points_[pk], v_points_[pk], lr_p);
            ++pk;
            p.y += adam(grads.points[pk], m_points_[pk], v_points_[pk], lr_p);
            ++pk;
        }
        const size_t ck = i * 4;
        for (int c = 0; c < 3; ++c) {
            prim.fill_rgb[c] += adam(grads.colors[ck + c], m_colors_[ck + c], v_colors_[ck + c],
                                     lr_c);
            prim.fill_rgb[c] = std::clamp(prim.fill_rgb[c], 0.0, 1.0);
        }
        prim.fill_opacity += adam(grads.colors[ck + 3], m_colors_[ck + 3], v_colors_[ck + 3],
                                  lr_c);
        prim.fill_opacity = std::clamp(prim.fill_opacity, 0.0, 1.0);
    }
}

void OptimizerState::erase_primitives(const LayerVector& layer_before,
                                      const std::vector<int>& removed) {
    if (removed.empty()) return;
    std::vector<size_t> point_offset(layer_before.primitives.size() + 1, 0);
    for (size_t i = 0; i < layer_before.primitives.size(); ++i)
        point_offset[i + 1] = point_offset[i] + layer_before.primitives[i].points.size();

    size_t ri = 0;
    std::vector<double> nm_p, nv_p, nm_c, nv_c;
    std::vector<int> n_counts;
    for (size_t i = 0; i < layer_before.primitives.size(); ++i) {
        if (ri < removed.size() && static_cast<size_t>(removed[ri]) == i) {
            ++ri;
            continue;
        }
        const size_t b = point_offset[i] * 2, e = point_offset[i + 1] * 2;
        nm_p.insert(nm_p.end(), m_points_.begin() + b, m_points_.begin() + e);
        nv_p.insert(nv_p.end(), v_points_.begin() + b, v_points_.begin() + e);
        nm_c.insert(nm_c.end(), m_colors_.begin() + i * 4, m_colors_.begin() + i * 4 + 4);
        nv_c.insert(nv_c.end(), v_colors_.begin() + i * 4, v_colors_.begin() + i * 4 + 4);
        n_counts.push_back(prim_points_[i]);
    }
    m_points_ = std::move(nm_p);
    v_points_ = std::move(nv_p);
    m_colors_ = std::move(nm_c);
    v_colors_ = std::move(nv_c);
    prim_points_ = std::move(n_counts);
}

void OptimizerState::append_primitives(int count, int points_each) {
    for (int i = 0; i < count; ++i) {
        prim_points_.push_back(points_each);
        m_points_.insert(m_points_.end(), static_cast<size_t>(points_each) * 2, 0.0);
        v_points_.insert(v_points_.end(), static_cast<size_t>(points_each) * 2, 0.0);
        m_colors_.insert(m_colors_.end(), 4, 0.0);
        v_colors_.insert(v_colors_.end(), 4, 0.0);
    }
}

}  // namespace alv
