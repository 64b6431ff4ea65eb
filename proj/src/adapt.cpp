#include "alv/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alv/errors.hpp"
#include "alv/rng.hpp"
#include "coverage.hpp"
#include "loss_detail.hpp"

namespace alv {

PruneStrategy prune_strategy_from_name(const std::string& name) {
    if (name == "occlusion_aware" || name == "ours") return PruneStrategy::occlusion_aware;
    if (name == "area") return PruneStrategy::area;
    if (name == "opacity") return PruneStrategy::opacity;
    if (name == "oracle") return PruneStrategy::oracle;
    throw validation_error("unknown pruning strategy '" + name + "'");
}

std::string prune_strategy_name(PruneStrategy s) {
    switch (s) {
        case PruneStrategy::occlusion_aware: return "occlusion_aware";
        case PruneStrategy::area: return "area";
        case PruneStrategy::opacity: return "opacity";
        case PruneStrategy::oracle: return "oracle";
    }
    return "?";
}

namespace {

struct Rect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
    bool empty() const { return x0 >= x1 || y0 >= y1; }
    bool intersects(const Rect& o) const {
        return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
    }
};

Rect tile_rect(const detail::CoverageTile& t) {
    return {t.x0, t.y0, t.x0 + t.w, t.y0 + t.h};
}

// Mean squared white-composited render difference caused by dropping each
// alive primitive, evaluated only over the candidate's own tile (outside it
// the render is unchanged).
std::vector<double> oracle_scores_impl(const LayerVector& layer,
                                       const std::vector<detail::CoverageTile>& tiles,
                                       const std::vector<char>& alive, const RenderConfig& cfg) {
    const int n = static_cast<int>(layer.primitives.size());
    const double norm = 1.0 / (static_cast<double>(cfg.width) * cfg.height * 3.0);

    // Full render of the alive set, composited on white.
    ImageF full(cfg.width, cfg.height, 3, 1.0);
    {
        ImageF premult(cfg.width, cfg.height, 4, 0.0);
        for (int i = 0; i < n; ++i) {
            if (!alive[i] || tiles[i].empty()) continue;
            const auto& t = tiles[i];
            const double op = layer.primitives[i].fill_opacity;
            const auto& rgb = layer.primitives[i].fill_rgb;
            for (int iy = 0; iy < t.h; ++iy) {
                for (int ix = 0; ix < t.w; ++ix) {
                    const double a = op * t.cov_at_local(ix, iy);
                    if (a == 0.0) continue;
                    const double keep = 1.0 - a;
                    double* px = &premult.at(t.x0 + ix, t.y0 + iy, 0);
                    px[0] = px[0] * keep + rgb[0] * a;
                    px[1] = px[1] * keep + rgb[1] * a;
                    px[2] = px[2] * keep + rgb[2] * a;
                    px[3] = px[3] * keep + a;
                }
            }
        }
        for (int y = 0; y < cfg.height; ++y)
            for (int x = 0; x < cfg.width; ++x)
                for (int c = 0; c < 3; ++c)
                    full.at(x, y, c) = premult.at(x, y, c) + (1.0 - premult.at(x, y, 3));
    }

    std::vector<double> scores(n, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        if (!alive[i] || tiles[i].empty()) continue;
        const Rect ri = tile_rect(tiles[i]);
        std::vector<int> overlaps;
        for (int j = 0; j < n; ++j) {
            if (j == i || !alive[j] || tiles[j].empty()) continue;
            if (ri.intersects(tile_rect(tiles[j]))) overlaps.push_back(j);
        }
        double acc = 0.0;
        for (int y = ri.y0; y < ri.y1; ++y) {
            for (int x = ri.x0; x < ri.x1; ++x) {
                double pr = 0.0, pg = 0.0, pb = 0.0, pa = 0.0;
                for (int j : overlaps) {
                    const auto& t = tiles[j];
                    if (x < t.x0 || x >= t.x0 + t.w || y < t.y0 || y >= t.y0 + t.h) continue;
                    const double a =
                        layer.primitives[j].fill_opacity * t.cov_at_local(x - t.x0, y - t.y0);
                    if (a == 0.0) continue;
                    const double keep = 1.0 - a;
                    const auto& rgb = layer.primitives[j].fill_rgb;
                    pr = pr * keep + rgb[0] * a;
                    pg = pg * keep + rgb[1] * a;
                    pb = pb * keep + rgb[2] * a;
                    pa = pa * keep + a;
                }
                const double w = 1.0 - pa;
                const double d0 = (pr + w) - full.at(x, y, 0);
                const double d1 = (pg + w) - full.at(x, y, 1);
                const double d2 = (pb + w) - full.at(x, y, 2);
                acc += d0 * d0 + d1 * d1 + d2 * d2;
            }
        }
        scores[i] = acc * norm;
    }
    return scores;
}

std::vector<int> ranked_removal(const std::vector<double>& scores, int n_remove) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] < scores[b]; });
    std::vector<int> removed(order.begin(), order.begin() + n_remove);
    std::sort(removed.begin(), removed.end());
    return removed;
}

LayerVector apply_removal(const LayerVector& layer, const std::vector<int>& removed) {
    LayerVector out;
    out.layer_id = layer.layer_id;
    size_t ri = 0;
    for (size_t i = 0; i < layer.primitives.size(); ++i) {
        if (ri < removed.size() && static_cast<size_t>(removed[ri]) == i) {
            ++ri;
            continue;
        }
        out.primitives.push_back(layer.primitives[i]);
    }
    return out;
}

}  // namespace

std::vector<double> oracle_scores(const LayerVector& layer, const RenderConfig& cfg) {
    const auto tiles = detail::rasterize_layer(layer, cfg, false);
    const std::vector<char> alive(layer.primitives.size(), 1);
    return oracle_scores_impl(layer, tiles, alive, cfg);
}

PruneResult prune(const LayerVector& layer, const LayerTarget& target, const PruneConfig& cfg) {
    const int n = static_cast<int>(layer.primitives.size());
    if (n == 0) throw validation_error("cannot prune an empty layer");
    if (cfg.ratio && (*cfg.ratio < 0.0 || *cfg.ratio > 1.0))
        throw validation_error("prune ratio must lie in [0,1]");
    if (cfg.tau_p < 0.0) throw validation_error("pruning threshold must be non-negative");

    RenderConfig rc(target.image.width, target.image.height, cfg.smoothing);
    rc.flatten_samples = cfg.flatten_samples;

    int n_remove = -1;  // threshold mode
    if (cfg.ratio) {
        n_remove = static_cast<int>(std::llround(*cfg.ratio * n));
        if (n_remove >= n) throw validation_error("prune ratio would remove every primitive");
    }

    PruneResult res;
    res.layer.layer_id = layer.layer_id;

    if (cfg.strategy == PruneStrategy::oracle && n_remove > 0) {
        // Greedy: re-score the survivors after each removal.
        const auto tiles = detail::rasterize_layer(layer, rc, false);
        std::vector<char> alive(n, 1);
        res.scores = oracle_scores_impl(layer, tiles, alive, rc);
        for (int round = 0; round < n_remove; ++round) {
            const auto scores =
                round == 0 ? res.scores : oracle_scores_impl(layer, tiles, alive, rc);
            int best = -1;
            for (int i = 0; i < n; ++i) {
                if (!alive[i]) continue;
                if (best < 0 || scores[i] < scores[best]) best = i;
            }
            alive[best] = 0;
            res.removed.push_back(best);
        }
        std::sort(res.removed.begin(), res.removed.end());
        res.layer = apply_removal(layer, res.removed);
        return res;
    }

    switch (cfg.strategy) {
        case PruneStrategy::occlusion_aware:
            res.scores = contribution_scores(layer, rc);
            break;
        case PruneStrategy::area:
            res.scores = alpha_area_scores(layer, rc);
            break;
        case PruneStrategy::opacity:
            res.scores.reserve(n);
            for (const auto& p : layer.primitives) res.scores.push_back(p.fill_opacity);
            break;
        case PruneStrategy::oracle:
            res.scores = oracle_scores(layer, rc);
            break;
    }

    if (n_remove >= 0) {
        res.removed = ranked_removal(res.scores, n_remove);
    } else {
        for (int i = 0; i < n; ++i)
            if (res.scores[i] <= cfg.tau_p) res.removed.push_back(i);
    }
    res.layer = apply_removal(layer, res.removed);
    return res;
}

void AdditionHistory::push(const Event& e) {
    if (e.n_added < 1) throw validation_error("addition event must add at least one primitive");
    events_.push_back(e);
    while (static_cast<int>(events_.size()) > capacity_) events_.pop_front();
}

double AdditionHistory::mean_marginal() const {
    if (events_.empty()) return 0.0;
    double acc = 0.0;
    for (const Event& e : events_) acc += (e.loss_before - e.loss_after) / e.n_added;
    return acc / static_cast<double>(events_.size());
}

ErrorField build_error_field(const LayerVector& layer, const LayerTarget& target,
                             const LossConfig& cfg) {
    const int W = target.image.width, H = target.image.height;
    ErrorField field;
    field.values = ImageF(W, H, 1, 0.0);
    field.domain = target.mask;

    const ImageF err = detail::per_pixel_error(layer, target, cfg);

    double total = 0.0;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            if (!target.mask.at(x, y)) continue;
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, W - 1);
            const int ym = std::max(y - 1, 0), yp = std::min(y + 1, H - 1);
            double g2 = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double gx = 0.5 * (target.image.at(xp, y, c) - target.image.at(xm, y, c));
                const double gy = 0.5 * (target.image.at(x, yp, c) - target.image.at(x, ym, c));
                g2 += gx * gx + gy * gy;
            }
            const double e = err.at(x, y) * (1.0 + std::sqrt(g2));
            field.values.at(x, y) = e;
            total += e;
        }
    }
    field.all_zero = total == 0.0;
    return field;
}

std::vector<double> addition_probabilities(const ErrorField& field, double temperature) {
    if (!(temperature > 0.0)) throw validation_error("temperature must be positive");
    const size_t n = field.values.data.size();
    std::vector<double> prob(n, 0.0);

    if (field.all_zero) {
        const long long count = field.domain.count_nonzero();
        if (count == 0) throw validation_error("error field has no sampling support");
        const double p = 1.0 / static_cast<double>(count);
        for (size_t k = 0; k < n; ++k)
            if (field.domain.values[k]) prob[k] = p;
        return prob;
    }

    // E^{1/T} in log space: exp(log(E)/T - max) avoids overflow for small T.
    double max_lw = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < n; ++k) {
        const double e = field.values.data[k];
        if (e > 0.0) max_lw = std::max(max_lw, std::log(e) / temperature);
    }
    double sum = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double e = field.values.data[k];
        if (e > 0.0) {
            prob[k] = std::exp(std::log(e) / temperature - max_lw);
            sum += prob[k];
        }
    }
    for (double& p : prob) p /= sum;
    return prob;
}

std::vector<PixelCoord> sample_additions(const ErrorField& field, int n, double temperature,
                                         uint64_t rng_seed) {
    if (n < 1) throw validation_error("must sample at least one addition");
    const auto prob = addition_probabilities(field, temperature);
    DiscreteSampler sampler(prob);
    if (!sampler.valid()) throw validation_error("error field has no sampling support");
    Rng rng(rng_seed);
    std::vector<PixelCoord> coords;
    coords.reserve(n);
    const int W = field.values.width;
    for (int k = 0; k < n; ++k) {
        const size_t idx = sampler.draw(rng);
        coords.push_back({static_cast<int>(idx % W), static_cast<int>(idx / W)});
    }
    return coords;
}

int estimate_addition_count(const AdditionHistory& history, double current_loss,
                            const AddConfig& cfg) {
    if (current_loss < 0.0) throw validation_error("loss must be non-negative");
    if (cfg.n_min > cfg.n_max) throw validation_error("n_min must not exceed n_max");
    if (cfg.window_size < 1) throw validation_error("window size must be at least 1");
    if (current_loss <= cfg.target_loss) return 0;
    double marginal = history.empty() ? cfg.seed_marginal : history.mean_marginal();
    if (marginal <= 0.0) marginal = cfg.seed_marginal;
    const double raw = std::ceil((current_loss - cfg.target_loss) / marginal);
    const double clamped =
        std::clamp(raw, static_cast<double>(cfg.n_min), static_cast<double>(cfg.n_max));
    return static_cast<int>(clamped);
}

LayerVector add_primitives(const LayerVector& layer, const LayerTarget& target,
                           const std::vector<PixelCoord>& coords, double seed_radius,
                           int segments_per_path) {
    const int W = target.image.width, H = target.image.height;
    LayerVector out = layer;
    for (const PixelCoord& c : coords) {
        if (c.x < 0 || c.x >= W || c.y < 0 || c.y >= H)
            throw validation_error("addition coordinate outside canvas");
        Rgba color{target.image.at(c.x, c.y, 0), target.image.at(c.x, c.y, 1),
                   target.image.at(c.x, c.y, 2), 1.0};
        out.primitives.push_back(make_seed_primitive({c.x + 0.5, c.y + 0.5}, seed_radius, color,
                                                     segments_per_path));
    }
    return out;
}

}  // namespace alv
