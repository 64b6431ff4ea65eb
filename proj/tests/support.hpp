#pragma once

// Shared helpers for the test suites.

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "alv/optimize.hpp"
#include "alv/raster.hpp"
#include "alv/rng.hpp"
#include "alv/scene.hpp"
#include "alv/synthetic.hpp"

namespace testutil {

inline alv::RenderConfig rc(int w, int h, double smoothing = 1.0) {
    return alv::RenderConfig(w, h, smoothing);
}

// Random RGBA target with a full mask: smooth low-frequency noise.
inline alv::LayerTarget noise_target(uint64_t seed, int w, int h) {
    alv::Rng rng(seed);
    alv::ImageF img(w, h, 4, 1.0);
    const double fx = rng.uniform(0.05, 0.3), fy = rng.uniform(0.05, 0.3);
    const double px = rng.uniform(0.0, 6.28), py = rng.uniform(0.0, 6.28);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = 0.5 + 0.35 * std::sin(fx * x * (c + 1) + px) *
                                           std::cos(fy * y + py + c);
                img.at(x, y, c) = std::clamp(v, 0.0, 1.0);
            }
            img.at(x, y, 3) = 1.0;
        }
    alv::MaskImage mask(w, h, 1);
    return alv::make_layer_target(std::move(img), std::move(mask), "noise");
}

// PSNR of a pruned render against the unpruned render, both over white.
inline double prune_psnr(const alv::LayerVector& before, const alv::LayerVector& after,
                         const alv::RenderConfig& cfg) {
    const alv::RenderOutput ra = alv::composite(before, cfg);
    const alv::RenderOutput rb = alv::composite(after, cfg);
    double acc = 0.0;
    for (int y = 0; y < cfg.height; ++y)
        for (int x = 0; x < cfg.width; ++x) {
            const double aa = ra.alpha.at(x, y), ab = rb.alpha.at(x, y);
            for (int c = 0; c < 3; ++c) {
                const double va = ra.rgb.at(x, y, c) * aa + (1.0 - aa);
                const double vb = rb.rgb.at(x, y, c) * ab + (1.0 - ab);
                acc += (va - vb) * (va - vb);
            }
        }
    const double mse = acc / (3.0 * cfg.width * cfg.height);
    return mse > 0.0 ? 10.0 * std::log10(1.0 / mse) : std::numeric_limits<double>::infinity();
}

// Central finite differences of compute_loss w.r.t. every parameter.
//
// The soft-coverage loss is continuous but has measure-zero kinks (closest
// boundary features switching).  A component that fails the central
// difference gate is re-examined against one-sided differences: it passes
// only when the analytic value equals one of the one-sided slopes AND the
// central difference equals their mean, i.e. the mismatch is certified to be
// a kink rather than a wrong gradient.
struct FdReport {
    int checked = 0;
    int failed = 0;
    int kinks = 0;  // components that passed via the one-sided certificate
    double worst_rel = 0.0;
};

inline FdReport finite_difference_check(const alv::LayerVector& layer,
                                        const alv::LayerTarget& target,
                                        const alv::LossConfig& cfg, double h_points,
                                        double h_colors) {
    alv::LayerGradients grads;
    alv::compute_gradients(layer, target, cfg, grads);
    const double base = alv::compute_loss(layer, target, cfg).total;

    FdReport rep;
    auto within = [](double a, double b) {
        const double err = std::abs(a - b);
        return err <= 1e-6 || err <= 1e-3 * std::max(std::abs(a), std::abs(b));
    };
    // mutate(lv, delta) applies the parameter bump in place
    auto check = [&](double analytic, double h,
                     const std::function<void(alv::LayerVector&, double)>& mutate) {
        ++rep.checked;
        auto eval = [&](double delta) {
            alv::LayerVector lv = layer;
            mutate(lv, delta);
            return alv::compute_loss(lv, target, cfg).total;
        };
        const double f_plus = eval(h), f_minus = eval(-h);
        const double fd = (f_plus - f_minus) / (2.0 * h);
        if (within(analytic, fd)) return;

        // kink certificate at a smaller step
        const double hs = h / 10.0;
        const double right = (eval(hs) - base) / hs;
        const double left = (base - eval(-hs)) / hs;
        const double central_small = (eval(hs) - eval(-hs)) / (2.0 * hs);
        if ((within(analytic, right) || within(analytic, left)) &&
            within(central_small, 0.5 * (left + right))) {
            ++rep.kinks;
            return;
        }
        ++rep.failed;
        const double scale = std::max(std::abs(analytic), std::abs(fd));
        if (scale > 0.0) rep.worst_rel = std::max(rep.worst_rel, std::abs(analytic - fd) / scale);
    };

    size_t pk = 0;
    for (size_t i = 0; i < layer.primitives.size(); ++i) {
        for (size_t p = 0; p < layer.primitives[i].points.size(); ++p) {
            for (int c = 0; c < 2; ++c) {
                check(grads.points[pk], h_points, [&, i, p, c](alv::LayerVector& lv, double d) {
                    if (c == 0)
                        lv.primitives[i].points[p].x += d;
                    else
                        lv.primitives[i].points[p].y += d;
                });
                ++pk;
            }
        }
    }
    for (size_t i = 0; i < layer.primitives.size(); ++i) {
        for (int c = 0; c < 4; ++c) {
            check(grads.colors[i * 4 + c], h_colors, [&, i, c](alv::LayerVector& lv, double d) {
                if (c < 3)
                    lv.primitives[i].fill_rgb[c] += d;
                else
                    lv.primitives[i].fill_opacity += d;
            });
        }
    }
    return rep;
}

// Layer whose primitives sit strictly inside [0,1]-clamp-safe color space and
// canvas interior, for FD checks (keeps +/- h perturbations off the clamps).
inline alv::LayerVector fd_scene(uint64_t seed, int n, int w, int h) {
    alv::Rng rng(seed);
    alv::LayerVector layer;
    layer.layer_id = "fd";
    for (int i = 0; i < n; ++i) {
        const alv::Vec2 c{rng.uniform(0.25 * w, 0.75 * w), rng.uniform(0.25 * h, 0.75 * h)};
        const double r = rng.uniform(3.0, 6.0);
        const alv::Rgba color{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9),
                              rng.uniform(0.1, 0.9), rng.uniform(0.3, 0.9)};
        layer.primitives.push_back(alv::make_seed_primitive(c, r, color));
    }
    return layer;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("alv_test_" + name);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testutil
