#include <cmath>
#include <limits>
#include <vector>

#include "alv/errors.hpp"
#include "alv/io.hpp"

namespace alv {

namespace {

// RGB over white from an RGBA (or RGB) image.
ImageF over_white(const ImageF& img) {
    ImageF out(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double a = img.channels >= 4 ? img.at(x, y, 3) : 1.0;
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = img.at(x, y, c) * a + (1.0 - a);
        }
    }
    return out;
}

ImageF strip_alpha(const ImageF& img) {
    ImageF out(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, c);
    return out;
}

ImageF over_white(const RenderOutput& r) {
    ImageF out(r.rgb.width, r.rgb.height, 3);
    for (int y = 0; y < r.rgb.height; ++y) {
        for (int x = 0; x < r.rgb.width; ++x) {
            const double a = r.alpha.at(x, y);
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = r.rgb.at(x, y, c) * a + (1.0 - a);
        }
    }
    return out;
}

double mse_rgb(const ImageF& a, const ImageF& b, const MaskImage* mask) {
    double acc = 0.0;
    long long count = 0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            if (mask && !mask->at(x, y)) continue;
            for (int c = 0; c < 3; ++c) {
                const double d = a.at(x, y, c) - b.at(x, y, c);
                acc += d * d;
            }
            ++count;
        }
    }
    if (count == 0) throw validation_error("metric mask selects no pixels");
    return acc / (3.0 * static_cast<double>(count));
}

// SSIM with an 11x11 Gaussian window (sigma 1.5), k1=0.01, k2=0.03, peak 1,
// averaged over channels.  Windows are fully interior ("valid" placement);
// images smaller than the window fall back to a single global window.
double ssim_channel(const ImageF& a, const ImageF& b, int c, const MaskImage* mask) {
    constexpr int kRadius = 5;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;

    static const std::vector<double> kWeights = [] {
        std::vector<double> w(11 * 11);
        double sum = 0.0;
        for (int dy = -kRadius; dy <= kRadius; ++dy)
            for (int dx = -kRadius; dx <= kRadius; ++dx) {
                const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5));
                w[(dy + kRadius) * 11 + (dx + kRadius)] = g;
                sum += g;
            }
        for (double& v : w) v /= sum;
        return w;
    }();

    const int W = a.width, H = a.height;
    if (W < 11 || H < 11) {
        // Global statistics with uniform weights.
        double ma = 0, mb = 0;
        const double n = static_cast<double>(W) * H;
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                ma += a.at(x, y, c);
                mb += b.at(x, y, c);
            }
        ma /= n;
        mb /= n;
        double va = 0, vb = 0, cov = 0;
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const double da = a.at(x, y, c) - ma, db = b.at(x, y, c) - mb;
                va += da * da;
                vb += db * db;
                cov += da * db;
            }
        va /= n;
        vb /= n;
        cov /= n;
        return ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
               ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
    }

    double acc = 0.0;
    long long count = 0;
    for (int y = kRadius; y < H - kRadius; ++y) {
        for (int x = kRadius; x < W - kRadius; ++x) {
            if (mask && !mask->at(x, y)) continue;
            double ma = 0, mb = 0;
            for (int dy = -kRadius; dy <= kRadius; ++dy)
                for (int dx = -kRadius; dx <= kRadius; ++dx) {
                    const double w = kWeights[(dy + kRadius) * 11 + (dx + kRadius)];
                    ma += w * a.at(x + dx, y + dy, c);
                    mb += w * b.at(x + dx, y + dy, c);
                }
            double va = 0, vb = 0, cov = 0;
            for (int dy = -kRadius; dy <= kRadius; ++dy)
                for (int dx = -kRadius; dx <= kRadius; ++dx) {
                    const double w = kWeights[(dy + kRadius) * 11 + (dx + kRadius)];
                    const double da = a.at(x + dx, y + dy, c) - ma;
                    const double db = b.at(x + dx, y + dy, c) - mb;
                    va += w * da * da;
                    vb += w * db * db;
                    cov += w * da * db;
                }
            acc += ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
                   ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
            ++count;
        }
    }
    if (count == 0) throw validation_error("metric mask selects no interior windows");
    return acc / static_cast<double>(count);
}

MetricsEntry metrics_from_rgb(const ImageF& a, const ImageF& b, const MaskImage* mask) {
    if (!a.same_shape(b)) throw validation_error("metric inputs have different dimensions");
    MetricsEntry entry;
    entry.mse = mse_rgb(a, b, mask);
    entry.psnr = entry.mse > 0.0 ? 10.0 * std::log10(1.0 / entry.mse)
                                 : std::numeric_limits<double>::infinity();
    double ssim = 0.0;
    for (int c = 0; c < 3; ++c) ssim += ssim_channel(a, b, c, mask);
    entry.ssim = ssim / 3.0;
    return entry;
}

}  // namespace

// Document-level comparisons composite on white; mask-restricted (per-layer)
// comparisons use the straight RGB channels, matching the reconstruction
// objective which fits colors rather than white-composited values.
MetricsEntry compute_metrics(const RenderOutput& rendered, const ImageF& reference,
                             const MaskImage* mask) {
    if (rendered.rgb.width != reference.width || rendered.rgb.height != reference.height)
        throw validation_error("rendered and reference dimensions differ");
    if (mask && (mask->width != reference.width || mask->height != reference.height))
        throw validation_error("metric mask dimensions differ from the images");
    if (mask) return metrics_from_rgb(strip_alpha(rendered.rgb), strip_alpha(reference), mask);
    return metrics_from_rgb(over_white(rendered), over_white(reference), nullptr);
}

MetricsEntry compute_metrics_images(const ImageF& a, const ImageF& b, const MaskImage* mask) {
    if (a.width != b.width || a.height != b.height)
        throw validation_error("metric inputs have different dimensions");
    if (mask && (mask->width != a.width || mask->height != a.height))
        throw validation_error("metric mask dimensions differ from the images");
    if (mask) return metrics_from_rgb(strip_alpha(a), strip_alpha(b), mask);
    return metrics_from_rgb(over_white(a), over_white(b), nullptr);
}

RenderOutput render_document(const VectorDocument& doc, double scale, double smoothing) {
    if (scale <= 0.0) throw validation_error("render scale must be positive");
    const int W = static_cast<int>(std::llround(doc.canvas_width * scale));
    const int H = static_cast<int>(std::llround(doc.canvas_height * scale));
    RenderConfig rc(W, H, smoothing);

    RenderOutput out;
    out.rgb = ImageF(W, H, 3, 0.0);
    out.alpha = ImageF(W, H, 1, 0.0);
    ImageF premult(W, H, 3, 0.0);
    for (const DocumentLayer& dl : doc.layers) {
        LayerVector scaled = dl.layer;
        if (scale != 1.0) {
            for (PathPrimitive& prim : scaled.primitives)
                for (Vec2& p : prim.points) p = {p.x * scale, p.y * scale};
        }
        const RenderOutput lr = composite(scaled, rc);
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                const double a = lr.alpha.at(x, y);
                if (a == 0.0) continue;
                const double keep = 1.0 - a;
                for (int c = 0; c < 3; ++c)
                    premult.at(x, y, c) = premult.at(x, y, c) * keep + lr.rgb.at(x, y, c) * a;
                out.alpha.at(x, y) = out.alpha.at(x, y) * keep + a;
            }
        }
    }
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double a = out.alpha.at(x, y);
            if (a > 0.0)
                for (int c = 0; c < 3; ++c) out.rgb.at(x, y, c) = premult.at(x, y, c) / a;
        }
    return out;
}

ImageF compose_targets_rgba(const std::vector<LayerTarget>& targets) {
    if (targets.empty()) throw validation_error("no targets to compose");
    const int W = targets.front().image.width, H = targets.front().image.height;
    ImageF out(W, H, 4, 0.0);
    for (const LayerTarget& t : targets) {
        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                const double a = t.image.at(x, y, 3);
                if (a == 0.0) continue;
                const double keep = 1.0 - a;
                for (int c = 0; c < 3; ++c) {
                    // premultiplied accumulation in channels 0..2
                    out.at(x, y, c) = out.at(x, y, c) * keep + t.image.at(x, y, c) * a;
                }
                out.at(x, y, 3) = out.at(x, y, 3) * keep + a;
            }
        }
    }
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double a = out.at(x, y, 3);
            if (a > 0.0)
                for (int c = 0; c < 3; ++c) out.at(x, y, c) /= a;
        }
    return out;
}

std::string format_psnr(double psnr) {
    if (std::isinf(psnr)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", psnr);
    return buf;
}

}  // namespace alv
