#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "alv/image.hpp"
#include "alv/pipeline.hpp"
#include "alv/raster.hpp"
#include "alv/scene.hpp"

namespace alv {

// --- raster files -----------------------------------------------------------

ImageF load_raster_rgba(const std::filesystem::path& path);
void save_raster(const std::filesystem::path& path, const ImageF& image);  // 1/3/4 channels

// Grayscale mask, thresholded at 0.5.  Rejects masks where more than 5% of
// the pixels fall in the ambiguous (0.25, 0.75) range.
MaskImage load_mask(const std::filesystem::path& path);

// --- layer manifest ---------------------------------------------------------

struct ManifestEntry {
    std::string layer_id;
    std::string image_path;
    std::string mask_path;
    long long z = 0;
};

struct LayerManifest {
    int canvas_width = 0;
    int canvas_height = 0;
    std::vector<ManifestEntry> entries;  // strictly increasing z
};

struct LoadedManifest {
    LayerManifest manifest;
    std::vector<LayerTarget> targets;  // decoded, validated, z order
};

LoadedManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const LayerManifest& manifest);

// --- SVG subset -------------------------------------------------------------

std::string svg_to_string(const VectorDocument& doc);
void emit_svg(const VectorDocument& doc, const std::filesystem::path& path);

VectorDocument parse_svg_string(const std::string& text);
VectorDocument parse_svg_subset(const std::filesystem::path& path);

// --- lossless internal document format ---------------------------------------

void save_document_json(const VectorDocument& doc, const std::filesystem::path& path);
VectorDocument load_document_json(const std::filesystem::path& path);

// --- metrics ----------------------------------------------------------------

struct MetricsEntry {
    double mse = 0.0;
    double psnr = 0.0;  // +infinity when mse == 0
    double ssim = 0.0;
};

// RGB comparison after compositing both sides on white; restricted to the
// mask when one is given.
MetricsEntry compute_metrics(const RenderOutput& rendered, const ImageF& reference,
                             const MaskImage* mask = nullptr);
MetricsEntry compute_metrics_images(const ImageF& a, const ImageF& b,
                                    const MaskImage* mask = nullptr);

// Renders every layer of the document stacked back-to-front.
RenderOutput render_document(const VectorDocument& doc, double scale = 1.0,
                             double smoothing = 1.0);

// Back-to-front over-composite of the raw layer targets (the reference a
// vectorized document is judged against).
ImageF compose_targets_rgba(const std::vector<LayerTarget>& targets);

// --- traces and reports -----------------------------------------------------

void write_trace_jsonl(const RunTrace& trace, const std::filesystem::path& path);

// One file for a multi-layer run; each record carries its layer id.
void write_traces_jsonl(const std::vector<RunTrace>& traces,
                        const std::vector<std::string>& layer_ids,
                        const std::filesystem::path& path);

std::string format_psnr(double psnr);  // "inf" sentinel for infinite PSNR

}  // namespace alv
