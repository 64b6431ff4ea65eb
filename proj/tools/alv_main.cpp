#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "alv/adapt.hpp"
#include "alv/errors.hpp"
#include "alv/io.hpp"
#include "alv/pipeline.hpp"
#include "alv/raster.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using nlohmann::json;

struct CommonFlags {
    alv::AlvConfig cfg;
    uint64_t seed = 0;
    int jobs = 0;  // 0 = available cores
};

json config_json(const alv::AlvConfig& cfg, uint64_t seed, int jobs) {
    return json{{"budget", cfg.global_budget},
                {"iters", cfg.total_iterations},
                {"adapt_start", cfg.add.activation_iteration},
                {"adapt_interval", cfg.add.interval},
                {"tau_p", cfg.prune.tau_p},
                {"temperature", cfg.add.temperature},
                {"target_loss", cfg.add.target_loss},
                {"window", cfg.add.window_size},
                {"n_min", cfg.add.n_min},
                {"n_max", cfg.add.n_max},
                {"lambda_mask", cfg.loss.lambda_mask},
                {"lr_points", cfg.optimizer.lr_points},
                {"lr_colors", cfg.optimizer.lr_colors},
                {"decay_ratio", cfg.optimizer.decay_ratio},
                {"smoothing", cfg.loss.smoothing},
                {"segments", cfg.segments_per_path},
                {"seed_radius", cfg.seed_radius},
                {"prune", cfg.prune_enabled},
                {"addition", cfg.addition_enabled},
                {"seed", seed},
                {"jobs", jobs}};
}

void add_hyper_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--budget", flags.cfg.global_budget, "initial primitive budget N0");
    cmd->add_option("--iters", flags.cfg.total_iterations, "optimizer iterations per layer");
    cmd->add_option("--adapt-start", flags.cfg.add.activation_iteration,
                    "iteration at which prune/add activates");
    cmd->add_option("--adapt-interval", flags.cfg.add.interval, "iterations between adapt passes");
    cmd->add_option("--tau-p", flags.cfg.prune.tau_p, "visible-alpha-area pruning threshold");
    cmd->add_option("--temperature", flags.cfg.add.temperature, "addition sampling temperature");
    cmd->add_option("--target-loss", flags.cfg.add.target_loss, "error budget target loss");
    cmd->add_option("--window", flags.cfg.add.window_size, "addition history window size");
    cmd->add_option("--n-min", flags.cfg.add.n_min, "minimum primitives per addition");
    cmd->add_option("--n-max", flags.cfg.add.n_max, "maximum primitives per addition");
    cmd->add_option("--lambda-mask", flags.cfg.loss.lambda_mask, "mask constraint weight");
    cmd->add_option("--lr-points", flags.cfg.optimizer.lr_points, "learning rate for points");
    cmd->add_option("--lr-colors", flags.cfg.optimizer.lr_colors,
                    "learning rate for colors and opacity");
    cmd->add_option("--decay-ratio", flags.cfg.optimizer.decay_ratio,
                    "final/initial learning rate ratio");
    cmd->add_option("--smoothing", flags.cfg.loss.smoothing, "soft coverage band width, px");
    cmd->add_option("--segments", flags.cfg.segments_per_path, "cubic segments per path");
    cmd->add_option("--seed-radius", flags.cfg.seed_radius, "seed primitive radius, px");
    cmd->add_flag_callback("--no-prune", [&flags] { flags.cfg.prune_enabled = false; },
                           "disable occlusion-aware pruning");
    cmd->add_flag_callback("--no-add", [&flags] { flags.cfg.addition_enabled = false; },
                           "disable importance-driven addition");
    cmd->add_option("--seed", flags.seed, "rng seed");
    cmd->add_option("--jobs", flags.jobs, "layer-level parallelism (0 = cores)");
}

int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string psnr_str(double v) { return alv::format_psnr(v); }

json metrics_json(const alv::MetricsEntry& m) {
    json j{{"mse", m.mse}, {"ssim", m.ssim}};
    if (std::isinf(m.psnr))
        j["psnr"] = "inf";
    else
        j["psnr"] = m.psnr;
    return j;
}

int cmd_vectorize(const std::string& input, const std::string& out_path, std::string trace_path,
                  std::string report_path, const CommonFlags& flags) {
    const auto t0 = std::chrono::steady_clock::now();
    alv::AlvConfig cfg = flags.cfg;
    cfg.rng_seed = flags.seed;
    cfg.prune.smoothing = cfg.loss.smoothing;

    std::cout << "config: " << config_json(cfg, flags.seed, flags.jobs).dump() << "\n";

    const alv::LoadedManifest loaded = alv::load_manifest(input);
    const int jobs = resolve_jobs(flags.jobs);
    alv::DocumentResult result = alv::vectorize_document(loaded.targets, cfg, jobs);
    result.doc.canvas_width = loaded.manifest.canvas_width;
    result.doc.canvas_height = loaded.manifest.canvas_height;

    alv::emit_svg(result.doc, out_path);

    if (trace_path.empty()) trace_path = out_path + ".trace.jsonl";
    if (report_path.empty()) report_path = out_path + ".metrics.json";

    {
        std::vector<std::string> ids;
        for (const alv::LayerTarget& t : loaded.targets) ids.push_back(t.layer_id);
        alv::write_traces_jsonl(result.traces, ids, trace_path);
    }

    // Per-layer metrics inside the mask, document metrics over white.
    json report;
    report["layers"] = json::array();
    int total_prims = 0;
    const alv::RenderConfig rc(result.doc.canvas_width, result.doc.canvas_height,
                               cfg.loss.smoothing);
    for (size_t i = 0; i < result.doc.layers.size(); ++i) {
        const alv::LayerVector& layer = result.doc.layers[i].layer;
        const alv::LayerTarget& target = loaded.targets[i];
        const alv::RenderOutput render = alv::composite(layer, rc);
        const alv::MetricsEntry m = alv::compute_metrics(render, target.image, &target.mask);
        total_prims += static_cast<int>(layer.primitives.size());
        json jl = metrics_json(m);
        jl["layer_id"] = layer.layer_id;
        jl["primitives"] = layer.primitives.size();
        report["layers"].push_back(std::move(jl));
    }
    const alv::RenderOutput doc_render = alv::render_document(result.doc, 1.0,
                                                              cfg.loss.smoothing);
    const alv::ImageF reference = alv::compose_targets_rgba(loaded.targets);
    const alv::MetricsEntry doc_metrics = alv::compute_metrics(doc_render, reference, nullptr);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                               .count();
    report["document"] = metrics_json(doc_metrics);
    report["document"]["primitives"] = total_prims;
    report["elapsed_s"] = elapsed;
    {
        std::ofstream out(report_path);
        if (!out) throw alv::runtime_failure("cannot write report '" + report_path + "'");
        out << report.dump(2) << "\n";
    }

    std::printf("document PSNR %s dB | %d primitives | %.1f s\n",
                psnr_str(doc_metrics.psnr).c_str(), total_prims, elapsed);
    std::printf("wrote %s, %s, %s\n", out_path.c_str(), trace_path.c_str(),
                report_path.c_str());
    return 0;
}

int cmd_render(const std::string& input, const std::string& out_path, double scale,
               double smoothing) {
    std::cout << "config: " << json{{"input", input}, {"out", out_path}, {"scale", scale},
                                    {"smoothing", smoothing}}
                                  .dump()
              << "\n";
    const alv::VectorDocument doc = alv::parse_svg_subset(input);
    const alv::RenderOutput render = alv::render_document(doc, scale, smoothing);
    alv::ImageF rgba(render.rgb.width, render.rgb.height, 4);
    for (int y = 0; y < rgba.height; ++y)
        for (int x = 0; x < rgba.width; ++x) {
            for (int c = 0; c < 3; ++c) rgba.at(x, y, c) = render.rgb.at(x, y, c);
            rgba.at(x, y, 3) = render.alpha.at(x, y);
        }
    alv::save_raster(out_path, rgba);
    std::printf("wrote %s (%dx%d)\n", out_path.c_str(), rgba.width, rgba.height);
    return 0;
}

int cmd_metrics(const std::string& a_path, const std::string& b_path,
                const std::string& mask_path, const std::string& out_path) {
    std::cout << "config: " << json{{"a", a_path}, {"b", b_path}, {"mask", mask_path}}.dump()
              << "\n";
    const alv::ImageF a = alv::load_raster_rgba(a_path);
    const alv::ImageF b = alv::load_raster_rgba(b_path);
    alv::MaskImage mask;
    const alv::MaskImage* mask_ptr = nullptr;
    if (!mask_path.empty()) {
        mask = alv::load_mask(mask_path);
        mask_ptr = &mask;
    }
    const alv::MetricsEntry m = alv::compute_metrics_images(a, b, mask_ptr);
    std::printf("MSE %.8f | PSNR %s dB | SSIM %.6f\n", m.mse, psnr_str(m.psnr).c_str(), m.ssim);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw alv::runtime_failure("cannot write report '" + out_path + "'");
        out << metrics_json(m).dump(2) << "\n";
    }
    return 0;
}

int cmd_inspect(const std::string& input, const std::string& out_path, double smoothing) {
    std::cout << "config: " << json{{"input", input}, {"smoothing", smoothing}}.dump() << "\n";
    const alv::VectorDocument doc = alv::parse_svg_subset(input);
    const alv::RenderConfig rc(doc.canvas_width, doc.canvas_height, smoothing);
    json report;
    report["layers"] = json::array();
    for (const alv::DocumentLayer& dl : doc.layers) {
        const auto scores = alv::contribution_scores(dl.layer, rc);
        const auto areas = alv::alpha_area_scores(dl.layer, rc);
        const auto fields = alv::cumulative_occlusion(dl.layer, rc);
        const alv::RenderOutput render = alv::composite(dl.layer, rc);

        // Conservation residual: max_p | sum_i alpha_i (1 - O_i) - composite alpha |
        alv::ImageF visible_sum(rc.width, rc.height, 1, 0.0);
        json prims = json::array();
        for (size_t i = 0; i < dl.layer.primitives.size(); ++i) {
            const alv::AlphaMap am = alv::primitive_alpha(dl.layer.primitives[i], rc);
            double occ_max = 0.0, occ_sum = 0.0;
            long long support = 0;
            for (int y = 0; y < rc.height; ++y)
                for (int x = 0; x < rc.width; ++x) {
                    const double a = am.values.at(x, y);
                    if (a <= 0.0) continue;
                    const double o = fields[i].values.at(x, y);
                    visible_sum.at(x, y) += a * (1.0 - o);
                    occ_max = std::max(occ_max, o);
                    occ_sum += o;
                    ++support;
                }
            prims.push_back(json{{"index", i},
                                 {"contribution", scores[i]},
                                 {"alpha_area", areas[i]},
                                 {"max_occlusion", occ_max},
                                 {"mean_occlusion", support ? occ_sum / support : 0.0},
                                 {"opacity", dl.layer.primitives[i].fill_opacity}});
        }
        double residual = 0.0;
        for (int y = 0; y < rc.height; ++y)
            for (int x = 0; x < rc.width; ++x)
                residual = std::max(residual,
                                    std::abs(visible_sum.at(x, y) - render.alpha.at(x, y)));
        report["layers"].push_back(json{{"layer_id", dl.layer.layer_id},
                                        {"primitives", prims},
                                        {"conservation_max_abs_residual", residual}});
        std::printf("layer %-12s %4zu primitives, conservation residual %.3g\n",
                    dl.layer.layer_id.c_str(), dl.layer.primitives.size(), residual);
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw alv::runtime_failure("cannot write report '" + out_path + "'");
        out << report.dump(2) << "\n";
    }
    return 0;
}

int cmd_prune_bench(const std::string& input, const std::string& reference_path,
                    std::vector<std::string> strategies, std::vector<double> ratios,
                    const std::string& out_path, double smoothing) {
    if (strategies.empty()) strategies = {"area", "opacity", "oracle", "occlusion_aware"};
    if (ratios.empty()) ratios = {0.1, 0.2, 0.3};
    std::cout << "config: " << json{{"input", input},
                                    {"reference", reference_path},
                                    {"strategies", strategies},
                                    {"ratios", ratios},
                                    {"smoothing", smoothing}}
                                  .dump()
              << "\n";

    const alv::VectorDocument doc = alv::parse_svg_subset(input);
    const alv::ImageF reference = alv::load_raster_rgba(reference_path);
    if (reference.width != doc.canvas_width || reference.height != doc.canvas_height)
        throw alv::validation_error("reference raster does not match the SVG canvas");

    // Pruning needs a LayerTarget shape; the benchmark scores against renders,
    // so an all-ones mask over the reference stands in.
    std::vector<alv::LayerTarget> targets;
    for (const alv::DocumentLayer& dl : doc.layers) {
        alv::MaskImage mask(doc.canvas_width, doc.canvas_height, 1);
        targets.push_back(alv::make_layer_target(reference, std::move(mask), dl.layer.layer_id));
    }

    json rows = json::array();
    std::printf("%-7s %-16s %-12s %-9s %-8s %-10s\n", "ratio", "method", "MSE", "PSNR", "SSIM",
                "runtime_s");
    for (double ratio : ratios) {
        for (const std::string& name : strategies) {
            alv::PruneConfig pc;
            pc.strategy = alv::prune_strategy_from_name(name);
            pc.ratio = ratio;
            pc.smoothing = smoothing;
            alv::VectorDocument pruned = doc;
            const auto t0 = std::chrono::steady_clock::now();
            for (size_t i = 0; i < pruned.layers.size(); ++i) {
                alv::PruneResult r = alv::prune(pruned.layers[i].layer, targets[i], pc);
                pruned.layers[i].layer = std::move(r.layer);
            }
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const alv::RenderOutput render = alv::render_document(pruned, 1.0, smoothing);
            const alv::MetricsEntry m = alv::compute_metrics(render, reference, nullptr);
            std::printf("%-7.2f %-16s %-12.3e %-9s %-8.4f %-10.4f\n", ratio, name.c_str(), m.mse,
                        psnr_str(m.psnr).c_str(), m.ssim, elapsed);
            json row = metrics_json(m);
            row["ratio"] = ratio;
            row["method"] = name;
            row["runtime_s"] = elapsed;
            rows.push_back(std::move(row));
        }
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw alv::runtime_failure("cannot write report '" + out_path + "'");
        out << rows.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive layered vectorization of raster layer stacks"};
    app.require_subcommand(0, 1);

    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults, "dump the default configuration and exit");

    CommonFlags flags;
    std::string input, out_path, trace_path, report_path;
    double scale = 1.0, render_smoothing = 1.0;
    std::string mask_path, a_path, b_path;
    std::vector<std::string> strategies;
    std::vector<double> ratios;

    auto* vec = app.add_subcommand("vectorize", "vectorize a layer manifest into an SVG");
    vec->add_option("--input", input, "layer manifest (JSON)")->required();
    vec->add_option("--out", out_path, "output SVG path")->required();
    vec->add_option("--trace", trace_path, "run trace path (default <out>.trace.jsonl)");
    vec->add_option("--report", report_path, "metrics report path (default <out>.metrics.json)");
    add_hyper_flags(vec, flags);

    auto* ren = app.add_subcommand("render", "render an SVG subset file to PNG");
    ren->add_option("--input", input, "input SVG")->required();
    ren->add_option("--out", out_path, "output PNG")->required();
    ren->add_option("--scale", scale, "resolution scale factor");
    ren->add_option("--smoothing", render_smoothing, "soft coverage band width, px");

    auto* met = app.add_subcommand("metrics", "MSE/PSNR/SSIM between two rasters");
    met->add_option("a", a_path, "first raster")->required();
    met->add_option("b", b_path, "second raster")->required();
    met->add_option("--mask", mask_path, "restrict metrics to a mask");
    met->add_option("--out", out_path, "write the report as JSON");

    auto* ins = app.add_subcommand("inspect", "per-primitive contribution and occlusion report");
    ins->add_option("--input", input, "input SVG")->required();
    ins->add_option("--out", out_path, "write the report as JSON");
    ins->add_option("--smoothing", render_smoothing, "soft coverage band width, px");

    auto* pb = app.add_subcommand("prune-bench", "compare pruning strategies on an SVG");
    pb->add_option("--input", input, "input SVG")->required();
    pb->add_option("--reference", a_path, "reference raster")->required();
    pb->add_option("--strategy", strategies,
                   "strategies (area, opacity, oracle, occlusion_aware)");
    pb->add_option("--ratio", ratios, "pruning ratios in [0,1)");
    pb->add_option("--out", out_path, "write the report as JSON");
    pb->add_option("--smoothing", render_smoothing, "soft coverage band width, px");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // bad flags are validation errors
    }

    try {
        if (print_defaults) {
            std::cout << config_json(alv::AlvConfig{}, 0, 0).dump(2) << "\n";
            return 0;
        }
        if (vec->parsed())
            return cmd_vectorize(input, out_path, trace_path, report_path, flags);
        if (ren->parsed()) return cmd_render(input, out_path, scale, render_smoothing);
        if (met->parsed()) return cmd_metrics(a_path, b_path, mask_path, out_path);
        if (ins->parsed()) return cmd_inspect(input, out_path, render_smoothing);
        if (pb->parsed())
            return cmd_prune_bench(input, a_path, strategies, ratios, out_path,
                                   render_smoothing);
        std::cout << app.help() << "\n";
        return 0;
    } catch (const alv::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
}
