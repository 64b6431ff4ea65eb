#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alv/errors.hpp"
#include "alv/io.hpp"
#include "alv/pipeline.hpp"
#include "alv/synthetic.hpp"
#include "support.hpp"

using namespace alv;

namespace {

AlvConfig small_cfg(int budget, int iters, uint64_t seed) {
    AlvConfig cfg;
    cfg.global_budget = budget;
    cfg.total_iterations = iters;
    cfg.add.activation_iteration = std::min(100, iters / 3);
    cfg.add.interval = 50;
    cfg.add.n_min = 2;
    cfg.add.n_max = 12;
    cfg.rng_seed = seed;
    return cfg;
}

double inside_mask_psnr(const LayerVector& layer, const LayerTarget& target, double smoothing) {
    const RenderOutput out =
        composite(layer, RenderConfig(target.image.width, target.image.height, smoothing));
    const MetricsEntry m = compute_metrics(out, target.image, &target.mask);
    return m.psnr;
}

}  // namespace

TEST_CASE("budget 1 on a disk target seeds one primitive inside with the disk color") {
    const LayerTarget target = synthetic::disk_target(32, 32, {16, 16}, 9, {0.1, 0.6, 0.3},
                                                      "disk");
    AlvConfig cfg;
    const LayerVector layer = content_adaptive_init(target, 1, 5, cfg);
    REQUIRE(layer.primitives.size() == 1);
    // Center of the seed: average the anchors.
    Vec2 c{0, 0};
    int n = 0;
    for (int j = 0; j < layer.primitives[0].segment_count(); ++j) {
        c += layer.primitives[0].segment(j).p0;
        ++n;
    }
    c = {c.x / n, c.y / n};
    CHECK(target.mask.at(static_cast<int>(c.x), static_cast<int>(c.y)) == 1);
    CHECK(layer.primitives[0].fill_rgb[1] == doctest::Approx(0.6).epsilon(1e-9));
    CHECK_THROWS_AS(content_adaptive_init(target, 0, 5, cfg), validation_error);
}

TEST_CASE("proportional budget split: 1000 and 3000 px under 512") {
    CHECK(allocate_budgets({1000, 3000}, 512) == std::vector<int>{128, 384});
    // Remainder goes to the largest layers, minimum one each.
    const auto b = allocate_budgets({10, 10, 10}, 2);
    CHECK(b.size() == 3);
    for (int v : b) CHECK(v >= 1);
    CHECK(allocate_budgets({1, 999}, 10) == std::vector<int>{1, 9});
}

TEST_CASE("all init centers respect the mask over 100 random targets") {
    for (int t = 0; t < 100; ++t) {
        Rng rng(4000 + t);
        const int w = 24, h = 24;
        const LayerTarget target = synthetic::disk_target(
            w, h, {rng.uniform(6.0, 18.0), rng.uniform(6.0, 18.0)}, rng.uniform(3.0, 8.0),
            {rng.uniform(), rng.uniform(), rng.uniform()}, "d");
        AlvConfig cfg;
        const LayerVector layer = content_adaptive_init(target, 12, 700 + t, cfg);
        for (const PathPrimitive& prim : layer.primitives) {
            Vec2 c{0, 0};
            for (int j = 0; j < prim.segment_count(); ++j) c += prim.segment(j).p0;
            c = {c.x / prim.segment_count(), c.y / prim.segment_count()};
            REQUIRE(target.mask.at(static_cast<int>(c.x), static_cast<int>(c.y)) == 1);
        }
    }
}

TEST_CASE("flat disk run reaches 35 dB inside the mask") {
    const LayerTarget target = synthetic::disk_target(48, 48, {24, 24}, 14, {0.75, 0.25, 0.2},
                                                      "disk");
    AlvConfig cfg = small_cfg(8, 600, 11);
    cfg.add.target_loss = 1e-4;  // demand more fidelity than the run-level default
    const RunResult res = run_alv(target, cfg);
    CHECK(inside_mask_psnr(res.layer, target, cfg.loss.smoothing) >= 35.0);
}

TEST_CASE("an already-met loss target means nothing is ever added") {
    const LayerTarget target = synthetic::disk_target(32, 32, {16, 16}, 10, {0.3, 0.3, 0.8},
                                                      "disk");
    AlvConfig cfg = small_cfg(6, 300, 3);
    cfg.add.target_loss = 1.0;  // effectively infinity for a mean-squared loss in [0,1]
    const RunResult res = run_alv(target, cfg);
    for (const TraceRecord& r : res.trace.records) CHECK(r.n_added == 0);
}

TEST_CASE("pruning an over-seeded flat target sheds primitives without losing fidelity") {
    const LayerTarget target = synthetic::disk_target(40, 40, {20, 20}, 13, {0.2, 0.5, 0.8},
                                                      "disk");
    // Both runs are driven to an unreachable fidelity target so neither stops
    // early; tau is scaled to the small canvas.  At the resulting 50+ dB
    // floors the per-run loss ratio is noisy, so the 10% bound is checked on
    // the median over fixed seeds.
    std::vector<double> ratios;
    for (uint64_t seed : {9u, 10u, 11u, 12u}) {
        AlvConfig with_prune = small_cfg(20, 1200, seed);
        with_prune.add.target_loss = 5e-6;
        with_prune.prune.tau_p = 2.0;
        AlvConfig no_prune = with_prune;
        no_prune.prune_enabled = false;

        const RunResult pruned = run_alv(target, with_prune);
        const RunResult kept = run_alv(target, no_prune);
        CHECK(pruned.layer.primitives.size() < kept.layer.primitives.size());
        const double loss_pruned = compute_loss(pruned.layer, target, with_prune.loss).total;
        const double loss_kept = compute_loss(kept.layer, target, no_prune.loss).total;
        ratios.push_back(loss_pruned / loss_kept);
    }
    std::sort(ratios.begin(), ratios.end());
    const double median = 0.5 * (ratios[1] + ratios[2]);
    CHECK(median <= 1.10);
}

TEST_CASE("identical config and seed reproduce the document bit for bit") {
    const LayerTarget target = synthetic::disk_target(32, 32, {15, 17}, 9, {0.6, 0.4, 0.2},
                                                      "disk");
    AlvConfig cfg = small_cfg(10, 260, 21);
    const RunResult a = run_alv(target, cfg);
    const RunResult b = run_alv(target, cfg);
    REQUIRE(a.layer.primitives.size() == b.layer.primitives.size());
    for (size_t i = 0; i < a.layer.primitives.size(); ++i) {
        CHECK(a.layer.primitives[i].points == b.layer.primitives[i].points);
        CHECK(a.layer.primitives[i].fill_rgb == b.layer.primitives[i].fill_rgb);
        CHECK(a.layer.primitives[i].fill_opacity == b.layer.primitives[i].fill_opacity);
    }
}

TEST_CASE("trace primitive counts satisfy the budget recurrence") {
    const LayerTarget target = synthetic::star_target(48, 48, {24, 24}, 18, 8, 5,
                                                      {0.9, 0.7, 0.2}, "star");
    AlvConfig cfg = small_cfg(12, 500, 33);
    const RunResult res = run_alv(target, cfg);
    REQUIRE(res.trace.records.size() >= 2);
    for (size_t k = 1; k + 1 < res.trace.records.size(); ++k) {
        const TraceRecord& prev = res.trace.records[k - 1];
        const TraceRecord& cur = res.trace.records[k];
        CHECK(cur.primitive_count == prev.primitive_count + cur.n_added - cur.n_pruned);
        CHECK(cur.iteration > prev.iteration);
    }
}

TEST_CASE("feedback regulation: additions shrink while the loss shrinks") {
    const LayerTarget target = synthetic::disk_target(40, 40, {20, 20}, 12, {0.8, 0.3, 0.3},
                                                      "disk");
    AlvConfig cfg = small_cfg(6, 700, 17);
    const RunResult res = run_alv(target, cfg);
    // Consider only the adapt checkpoints; where the loss decreased
    // monotonically, n_added must not grow.
    const auto& recs = res.trace.records;
    for (size_t k = 2; k + 1 < recs.size(); ++k) {
        if (recs[k - 1].n_added == 0 || recs[k].n_added == 0) continue;
        if (recs[k].loss.total <= recs[k - 1].loss.total)
            CHECK(recs[k].n_added <= recs[k - 1].n_added);
    }
}

TEST_CASE("mask confinement: exterior alpha stays below 2%") {
    const LayerTarget target = synthetic::disk_target(48, 48, {24, 24}, 13, {0.2, 0.7, 0.4},
                                                      "disk");
    AlvConfig cfg = small_cfg(10, 600, 29);
    const RunResult res = run_alv(target, cfg);
    const RenderOutput out = composite(res.layer, RenderConfig(48, 48, cfg.loss.smoothing));
    double exterior = 0.0;
    long long count = 0;
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x) {
            if (target.mask.at(x, y)) continue;
            exterior += out.alpha.at(x, y);
            ++count;
        }
    CHECK(exterior / count < 0.02);
}

TEST_CASE("single-layer manifest equals the direct run wrapped in a document") {
    const LayerTarget target = synthetic::disk_target(32, 32, {16, 14}, 9, {0.5, 0.2, 0.7},
                                                      "disk");
    AlvConfig cfg = small_cfg(10, 260, 41);
    const RunResult direct = run_alv(target, cfg);
    const DocumentResult doc = vectorize_document({target}, cfg, 1);
    REQUIRE(doc.doc.layers.size() == 1);
    REQUIRE(doc.doc.layers[0].layer.primitives.size() == direct.layer.primitives.size());
    for (size_t i = 0; i < direct.layer.primitives.size(); ++i)
        CHECK(doc.doc.layers[0].layer.primitives[i].points == direct.layer.primitives[i].points);
}

TEST_CASE("two-layer manifest reproduces the composite scene") {
    std::vector<LayerTarget> targets;
    targets.push_back(synthetic::gradient_target(48, 48, {0.25, 0.4, 0.6}, {0.5, 0.6, 0.75},
                                                 "bg"));
    targets.push_back(synthetic::disk_target(48, 48, {26, 22}, 11, {0.85, 0.3, 0.2}, "disk"));
    AlvConfig cfg = small_cfg(40, 500, 51);
    const DocumentResult res = vectorize_document(targets, cfg, 1);
    REQUIRE(res.doc.layers.size() == 2);

    const RenderOutput render = render_document(res.doc, 1.0, cfg.loss.smoothing);
    const ImageF reference = compose_targets_rgba(targets);
    const MetricsEntry m = compute_metrics(render, reference, nullptr);
    CHECK(m.psnr >= 28.0);

    // Layers render independently: dropping the top layer leaves the bottom
    // layer's own render untouched.
    VectorDocument bottom_only = res.doc;
    bottom_only.layers.pop_back();
    const RenderOutput bottom_doc = render_document(bottom_only, 1.0, cfg.loss.smoothing);
    const RenderOutput bottom_direct =
        composite(res.doc.layers[0].layer, RenderConfig(48, 48, cfg.loss.smoothing));
    for (size_t k = 0; k < bottom_doc.alpha.data.size(); ++k)
        CHECK(bottom_doc.alpha.data[k] == doctest::Approx(bottom_direct.alpha.data[k]));
}

TEST_CASE("vectorize_document propagates layer failures with the layer name") {
    CHECK_THROWS_AS(vectorize_document({}, AlvConfig{}, 1), validation_error);
}

TEST_CASE("layer-parallel execution matches the sequential result") {
    std::vector<LayerTarget> targets;
    targets.push_back(synthetic::disk_target(32, 32, {12, 12}, 8, {0.2, 0.6, 0.4}, "a"));
    targets.push_back(synthetic::disk_target(32, 32, {20, 20}, 7, {0.7, 0.2, 0.5}, "b"));
    AlvConfig cfg = small_cfg(12, 220, 61);
    const DocumentResult seq = vectorize_document(targets, cfg, 1);
    const DocumentResult par = vectorize_document(targets, cfg, 2);
    REQUIRE(seq.doc.layers.size() == par.doc.layers.size());
    for (size_t l = 0; l < seq.doc.layers.size(); ++l) {
        const auto& a = seq.doc.layers[l].layer.primitives;
        const auto& b = par.doc.layers[l].layer.primitives;
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].points == b[i].points);
    }
}
