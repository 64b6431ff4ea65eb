#include "alv/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "alv/errors.hpp"
#include "alv/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace alv {

namespace {

uint64_t derive_seed(uint64_t seed, uint64_t stream) {
    // splitmix64 of (seed, stream)
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

LayerVector content_adaptive_init(const LayerTarget& target, int budget, uint64_t rng_seed,
                                  const AlvConfig& cfg) {
    if (budget < 1) throw validation_error("initial budget must be at least 1");
    LayerVector empty;
    empty.layer_id = target.layer_id;
    const ErrorField field = build_error_field(empty, target, cfg.loss);
    // Plain proportional weighting at init; centers land inside the mask by
    // construction (the field is zero outside, as is the uniform fallback).
    const auto coords = sample_additions(field, budget, 1.0, rng_seed);
    return add_primitives(empty, target, coords, cfg.seed_radius, cfg.segments_per_path);
}

namespace {

void validate_config(const AlvConfig& cfg) {
    if (cfg.total_iterations < 1) throw validation_error("need at least one iteration");
    if (cfg.global_budget < 1) throw validation_error("initial budget must be at least 1");
    if (cfg.add.interval < 1) throw validation_error("adapt interval must be >= 1");
    if (cfg.add.activation_iteration >= cfg.total_iterations)
        throw validation_error("adapt activation must precede the iteration budget");
    if (cfg.add.n_min > cfg.add.n_max) throw validation_error("n_min must not exceed n_max");
    if (cfg.add.window_size < 1) throw validation_error("window size must be at least 1");
    if (!(cfg.add.temperature > 0.0)) throw validation_error("temperature must be positive");
    if (cfg.loss.lambda_mask < 0.0)
        throw validation_error("mask constraint weight must be non-negative");
    if (!(cfg.loss.smoothing > 0.0)) throw validation_error("smoothing must be positive");
    if (cfg.segments_per_path < 2)
        throw validation_error("need at least 2 segments per path");
    if (!(cfg.seed_radius > 0.0)) throw validation_error("seed radius must be positive");
}

}  // namespace

RunResult run_alv(const LayerTarget& target, const AlvConfig& cfg) {
    validate_config(cfg);

    const auto t0 = std::chrono::steady_clock::now();

    RunResult res;
    res.layer = content_adaptive_init(target, cfg.global_budget, cfg.rng_seed, cfg);

    OptimizerConfig opt_cfg = cfg.optimizer;
    opt_cfg.total_steps = cfg.total_iterations;
    OptimizerState optimizer(res.layer, opt_cfg);

    AdditionHistory history(cfg.add.window_size);
    bool pending = false;
    double pending_loss_before = 0.0;
    int pending_n = 0;

    res.trace.records.push_back({0, LossBreakdown{}, static_cast<int>(res.layer.primitives.size()),
                                 0, 0, 0.0, seconds_since(t0)});

    LayerGradients grads;
    const int last_adapt = cfg.total_iterations - cfg.add.interval;
    for (int it = 1; it <= cfg.total_iterations; ++it) {
        const LossBreakdown loss = compute_gradients(res.layer, target, cfg.loss, grads);
        if (!std::isfinite(loss.total))
            throw runtime_failure("non-finite loss at iteration " + std::to_string(it) +
                                  " for layer '" + target.layer_id + "'");
        optimizer.step(res.layer, grads);

        const bool adapt_now = it >= cfg.add.activation_iteration && it <= last_adapt &&
                               (it - cfg.add.activation_iteration) % cfg.add.interval == 0;
        if (!adapt_now) continue;

        LossBreakdown now = compute_loss(res.layer, target, cfg.loss);
        if (pending) {
            history.push({pending_loss_before, now.total, pending_n});
            pending = false;
        }

        int n_pruned = 0;
        if (cfg.prune_enabled && !res.layer.primitives.empty()) {
            PruneConfig pc = cfg.prune;
            pc.smoothing = cfg.loss.smoothing;
            pc.flatten_samples = cfg.loss.flatten_samples;
            PruneResult pr = prune(res.layer, target, pc);
            if (!pr.removed.empty()) {
                optimizer.erase_primitives(res.layer, pr.removed);
                res.layer = std::move(pr.layer);
                n_pruned = static_cast<int>(pr.removed.size());
                now = compute_loss(res.layer, target, cfg.loss);
            }
        }

        int n_added = 0;
        double marginal = 0.0;
        if (cfg.addition_enabled) {
            marginal = history.empty() || history.mean_marginal() <= 0.0
                           ? cfg.add.seed_marginal
                           : history.mean_marginal();
            n_added = estimate_addition_count(history, now.total, cfg.add);
            if (n_added > 0) {
                const ErrorField field = build_error_field(res.layer, target, cfg.loss);
                const auto coords = sample_additions(field, n_added, cfg.add.temperature,
                                                     derive_seed(cfg.rng_seed, it));
                res.layer = add_primitives(res.layer, target, coords, cfg.seed_radius,
                                           cfg.segments_per_path);
                optimizer.append_primitives(n_added, cfg.segments_per_path * 3);
                pending = true;
                pending_loss_before = now.total;
                pending_n = n_added;
            }
        }

        res.trace.records.push_back({it, now, static_cast<int>(res.layer.primitives.size()),
                                     n_pruned, n_added, marginal, seconds_since(t0)});

        if (now.total <= cfg.add.target_loss && !pending) break;
    }

    const LossBreakdown final_loss = compute_loss(res.layer, target, cfg.loss);
    res.trace.records.push_back({cfg.total_iterations, final_loss,
                                 static_cast<int>(res.layer.primitives.size()), 0, 0, 0.0,
                                 seconds_since(t0)});
    return res;
}

std::vector<int> allocate_budgets(const std::vector<long long>& mask_areas, int global_budget) {
    const int k = static_cast<int>(mask_areas.size());
    if (k == 0) throw validation_error("no layers to allocate budget for");
    const long long total = std::accumulate(mask_areas.begin(), mask_areas.end(), 0LL);
    if (total <= 0) throw validation_error("total mask area must be positive");

    std::vector<int> budgets(k);
    long long assigned = 0;
    for (int i = 0; i < k; ++i) {
        budgets[i] = std::max<long long>(
            1, static_cast<long long>(std::floor(static_cast<double>(global_budget) *
                                                 mask_areas[i] / static_cast<double>(total))));
        assigned += budgets[i];
    }
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return mask_areas[a] > mask_areas[b]; });
    long long remainder = global_budget - assigned;
    for (int i = 0; remainder > 0; i = (i + 1) % k, --remainder) ++budgets[order[i]];
    for (int i = 0; remainder < 0 && i < k;) {
        if (budgets[order[i]] > 1) {
            --budgets[order[i]];
            ++remainder;
            i = (i + 1) % k;
        } else {
            ++i;  // never starve a layer below 1
        }
    }
    return budgets;
}

DocumentResult vectorize_document(const std::vector<LayerTarget>& targets, const AlvConfig& cfg,
                                  int jobs) {
    if (targets.empty()) throw validation_error("manifest contains no layers");
    validate_config(cfg);  // config problems fail fast as validation errors
    const int k = static_cast<int>(targets.size());

    std::vector<long long> areas;
    areas.reserve(k);
    for (const LayerTarget& t : targets) areas.push_back(t.mask.count_nonzero());
    const std::vector<int> budgets = allocate_budgets(areas, cfg.global_budget);

    DocumentResult res;
    res.doc.canvas_width = targets.front().image.width;
    res.doc.canvas_height = targets.front().image.height;
    res.doc.layers.resize(k);
    res.traces.resize(k);

    const int workers = std::max(1, std::min(jobs, k));
#ifdef _OPENMP
    const int omp_before = omp_get_max_threads();
    if (workers > 1) omp_set_num_threads(std::max(1, omp_before / workers));
#endif

    std::atomic<int> next{0};
    std::vector<std::string> failures(k);
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < k; i = next.fetch_add(1)) {
            AlvConfig layer_cfg = cfg;
            layer_cfg.global_budget = budgets[i];
            try {
                RunResult r = run_alv(targets[i], layer_cfg);
                res.doc.layers[i] = {std::move(r.layer), targets[i].layer_id};
                res.traces[i] = std::move(r.trace);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
#ifdef _OPENMP
    if (workers > 1) omp_set_num_threads(omp_before);
#endif

    for (int i = 0; i < k; ++i) {
        if (!failures[i].empty())
            throw runtime_failure("layer '" + targets[i].layer_id + "' failed: " + failures[i]);
    }
    return res;
}

}  // namespace alv
