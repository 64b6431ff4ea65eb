#pragma once

#include <cstdint>
#include <vector>

#include "alv/adapt.hpp"
#include "alv/optimize.hpp"
#include "alv/scene.hpp"

namespace alv {

struct AlvConfig {
    int global_budget = 512;      // initial primitive budget N0
    int total_iterations = 2000;
    bool prune_enabled = true;
    bool addition_enabled = true;
    PruneConfig prune;            // occlusion_aware, tau_p = 10
    AddConfig add;                // activation 200, interval 100
    LossConfig loss;              // lambda_mask = 0.5
    OptimizerConfig optimizer;    // lr 1.0 / 0.01, decay ratio 0.4
    double seed_radius = 5.0;
    int segments_per_path = 4;
    uint64_t rng_seed = 0;
};

struct TraceRecord {
    int iteration = 0;
    LossBreakdown loss;
    int primitive_count = 0;
    int n_pruned = 0;
    int n_added = 0;
    double marginal_estimate = 0.0;  // delta-e used by the error budget, 0 if unused
    double elapsed_s = 0.0;
};

struct RunTrace {
    std::vector<TraceRecord> records;
};

// `budget` seed primitives sampled from the empty-scene error field inside
// the mask, colors copied from the target.
LayerVector content_adaptive_init(const LayerTarget& target, int budget, uint64_t rng_seed,
                                  const AlvConfig& cfg);

struct RunResult {
    LayerVector layer;
    RunTrace trace;
};

RunResult run_alv(const LayerTarget& target, const AlvConfig& cfg);

// Proportional split of the global budget by mask area: floor of the share,
// remainder to the largest layers, minimum 1 per layer.
std::vector<int> allocate_budgets(const std::vector<long long>& mask_areas, int global_budget);

struct DocumentResult {
    VectorDocument doc;
    std::vector<RunTrace> traces;
};

// Runs ALV independently per layer with proportional budgets; layers may be
// processed on up to `jobs` threads.
DocumentResult vectorize_document(const std::vector<LayerTarget>& targets, const AlvConfig& cfg,
                                  int jobs = 1);

}  // namespace alv
