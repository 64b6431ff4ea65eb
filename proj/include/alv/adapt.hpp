#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "alv/image.hpp"
#include "alv/optimize.hpp"
#include "alv/scene.hpp"

namespace alv {

enum class PruneStrategy { occlusion_aware, area, opacity, oracle };

PruneStrategy prune_strategy_from_name(const std::string& name);
std::string prune_strategy_name(PruneStrategy s);

struct PruneConfig {
    PruneStrategy strategy = PruneStrategy::occlusion_aware;
    double tau_p = 10.0;                // visible-alpha-area threshold, pixels
    std::optional<double> ratio;        // ranked removal fraction; overrides tau_p
    double smoothing = 1.0;
    int flatten_samples = 32;
};

struct PruneResult {
    LayerVector layer;
    std::vector<int> removed;     // ascending indices into the input layer
    std::vector<double> scores;   // per-primitive scores of the input layer
};

// Removes low-scoring primitives, preserving survivor order.  Threshold mode
// removes scores <= tau_p; ratio mode removes the lowest round(ratio * N).
// The oracle strategy scores by render difference and recomputes greedily in
// ratio mode.
PruneResult prune(const LayerVector& layer, const LayerTarget& target, const PruneConfig& cfg);

// One oracle scoring sweep: for each primitive the mean squared render
// difference (composited on white) between the full scene and the scene
// without it.  Exposed for the benchmark harness.
std::vector<double> oracle_scores(const LayerVector& layer, const RenderConfig& cfg);

struct AddConfig {
    double temperature = 0.5;
    double target_loss = 1e-3;
    int window_size = 3;
    double seed_marginal = 1e-3;  // stands in when the window is empty or non-positive
    int n_min = 5;
    int n_max = 100;
    int activation_iteration = 200;
    int interval = 100;
};

// Sliding window of addition events feeding the error budget.
class AdditionHistory {
public:
    struct Event {
        double loss_before = 0.0;
        double loss_after = 0.0;
        int n_added = 0;
    };

    explicit AdditionHistory(int capacity) : capacity_(capacity < 1 ? 1 : capacity) {}

    void push(const Event& e);
    size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }
    // Mean of (loss_before - loss_after) / n_added over the window.
    double mean_marginal() const;

private:
    int capacity_;
    std::deque<Event> events_;
};

struct ErrorField {
    ImageF values;      // H x W, non-negative
    MaskImage domain;   // sampling support for the uniform fallback
    bool all_zero = false;
};

// E(p) = channel-summed squared reconstruction error * (1 + |grad target|),
// zeroed outside the mask.
ErrorField build_error_field(const LayerVector& layer, const LayerTarget& target,
                             const LossConfig& cfg);

// Normalized temperature-scaled sampling distribution over pixels (row-major),
// computed in log space.
std::vector<double> addition_probabilities(const ErrorField& field, double temperature);

struct PixelCoord {
    int x = 0;
    int y = 0;
};

// Multinomial sampling with replacement from the temperature-scaled field;
// falls back to uniform-over-mask when the field is all zero.
std::vector<PixelCoord> sample_additions(const ErrorField& field, int n, double temperature,
                                         uint64_t rng_seed);

// 0 when current_loss <= target, otherwise ceil((current - target) / marginal)
// clamped to [n_min, n_max].
int estimate_addition_count(const AdditionHistory& history, double current_loss,
                            const AddConfig& cfg);

// Appends one seed primitive per coordinate at the top of the z-order, color
// sampled from the target pixel, opacity 1.
LayerVector add_primitives(const LayerVector& layer, const LayerTarget& target,
                           const std::vector<PixelCoord>& coords, double seed_radius = 5.0,
                           int segments_per_path = 4);

}  // namespace alv
