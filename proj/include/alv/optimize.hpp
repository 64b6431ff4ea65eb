#pragma once

#include <vector>

#include "alv/raster.hpp"
#include "alv/scene.hpp"

namespace alv {

// Reference background the layer render is composited over before the
// squared difference against the target.
enum class ReconBackground {
    target_outside_gray_inside,  // target pixels where mask = 0, mid-gray where mask = 1
    white,
    gray,
    black,
};

struct LossConfig {
    double lambda_mask = 0.5;
    double smoothing = 1.0;
    int flatten_samples = 32;
    ReconBackground background = ReconBackground::target_outside_gray_inside;
};

struct LossBreakdown {
    double total = 0.0;
    double recon = 0.0;
    double mask = 0.0;
};

// Gradients mirroring the layer layout: `points` holds x,y pairs for every
// control point of every primitive in order; `colors` holds r,g,b,opacity
// per primitive.
struct LayerGradients {
    std::vector<double> points;
    std::vector<double> colors;
};

LossBreakdown compute_loss(const LayerVector& layer, const LayerTarget& target,
                           const LossConfig& cfg);

// Analytic gradients of LossBreakdown.total under the soft-coverage model;
// also returns the loss so a step needs one pass.
LossBreakdown compute_gradients(const LayerVector& layer, const LayerTarget& target,
                                const LossConfig& cfg, LayerGradients& grads);

struct OptimizerConfig {
    double lr_points = 1.0;
    double lr_colors = 0.01;  // colors and opacity
    double decay_ratio = 0.4; // final learning rate / initial learning rate
    int total_steps = 2000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with a linear learning-rate decay and [0,1] clamping of colors and
// opacity.  Moment slots follow primitive removals and insertions.
class OptimizerState {
public:
    OptimizerState(const LayerVector& layer, const OptimizerConfig& cfg);

    void step(LayerVector& layer, const LayerGradients& grads);

    // `removed` must be sorted ascending; call before mutating the layer.
    void erase_primitives(const LayerVector& layer_before, const std::vector<int>& removed);
    // New primitives appended at the top, `points_each` control points each.
    void append_primitives(int count, int points_each);

    int step_count() const { return step_; }
    double decay_factor() const;
    double current_lr_points() const { return cfg_.lr_points * decay_factor(); }
    double current_lr_colors() const { return cfg_.lr_colors * decay_factor(); }

private:
    OptimizerConfig cfg_;
    std::vector<double> m_points_, v_points_;
    std::vector<double> m_colors_, v_colors_;
    std::vector<int> prim_points_;  // control point count per primitive
    int step_ = 0;
};

}  // namespace alv
