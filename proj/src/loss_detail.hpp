#pragma once

// Internal bridge between the loss engine and the adaptation module.

#include "alv/image.hpp"
#include "alv/optimize.hpp"
#include "alv/scene.hpp"

namespace alv::detail {

// Channel-summed squared reconstruction error per pixel, same compositing
// semantics as compute_loss.
ImageF per_pixel_error(const LayerVector& layer, const LayerTarget& target,
                       const LossConfig& cfg);

}  // namespace alv::detail
