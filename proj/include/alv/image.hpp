#pragma once

#include <cstdint>
#include <vector>

#include "alv/errors.hpp"

namespace alv {

// Dense row-major image of doubles, interleaved channels.
struct ImageF {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    ImageF() = default;
    ImageF(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {}

    double& at(int x, int y, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    bool same_shape(const ImageF& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// Strictly binary mask.
struct MaskImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> values;  // 0 or 1

    MaskImage() = default;
    MaskImage(int w, int h, uint8_t fill = 0)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

    uint8_t at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    uint8_t& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    long long count_nonzero() const {
        long long n = 0;
        for (uint8_t v : values) n += v;
        return n;
    }
};

}  // namespace alv
