#pragma once

#include <array>
#include <string>
#include <vector>

#include "alv/geometry.hpp"
#include "alv/image.hpp"

namespace alv {

struct Rgba {
    double r = 0.0, g = 0.0, b = 0.0, a = 1.0;
};

// One closed filled cubic Bezier path.  Control points are stored as
// 3 * segment_count shared points in absolute canvas pixels: segment j is
// (points[3j], points[3j+1], points[3j+2], points[(3j+3) % size]), so the
// shared-endpoint and closure invariants hold exactly under any update.
struct PathPrimitive {
    std::vector<Vec2> points;
    std::array<double, 3> fill_rgb = {0.0, 0.0, 0.0};
    double fill_opacity = 1.0;

    int segment_count() const { return static_cast<int>(points.size() / 3); }

    CubicSegment segment(int j) const {
        const int n = static_cast<int>(points.size());
        return {points[3 * j], points[3 * j + 1], points[3 * j + 2], points[(3 * j + 3) % n]};
    }

    std::vector<CubicSegment> segments() const {
        std::vector<CubicSegment> out;
        out.reserve(segment_count());
        for (int j = 0; j < segment_count(); ++j) out.push_back(segment(j));
        return out;
    }

    BBox control_bounds() const {
        BBox b;
        for (const Vec2& p : points) b.expand(p);
        return b;
    }
};

// Builds a PathPrimitive from explicit 4-point segments, validating that
// consecutive segments share endpoints and the path closes exactly.
PathPrimitive primitive_from_segments(const std::vector<CubicSegment>& segs,
                                      const std::array<double, 3>& fill_rgb,
                                      double fill_opacity);

// Closed path of `segments_per_path` cubics approximating a circle.
PathPrimitive make_seed_primitive(Vec2 center, double radius, const Rgba& color,
                                  int segments_per_path = 4);

// Ordered primitive list for one layer; index 0 renders first (bottom).
struct LayerVector {
    std::vector<PathPrimitive> primitives;
    std::string layer_id;
};

// Raster target plus binary mask for one layer.
struct LayerTarget {
    ImageF image;  // H x W x 4, components in [0,1]
    MaskImage mask;
    std::string layer_id;
};

// Validates dimension agreement and the non-empty-mask rule.
LayerTarget make_layer_target(ImageF image, MaskImage mask, std::string layer_id);

struct DocumentLayer {
    LayerVector layer;
    std::string provenance;  // source manifest entry, empty if synthetic
};

struct VectorDocument {
    int canvas_width = 0;
    int canvas_height = 0;
    std::vector<DocumentLayer> layers;  // index 0 = backmost
};

}  // namespace alv
