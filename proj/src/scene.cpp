#include "alv/scene.hpp"

#include <cmath>

#include "alv/errors.hpp"

namespace alv {

PathPrimitive primitive_from_segments(const std::vector<CubicSegment>& segs,
                                      const std::array<double, 3>& fill_rgb,
                                      double fill_opacity) {
    if (segs.empty()) throw validation_error("path has no segments");
    for (size_t j = 0; j + 1 < segs.size(); ++j) {
        if (!(segs[j].p3 == segs[j + 1].p0))
            throw validation_error("consecutive segments do not share an endpoint");
    }
    if (!(segs.back().p3 == segs.front().p0))
        throw validation_error("path is not closed");

    PathPrimitive prim;
    prim.points.reserve(segs.size() * 3);
    for (const CubicSegment& s : segs) {
        prim.points.push_back(s.p0);
        prim.points.push_back(s.p1);
        prim.points.push_back(s.p2);
    }
    prim.fill_rgb = fill_rgb;
    prim.fill_opacity = fill_opacity;
    return prim;
}

PathPrimitive make_seed_primitive(Vec2 center, double radius, const Rgba& color,
                                  int segments_per_path) {
    if (!(radius > 0.0)) throw validation_error("seed radius must be positive");
    if (segments_per_path < 2) throw validation_error("need at least 2 segments per path");

    // Standard circle-by-cubics handle length for n arcs.
    const int n = segments_per_path;
    const double step = 2.0 * M_PI / n;
    const double handle = (4.0 / 3.0) * std::tan(step / 4.0) * radius;

    PathPrimitive prim;
    prim.points.reserve(static_cast<size_t>(n) * 3);
    for (int j = 0; j < n; ++j) {
        const double a = j * step;
        const Vec2 anchor = {center.x + radius * std::cos(a), center.y + radius * std::sin(a)};
        const Vec2 tangent = {-std::sin(a), std::cos(a)};
        prim.points.push_back(anchor);
        prim.points.push_back({anchor.x + handle * tangent.x, anchor.y + handle * tangent.y});
        const double a2 = (j + 1) * step;
        const Vec2 next = {center.x + radius * std::cos(a2), center.y + radius * std::sin(a2)};
        const Vec2 tangent2 = {-std::sin(a2), std::cos(a2)};
        prim.points.push_back({next.x - handle * tangent2.x, next.y - handle * tangent2.y});
    }
    prim.fill_rgb = {color.r, color.g, color.b};
    prim.fill_opacity = color.a;
    return prim;
}

LayerTarget make_layer_target(ImageF image, MaskImage mask, std::string layer_id) {
    if (image.channels != 4) throw validation_error("layer image must be RGBA");
    if (image.width != mask.width || image.height != mask.height)
        throw validation_error("layer '" + layer_id + "': image and mask dimensions differ");
    for (uint8_t v : mask.values) {
        if (v > 1) throw validation_error("layer '" + layer_id + "': mask is not binary");
    }
    if (mask.count_nonzero() == 0)
        throw validation_error("layer '" + layer_id + "': mask is empty");
    LayerTarget t;
    t.image = std::move(image);
    t.mask = std::move(mask);
    t.layer_id = std::move(layer_id);
    return t;
}

}  // namespace alv
