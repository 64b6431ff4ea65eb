#include "alv/geometry.hpp"

#include "alv/scene.hpp"

namespace alv {

// Uniform flattening: `samples` vertices per segment at t = k/samples.  The
// vertex count is independent of the control point values, which keeps vertex
// positions (and thus signed distances) smooth functions of the parameters.
FlatPath flatten_path(const PathPrimitive& prim, int samples) {
    FlatPath out;
    const int nseg = prim.segment_count();
    const int npts = static_cast<int>(prim.points.size());
    if (nseg == 0) {
        out.degenerate = true;
        return out;
    }
    out.verts.reserve(static_cast<size_t>(nseg) * samples);
    out.basis.reserve(static_cast<size_t>(nseg) * samples);
    for (int j = 0; j < nseg; ++j) {
        const CubicSegment seg = prim.segment(j);
        const int32_t idx[4] = {3 * j, 3 * j + 1, 3 * j + 2, (3 * j + 3) % npts};
        for (int k = 0; k < samples; ++k) {
            const double t = static_cast<double>(k) / samples;
            VertexBasis vb;
            bernstein3(t, vb.w);
            for (int q = 0; q < 4; ++q) vb.idx[q] = idx[q];
            out.verts.push_back(seg.eval(t));
            out.basis.push_back(vb);
        }
    }
    for (const Vec2& v : out.verts) out.bounds.expand(v);

    double area2 = 0.0;
    const size_t n = out.verts.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = out.verts[i];
        const Vec2 b = out.verts[(i + 1) % n];
        area2 += a.x * b.y - b.x * a.y;
    }
    out.signed_area = 0.5 * area2;

    out.degenerate = (out.bounds.max_x - out.bounds.min_x) < 1e-9 &&
                     (out.bounds.max_y - out.bounds.min_y) < 1e-9;
    return out;
}

}  // namespace alv
