#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace alv {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

struct BBox {
    double min_x = std::numeric_limits<double>::max();
    double min_y = std::numeric_limits<double>::max();
    double max_x = -std::numeric_limits<double>::max();
    double max_y = -std::numeric_limits<double>::max();

    void expand(Vec2 p) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    bool empty() const { return min_x > max_x; }
    bool intersects(const BBox& o) const {
        return !(o.min_x > max_x || o.max_x < min_x || o.min_y > max_y || o.max_y < min_y);
    }
};

struct CubicSegment {
    Vec2 p0, p1, p2, p3;

    Vec2 eval(double t) const {
        const double u = 1.0 - t;
        const double b0 = u * u * u;
        const double b1 = 3.0 * u * u * t;
        const double b2 = 3.0 * u * t * t;
        const double b3 = t * t * t;
        return {b0 * p0.x + b1 * p1.x + b2 * p2.x + b3 * p3.x,
                b0 * p0.y + b1 * p1.y + b2 * p2.y + b3 * p3.y};
    }
};

// Bernstein weights of the four control points at parameter t.
inline void bernstein3(double t, double w[4]) {
    const double u = 1.0 - t;
    w[0] = u * u * u;
    w[1] = 3.0 * u * u * t;
    w[2] = 3.0 * u * t * t;
    w[3] = t * t * t;
}

// Squared distance from p to segment [a,b]; writes the clamped parameter of
// the closest point to t_out when non-null.
inline double distance_sq_point_segment(Vec2 p, Vec2 a, Vec2 b, double* t_out = nullptr) {
    const Vec2 d = b - a;
    const double len_sq = dot(d, d);
    double t = 0.0;
    if (len_sq > 0.0) t = std::clamp(dot(p - a, d) / len_sq, 0.0, 1.0);
    if (t_out) *t_out = t;
    const Vec2 q = {a.x + t * d.x, a.y + t * d.y};
    const Vec2 r = p - q;
    return dot(r, r);
}

// How a flattened vertex depends on the owning primitive's control points:
// four point indices with Bernstein weights.
struct VertexBasis {
    int32_t idx[4];
    double w[4];
};

// Closed polyline approximation of a closed cubic path.  Vertex i connects to
// vertex (i+1) % size.  The vertex count is segment_count * samples and does
// not depend on the control point values, so vertex positions are smooth
// functions of the control points.
struct FlatPath {
    std::vector<Vec2> verts;
    std::vector<VertexBasis> basis;
    BBox bounds;
    double signed_area = 0.0;
    bool degenerate = false;
};

struct PathPrimitive;

// Uniform flattening with a fixed vertex count per segment.
FlatPath flatten_path(const PathPrimitive& prim, int samples);

// Winding number of the closed polyline around p (positive-x ray casting,
// half-open rule at vertices).
inline int polyline_winding(const std::vector<Vec2>& verts, Vec2 p) {
    int winding = 0;
    const size_t n = verts.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = verts[i];
        const Vec2 b = verts[(i + 1) % n];
        if ((a.y <= p.y) != (b.y <= p.y)) {
            const double x_int = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (x_int > p.x) winding += (b.y > a.y) ? 1 : -1;
        }
    }
    return winding;
}

}  // namespace alv
