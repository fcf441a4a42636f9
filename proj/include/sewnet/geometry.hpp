#pragma once

#include <array>
#include <utility>
#include <vector>

#include "sewnet/pattern.hpp"

namespace sewnet {

// ---------------------------------------------------------------------------
// Edge vectors and loop reconstruction
// ---------------------------------------------------------------------------

/// Displacements from each edge's start vertex to its end vertex, in loop order.
inline std::vector<Vec2> edge_vectors(const Panel& panel) {
    std::vector<Vec2> out;
    out.reserve(panel.edges.size());
    for (const Edge& e : panel.edges) {
        out.push_back(panel.vertices[static_cast<std::size_t>(e.end_vertex)] -
                      panel.vertices[static_cast<std::size_t>(e.start_vertex)]);
    }
    return out;
}

struct LoopReconstruction {
    std::vector<Vec2> vertices;  // vertices.size() == vectors.size(), first at origin
    Vec2 loop_residual;          // sum of all edge vectors
};

/// Rebuild loop vertices by cumulative summation from the origin.
inline LoopReconstruction vertices_from_edges(const std::vector<Vec2>& vectors) {
    if (vectors.empty()) throw GeometryError("vertices_from_edges: empty edge list");
    LoopReconstruction out;
    out.vertices.reserve(vectors.size());
    Vec2 cursor{0.0, 0.0};
    for (const Vec2& v : vectors) {
        out.vertices.push_back(cursor);
        cursor += v;
    }
    out.loop_residual = cursor;
    return out;
}

// ---------------------------------------------------------------------------
// Curvature frame conversions
//
// The edge-local frame places the edge start at (0,0) and the edge end at
// (1,0); the +y direction is the counter-clockwise perpendicular.
// ---------------------------------------------------------------------------

/// Map edge-local curvature coordinates to a panel-space control point.
inline Vec2 curvature_to_panel(const Vec2& edge_start, const Vec2& edge_end, const Vec2& curvature) {
    const Vec2 d = edge_end - edge_start;
    if (d.squared_norm() < 1e-18) throw GeometryError("curvature_to_panel: zero-length edge");
    return edge_start + d * curvature.x + perp_ccw(d) * curvature.y;
}

/// Inverse of curvature_to_panel.
inline Vec2 curvature_from_panel(const Vec2& edge_start, const Vec2& edge_end, const Vec2& control) {
    const Vec2 d = edge_end - edge_start;
    const double len2 = d.squared_norm();
    if (len2 < 1e-18) throw GeometryError("curvature_from_panel: zero-length edge");
    const Vec2 r = control - edge_start;
    return {r.dot(d) / len2, r.dot(perp_ccw(d)) / len2};
}

/// Evaluate the quadratic Bezier of an edge at parameter t in [0,1].
inline Vec2 bezier_point(const Vec2& start, const Vec2& end, const Vec2& curvature, double t) {
    if (curvature.x == 0.0 && curvature.y == 0.0) {
        return start + (end - start) * t;
    }
    const Vec2 ctrl = curvature_to_panel(start, end, curvature);
    const double u = 1.0 - t;
    return start * (u * u) + ctrl * (2.0 * u * t) + end * (t * t);
}

// ---------------------------------------------------------------------------
// Placement
// ---------------------------------------------------------------------------

/// Top mid-point of the panel's 2D axis-aligned bounding box (vertices only;
/// Bezier control points do not contribute).
inline Vec2 placement_reference(const Panel& panel) {
    if (panel.vertices.size() < 3) throw GeometryError("placement_reference: panel needs >= 3 vertices");
    double x_min = panel.vertices.front().x, x_max = x_min;
    double y_max = panel.vertices.front().y;
    for (const Vec2& v : panel.vertices) {
        x_min = std::min(x_min, v.x);
        x_max = std::max(x_max, v.x);
        y_max = std::max(y_max, v.y);
    }
    return {(x_min + x_max) / 2.0, y_max};
}

/// Lift the panel's 2D vertices into the body frame: the panel lies in its
/// local z = 0 plane, is rotated by the placement quaternion, and is anchored
/// so that placement_reference lands exactly on the translation vector.
inline std::vector<Vec3> apply_placement(const Panel& panel) {
    const Quat& q = panel.placement.rotation;
    if (std::abs(q.norm() - 1.0) > 1e-6) throw GeometryError("apply_placement: non-unit quaternion");
    const Vec2 ref = placement_reference(panel);
    std::vector<Vec3> out;
    out.reserve(panel.vertices.size());
    for (const Vec2& v : panel.vertices) {
        const Vec3 local{v.x - ref.x, v.y - ref.y, 0.0};
        out.push_back(q.rotate(local) + panel.placement.translation);
    }
    return out;
}

/// Lift an arbitrary panel-local point (with an out-of-plane offset) using a
/// panel's placement. Shares the anchoring convention of apply_placement.
inline Vec3 place_local_point(const Panel& panel, const Vec2& local_xy, double local_z) {
    const Vec2 ref = placement_reference(panel);
    const Vec3 local{local_xy.x - ref.x, local_xy.y - ref.y, local_z};
    return panel.placement.rotation.rotate(local) + panel.placement.translation;
}

// ---------------------------------------------------------------------------
// Edge-pair features for the stitch classifier
// ---------------------------------------------------------------------------

/// 16 values: two blocks of (start xyz, end xyz, c_x, c_y), body-frame cm.
using EdgePairFeature = std::array<double, 16>;

namespace detail {

struct OrientedEdge3d {
    Vec3 start;
    Vec3 end;
    Vec2 curvature;

    OrientedEdge3d flipped() const {
        // Reversing traversal swaps the endpoints and mirrors the edge-local
        // frame: (c_x, c_y) -> (1 - c_x, -c_y).
        return {end, start, Vec2{1.0 - curvature.x, -curvature.y}};
    }
};

inline OrientedEdge3d lift_edge(const SewingPattern& pattern, const EdgeRef& ref) {
    auto it = pattern.panels.find(ref.panel);
    if (it == pattern.panels.end()) {
        throw GeometryError("edge_pair_feature: unknown panel '" + ref.panel + "'");
    }
    const Panel& panel = it->second;
    if (ref.edge < 0 || ref.edge >= panel.edge_count()) {
        throw GeometryError("edge_pair_feature: edge index out of range in panel '" + ref.panel + "'");
    }
    const Edge& e = panel.edges[static_cast<std::size_t>(ref.edge)];
    const std::vector<Vec3> placed = apply_placement(panel);
    return {placed[static_cast<std::size_t>(e.start_vertex)],
            placed[static_cast<std::size_t>(e.end_vertex)], e.curvature};
}

inline void write_edge_block(const OrientedEdge3d& e, double* out) {
    out[0] = e.start.x;
    out[1] = e.start.y;
    out[2] = e.start.z;
    out[3] = e.end.x;
    out[4] = e.end.y;
    out[5] = e.end.z;
    out[6] = e.curvature.x;
    out[7] = e.curvature.y;
}

}  // namespace detail

/// Body-frame feature of an edge pair. With `rng` given, vertex order within
/// each edge and the order of the two edges are independently flipped with
/// probability 0.5 (training-time augmentation); pass nullptr for the
/// deterministic canonical orientation.
inline EdgePairFeature edge_pair_feature(const SewingPattern& pattern, const EdgeRef& a,
                                         const EdgeRef& b, Rng* rng = nullptr) {
    detail::OrientedEdge3d ea = detail::lift_edge(pattern, a);
    detail::OrientedEdge3d eb = detail::lift_edge(pattern, b);
    if (rng != nullptr) {
        if (rng->uniform01() < 0.5) ea = ea.flipped();
        if (rng->uniform01() < 0.5) eb = eb.flipped();
        if (rng->uniform01() < 0.5) std::swap(ea, eb);
    }
    EdgePairFeature out{};
    detail::write_edge_block(ea, out.data());
    detail::write_edge_block(eb, out.data() + 8);
    return out;
}

}  // namespace sewnet
