#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sewnet/vec.hpp"

namespace sewnet {

/// Hard cap on edges per panel; panel tensors are padded to this length.
constexpr int kMaxEdges = 14;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// One smooth segment of a panel outline. Straight line when curvature is
/// exactly (0, 0); otherwise the quadratic Bezier control point expressed in
/// the edge-local frame where the edge spans (0,0)-(1,0).
struct Edge {
    int start_vertex = 0;
    int end_vertex = 0;
    Vec2 curvature{};

    bool is_straight() const { return curvature.x == 0.0 && curvature.y == 0.0; }
};

/// Rigid placement of a panel around the body. The translation is the 3D
/// position of the top mid-point of the panel's 2D bounding box.
struct Placement {
    Quat rotation{};
    Vec3 translation{};
};

/// Closed piece-wise curve in panel-local centimeters; the first loop vertex
/// sits at the origin.
struct Panel {
    std::string name;
    std::vector<Vec2> vertices;
    std::vector<Edge> edges;
    Placement placement;

    int edge_count() const { return static_cast<int>(edges.size()); }
};

struct EdgeRef {
    std::string panel;
    int edge = 0;

    friend bool operator==(const EdgeRef& a, const EdgeRef& b) {
        return a.panel == b.panel && a.edge == b.edge;
    }
    friend bool operator<(const EdgeRef& a, const EdgeRef& b) {
        return a.panel != b.panel ? a.panel < b.panel : a.edge < b.edge;
    }
};

/// 1-to-1 connection between two panel edges.
struct Stitch {
    EdgeRef first;
    EdgeRef second;
};

struct SewingPattern {
    std::string garment_type;
    std::map<std::string, Panel> panels;  // ordered by name for determinism
    std::vector<Stitch> stitches;
};

// ---------------------------------------------------------------------------
// Panel classes
// ---------------------------------------------------------------------------

/// Groups panels by role across garment types; the class index is the slot of
/// a panel in the fixed-shape tensor encoding. Default class count follows
/// the reference configuration.
struct PanelClassMap {
    std::vector<std::string> class_order;
    // garment type -> panel name -> class index
    std::map<std::string, std::map<std::string, int>> assignment;

    int class_count() const { return static_cast<int>(class_order.size()); }

    /// Resolve a panel's class. Falls back to matching the panel name against
    /// class_order, which is how decoded patterns (whose panels are named
    /// after their class) resolve without an assignment entry.
    std::optional<int> class_of(const std::string& garment_type, const std::string& panel_name) const {
        auto t = assignment.find(garment_type);
        if (t != assignment.end()) {
            auto p = t->second.find(panel_name);
            if (p != t->second.end()) return p->second;
        }
        for (int i = 0; i < class_count(); ++i) {
            if (class_order[static_cast<std::size_t>(i)] == panel_name) return i;
        }
        return std::nullopt;
    }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// A single rule violation; validation reports data instead of throwing.
struct Violation {
    std::string code;
    std::string message;
};

namespace detail {

inline void check_panel(const Panel& panel, std::vector<Violation>& out) {
    const auto n_vertices = static_cast<int>(panel.vertices.size());
    const auto n_edges = panel.edge_count();
    const std::string where = "panel '" + panel.name + "'";

    if (n_edges < 3 || n_vertices < 3) {
        out.push_back({"panel_too_small", where + " needs at least 3 vertices and 3 edges"});
        return;
    }
    if (n_edges > kMaxEdges) {
        out.push_back({"edge_count_exceeds_max",
                       where + " has " + std::to_string(n_edges) + " edges (max " +
                           std::to_string(kMaxEdges) + ")"});
    }
    if (n_edges != n_vertices) {
        out.push_back({"loop_vertex_count", where + " edge count differs from vertex count"});
    }

    bool refs_ok = true;
    for (const Edge& e : panel.edges) {
        if (e.start_vertex < 0 || e.start_vertex >= n_vertices || e.end_vertex < 0 ||
            e.end_vertex >= n_vertices) {
            out.push_back({"bad_vertex_ref", where + " edge references a missing vertex"});
            refs_ok = false;
        }
    }
    if (!refs_ok) return;

    // Single closed loop: consecutive edges chain, the last edge returns to
    // the first vertex, and no vertex is visited twice (degree 2 everywhere).
    bool closed = true;
    for (int i = 0; i < n_edges; ++i) {
        const Edge& e = panel.edges[static_cast<std::size_t>(i)];
        const Edge& next = panel.edges[static_cast<std::size_t>((i + 1) % n_edges)];
        if (e.end_vertex != next.start_vertex) closed = false;
    }
    std::set<int> starts;
    for (const Edge& e : panel.edges) starts.insert(e.start_vertex);
    if (!closed || static_cast<int>(starts.size()) != n_edges) {
        out.push_back({"loop_not_closed", where + " edges do not form a single closed loop"});
        return;
    }

    const Vec2 v0 = panel.vertices[static_cast<std::size_t>(panel.edges.front().start_vertex)];
    if (v0.norm() > 1e-6) {
        out.push_back({"first_vertex_not_origin", where + " loop does not start at the panel origin"});
    }

    const double qerr = std::abs(panel.placement.rotation.norm() - 1.0);
    if (qerr > 1e-6) {
        out.push_back({"quaternion_norm", where + " placement quaternion is not unit length"});
    }
    const Quat q = panel.placement.rotation;
    const Quat qc = q.canonical();
    if (q.w != qc.w || q.x != qc.x || q.y != qc.y || q.z != qc.z) {
        out.push_back({"quaternion_sign", where + " placement quaternion is not in canonical sign"});
    }
}

}  // namespace detail

/// Check every domain invariant plus class-map coverage. Empty result means
/// the pattern is valid under `cmap`.
inline std::vector<Violation> validate_pattern(const SewingPattern& pattern, const PanelClassMap& cmap) {
    std::vector<Violation> out;

    for (const auto& [name, panel] : pattern.panels) {
        detail::check_panel(panel, out);
    }

    // Stitches: resolvable, distinct endpoints, each edge in at most one stitch.
    std::set<EdgeRef> used;
    for (std::size_t i = 0; i < pattern.stitches.size(); ++i) {
        const Stitch& s = pattern.stitches[i];
        const std::string where = "stitch " + std::to_string(i);
        bool resolved = true;
        for (const EdgeRef& ref : {s.first, s.second}) {
            auto it = pattern.panels.find(ref.panel);
            if (it == pattern.panels.end()) {
                out.push_back({"stitch_bad_ref", where + " references missing panel '" + ref.panel + "'"});
                resolved = false;
            } else if (ref.edge < 0 || ref.edge >= it->second.edge_count()) {
                out.push_back({"stitch_bad_ref", where + " references edge " + std::to_string(ref.edge) +
                                                     " of panel '" + ref.panel + "'"});
                resolved = false;
            }
        }
        if (!resolved) continue;
        if (s.first == s.second) {
            out.push_back({"stitch_self", where + " connects an edge to itself"});
            continue;
        }
        for (const EdgeRef& ref : {s.first, s.second}) {
            if (!used.insert(ref).second) {
                out.push_back({"stitch_duplicate_edge",
                               where + " reuses edge " + std::to_string(ref.edge) + " of panel '" +
                                   ref.panel + "'"});
            }
        }
    }

    // Class coverage: every panel mapped, at most one panel per class.
    std::map<int, std::string> class_owner;
    for (const auto& [name, panel] : pattern.panels) {
        const auto cls = cmap.class_of(pattern.garment_type, name);
        if (!cls) {
            out.push_back({"unmapped_panel", "panel '" + name + "' of type '" + pattern.garment_type +
                                                 "' has no panel class"});
            continue;
        }
        if (*cls < 0 || *cls >= cmap.class_count()) {
            out.push_back({"class_out_of_range", "panel '" + name + "' maps to invalid class index"});
            continue;
        }
        auto [it, inserted] = class_owner.emplace(*cls, name);
        if (!inserted) {
            out.push_back({"duplicate_class", "panels '" + it->second + "' and '" + name +
                                                  "' share class " + std::to_string(*cls)});
        }
    }

    return out;
}

}  // namespace sewnet
