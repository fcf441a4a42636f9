#pragma once

#include <Eigen/Dense>
#include <set>
#include <string>
#include <vector>

#include "sewnet/geometry.hpp"

namespace sewnet {

// ---------------------------------------------------------------------------
// Fixed-shape class-indexed pattern encoding
//
// edge_block[c] is an (max_edges x features) matrix for class slot c, rows
// beyond the panel's edge count are zero padding, absent classes are all-zero.
// Feature columns: (e_x, e_y, c_x, c_y) and, with stitch info, (f, s1, s2, s3)
// where f = 1 marks an edge that participates in a stitch. placement_block is
// (class_count x 7): (qx, qy, qz, qw, tx, ty, tz).
// ---------------------------------------------------------------------------

struct PatternTensor {
    int class_count = 0;
    int max_edges = kMaxEdges;
    int features = 4;
    std::vector<Eigen::MatrixXd> edge_block;
    Eigen::MatrixXd placement_block;
    std::string stats_version;  // empty while in physical units

    static PatternTensor zeros(int class_count, int features, int max_edges = kMaxEdges) {
        PatternTensor t;
        t.class_count = class_count;
        t.max_edges = max_edges;
        t.features = features;
        t.edge_block.assign(static_cast<std::size_t>(class_count),
                            Eigen::MatrixXd::Zero(max_edges, features));
        t.placement_block = Eigen::MatrixXd::Zero(class_count, 7);
        return t;
    }

    /// A slot counts as occupied when any edge row is nonzero.
    bool slot_occupied(int slot) const {
        return edge_block[static_cast<std::size_t>(slot)].cwiseAbs().maxCoeff() > 0.0;
    }
};

struct DecodeThresholds {
    double edge_norm_cm = 0.5;      // rows with a shorter edge vector are padding
    double loop_residual_cm = 0.5;  // larger residual flags the loop open
    int min_edges = 3;              // fewer surviving edges: slot is not a panel
};

struct DecodeLogEntry {
    int slot = -1;
    std::string class_name;
    std::string code;  // "degenerate_slot" | "loop_open" | "bad_quaternion"
    std::string message;
};

using DecodeLog = std::vector<DecodeLogEntry>;

// ---------------------------------------------------------------------------
// encode
// ---------------------------------------------------------------------------

/// Encode a validated pattern into its class-indexed tensor (physical units).
/// With `with_stitch_info`, column 4 carries the ground-truth stitched flag;
/// tag columns stay zero (they are supervised relationally, not by value).
inline PatternTensor encode_pattern(const SewingPattern& pattern, const PanelClassMap& cmap,
                                    bool with_stitch_info = false) {
    const auto violations = validate_pattern(pattern, cmap);
    if (!violations.empty()) {
        throw EncodingError("encode_pattern: invalid pattern: " + violations.front().code + ": " +
                            violations.front().message);
    }

    PatternTensor t = PatternTensor::zeros(cmap.class_count(), with_stitch_info ? 8 : 4);

    std::set<EdgeRef> stitched;
    if (with_stitch_info) {
        for (const Stitch& s : pattern.stitches) {
            stitched.insert(s.first);
            stitched.insert(s.second);
        }
    }

    for (const auto& [name, panel] : pattern.panels) {
        if (panel.edge_count() > t.max_edges) {
            throw EncodingError("encode_pattern: panel '" + name + "' exceeds " +
                                std::to_string(t.max_edges) + " edges");
        }
        const int slot = *cmap.class_of(pattern.garment_type, name);
        Eigen::MatrixXd& rows = t.edge_block[static_cast<std::size_t>(slot)];
        const std::vector<Vec2> vectors = edge_vectors(panel);
        for (int i = 0; i < panel.edge_count(); ++i) {
            const Edge& e = panel.edges[static_cast<std::size_t>(i)];
            rows(i, 0) = vectors[static_cast<std::size_t>(i)].x;
            rows(i, 1) = vectors[static_cast<std::size_t>(i)].y;
            rows(i, 2) = e.curvature.x;
            rows(i, 3) = e.curvature.y;
            if (with_stitch_info && stitched.count({name, i}) > 0) rows(i, 4) = 1.0;
        }
        const Quat& q = panel.placement.rotation;
        const Vec3& tr = panel.placement.translation;
        t.placement_block.row(slot) << q.x, q.y, q.z, q.w, tr.x, tr.y, tr.z;
    }
    return t;
}

// ---------------------------------------------------------------------------
// decode
// ---------------------------------------------------------------------------

/// Reconstruct a pattern from a tensor in physical units. A slot becomes a
/// panel when at least `min_edges` rows have an edge vector above the length
/// threshold; shorter rows are treated as padding. Degenerate slots are
/// skipped and reported in the log, open loops are reported but kept.
inline SewingPattern decode_pattern(const PatternTensor& t, const PanelClassMap& cmap,
                                    const DecodeThresholds& thresholds = {},
                                    DecodeLog* log = nullptr) {
    SewingPattern pattern;
    for (int slot = 0; slot < t.class_count; ++slot) {
        const Eigen::MatrixXd& rows = t.edge_block[static_cast<std::size_t>(slot)];
        const std::string class_name = slot < cmap.class_count()
                                           ? cmap.class_order[static_cast<std::size_t>(slot)]
                                           : "class_" + std::to_string(slot);

        std::vector<Vec2> vectors;
        std::vector<Vec2> curvatures;
        int suppressed = 0;
        for (int i = 0; i < t.max_edges; ++i) {
            const Vec2 ev{rows(i, 0), rows(i, 1)};
            if (ev.norm() >= thresholds.edge_norm_cm) {
                vectors.push_back(ev);
                curvatures.push_back({rows(i, 2), rows(i, 3)});
            } else if (ev.norm() > 0.0) {
                ++suppressed;
            }
        }
        if (static_cast<int>(vectors.size()) < thresholds.min_edges) {
            if (log != nullptr && (!vectors.empty() || suppressed > 0)) {
                log->push_back({slot, class_name, "degenerate_slot",
                                "slot has " + std::to_string(vectors.size()) +
                                    " detectable edges; not a panel"});
            }
            continue;
        }

        Panel panel;
        panel.name = class_name;
        const LoopReconstruction loop = vertices_from_edges(vectors);
        panel.vertices = loop.vertices;
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            Edge e;
            e.start_vertex = static_cast<int>(i);
            e.end_vertex = static_cast<int>((i + 1) % vectors.size());
            e.curvature = curvatures[i];
            panel.edges.push_back(e);
        }
        if (log != nullptr && loop.loop_residual.norm() > thresholds.loop_residual_cm) {
            log->push_back({slot, class_name, "loop_open",
                            "loop residual " + std::to_string(loop.loop_residual.norm()) + " cm"});
        }

        Quat q{t.placement_block(slot, 3), t.placement_block(slot, 0), t.placement_block(slot, 1),
               t.placement_block(slot, 2)};
        if (q.norm() < 1e-8) {
            if (log != nullptr) {
                log->push_back({slot, class_name, "bad_quaternion",
                                "near-zero rotation; replaced with identity"});
            }
            q = Quat{};
        }
        panel.placement.rotation = q.normalized().canonical();
        panel.placement.translation = {t.placement_block(slot, 4), t.placement_block(slot, 5),
                                       t.placement_block(slot, 6)};
        pattern.panels.emplace(panel.name, std::move(panel));
    }
    return pattern;
}

/// Per-slot loop residuals of detected panels (used by edge-count metrics).
inline Eigen::VectorXd decoded_loop_residuals(const PatternTensor& t, const DecodeThresholds& thresholds) {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(t.class_count, -1.0);
    for (int slot = 0; slot < t.class_count; ++slot) {
        const Eigen::MatrixXd& rows = t.edge_block[static_cast<std::size_t>(slot)];
        Vec2 sum{};
        int count = 0;
        for (int i = 0; i < t.max_edges; ++i) {
            const Vec2 ev{rows(i, 0), rows(i, 1)};
            if (ev.norm() >= thresholds.edge_norm_cm) {
                sum += ev;
                ++count;
            }
        }
        if (count >= thresholds.min_edges) out(slot) = sum.norm();
    }
    return out;
}

}  // namespace sewnet
