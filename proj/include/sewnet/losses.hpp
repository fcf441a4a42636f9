#pragma once

#include <utility>
#include <vector>

#include "sewnet/assignment.hpp"
#include "sewnet/codec.hpp"
#include "sewnet/nn/model.hpp"

namespace sewnet {

// ---------------------------------------------------------------------------
// Training objectives. Losses consume standardized predictions/targets and
// accumulate gradients into nn::ShapeGradients when one is supplied.
// ---------------------------------------------------------------------------

struct LossWeights {
    double edge = 1.0;
    double loop = 1.0;
    double placement = 1.0;
    double stitch = 1.0;
    int stitch_epoch = 40;    // stitch terms join strictly after this epoch
    double tag_margin = 2.0;  // delta of the separation hinge
};

enum class LossMode { shape_only, with_tags };

struct LossBreakdown {
    double edge = 0.0;
    double loop = 0.0;
    double placement = 0.0;
    double cls = 0.0;
    double tags = 0.0;
    double total = 0.0;
};

/// Which slots/rows of a target tensor are real (derived from the physical
/// tensor before standardization).
struct TensorMask {
    std::vector<bool> slot_present;
    std::vector<int> edge_count;

    static TensorMask of(const PatternTensor& physical) {
        TensorMask m;
        m.slot_present.resize(static_cast<std::size_t>(physical.class_count));
        m.edge_count.assign(static_cast<std::size_t>(physical.class_count), 0);
        for (int slot = 0; slot < physical.class_count; ++slot) {
            const auto& rows = physical.edge_block[static_cast<std::size_t>(slot)];
            int count = 0;
            for (int i = 0; i < physical.max_edges; ++i) {
                if (rows(i, 0) != 0.0 || rows(i, 1) != 0.0) ++count;
            }
            m.edge_count[static_cast<std::size_t>(slot)] = count;
            m.slot_present[static_cast<std::size_t>(slot)] = count > 0;
        }
        return m;
    }

    int present_count() const {
        int n = 0;
        for (const bool p : slot_present) n += p ? 1 : 0;
        return n;
    }
};

/// Ground-truth stitch relations in tensor coordinates.
struct StitchSupervision {
    using SlotRow = std::pair<int, int>;
    std::vector<std::pair<SlotRow, SlotRow>> stitches;
    std::vector<SlotRow> non_free;  // union of stitch endpoints, sorted

    static StitchSupervision of(const SewingPattern& pattern, const PanelClassMap& cmap) {
        StitchSupervision s;
        std::set<SlotRow> endpoints;
        for (const Stitch& st : pattern.stitches) {
            const auto a = cmap.class_of(pattern.garment_type, st.first.panel);
            const auto b = cmap.class_of(pattern.garment_type, st.second.panel);
            if (!a || !b) throw Error("StitchSupervision: unmapped panel in stitch");
            const SlotRow ra{*a, st.first.edge};
            const SlotRow rb{*b, st.second.edge};
            s.stitches.emplace_back(ra, rb);
            endpoints.insert(ra);
            endpoints.insert(rb);
        }
        s.non_free.assign(endpoints.begin(), endpoints.end());
        return s;
    }
};

// ---------------------------------------------------------------------------
// Individual terms
// ---------------------------------------------------------------------------

/// MSE over edge vectors and curvature of every slot and row; padding rows
/// are supervised toward zero. `d_scale` premultiplies the gradient.
inline double edge_loss(const std::vector<nn::Mat>& pred, const std::vector<nn::Mat>& target,
                        nn::ShapeGradients* grads = nullptr, double d_scale = 1.0) {
    if (pred.size() != target.size()) throw Error("edge_loss: slot count mismatch");
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t c = 0; c < pred.size(); ++c) {
        if (pred[c].rows() != target[c].rows()) throw Error("edge_loss: row count mismatch");
        const auto diff =
            (pred[c].leftCols(4) - target[c].leftCols(4)).eval();
        sum += diff.squaredNorm();
        count += static_cast<double>(diff.size());
    }
    if (count == 0.0) return 0.0;
    if (grads != nullptr) {
        for (std::size_t c = 0; c < pred.size(); ++c) {
            grads->d_edge_rows[c].leftCols(4) +=
                (2.0 * d_scale / count) * (pred[c].leftCols(4) - target[c].leftCols(4));
        }
    }
    return sum / count;
}

/// Mean over present panels of the Euclidean norm of the edge-vector sum
/// (the distance between loop start and loop end).
inline double loop_loss(const std::vector<nn::Mat>& pred, const std::vector<bool>& slot_present,
                        nn::ShapeGradients* grads = nullptr, double d_scale = 1.0) {
    double present = 0.0;
    for (const bool p : slot_present) present += p ? 1.0 : 0.0;
    if (present == 0.0) return 0.0;

    double sum = 0.0;
    for (std::size_t c = 0; c < pred.size(); ++c) {
        if (!slot_present[c]) continue;
        const Eigen::RowVector2d s = pred[c].leftCols(2).colwise().sum();
        const double norm = s.norm();
        sum += norm;
        if (grads != nullptr && norm > 1e-12) {
            const Eigen::RowVector2d g = (d_scale / (present * norm)) * s;
            grads->d_edge_rows[c].leftCols(2).rowwise() += g;
        }
    }
    return sum / present;
}

/// MSE over the 7 placement values, averaged over present panels.
inline double placement_loss(const nn::Mat& pred, const nn::Mat& target,
                             const std::vector<bool>& slot_present,
                             nn::ShapeGradients* grads = nullptr, double d_scale = 1.0) {
    double present = 0.0;
    for (const bool p : slot_present) present += p ? 1.0 : 0.0;
    if (present == 0.0) return 0.0;

    double sum = 0.0;
    for (std::size_t c = 0; c < slot_present.size(); ++c) {
        if (!slot_present[c]) continue;
        const auto row = static_cast<Eigen::Index>(c);
        const auto diff = (pred.row(row) - target.row(row)).eval();
        sum += diff.squaredNorm() / 7.0;
        if (grads != nullptr) {
            grads->d_placements.row(row) += (2.0 * d_scale / (7.0 * present)) * diff;
        }
    }
    return sum / present;
}

namespace detail {

inline double stable_bce_from_logit(double logit, double y) {
    return std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::abs(logit)));
}

}  // namespace detail

/// Mean binary cross-entropy of the stitched-edge flag over real edges.
inline double class_loss(const std::vector<nn::Mat>& pred, const std::vector<nn::Mat>& target,
                         const TensorMask& mask, nn::ShapeGradients* grads = nullptr,
                         double d_scale = 1.0) {
    double count = 0.0;
    for (std::size_t c = 0; c < pred.size(); ++c) {
        count += static_cast<double>(mask.edge_count[c]);
    }
    if (count == 0.0) return 0.0;

    double sum = 0.0;
    for (std::size_t c = 0; c < pred.size(); ++c) {
        for (int i = 0; i < mask.edge_count[c]; ++i) {
            const double logit = pred[c](i, 4);
            const double y = target[c](i, 4);
            sum += detail::stable_bce_from_logit(logit, y);
            if (grads != nullptr) {
                const double sig = 1.0 / (1.0 + std::exp(-logit));
                grads->d_edge_rows[c](i, 4) += d_scale * (sig - y) / count;
            }
        }
    }
    return sum / count;
}

/// Stitch-tag objective: squared tag distance summed over stitched pairs plus
/// a hinge pushing unstitched non-free pairs apart by the margin. Free edges
/// contribute to neither term.
inline double tag_loss(const std::vector<nn::Mat>& pred, const StitchSupervision& sup, double margin,
                       nn::ShapeGradients* grads = nullptr, double d_scale = 1.0) {
    double sum = 0.0;
    const auto tag_of = [&](const StitchSupervision::SlotRow& r) {
        return pred[static_cast<std::size_t>(r.first)].row(r.second).tail(3).eval();
    };
    const auto add_grad = [&](const StitchSupervision::SlotRow& r, const Eigen::RowVector3d& g) {
        grads->d_edge_rows[static_cast<std::size_t>(r.first)].row(r.second).tail(3) += g;
    };

    std::set<std::pair<StitchSupervision::SlotRow, StitchSupervision::SlotRow>> stitched;
    for (const auto& [a, b] : sup.stitches) {
        stitched.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
        const Eigen::RowVector3d diff = tag_of(a) - tag_of(b);
        sum += diff.squaredNorm();
        if (grads != nullptr) {
            add_grad(a, (2.0 * d_scale) * diff);
            add_grad(b, (-2.0 * d_scale) * diff);
        }
    }
    for (std::size_t i = 0; i < sup.non_free.size(); ++i) {
        for (std::size_t j = i + 1; j < sup.non_free.size(); ++j) {
            const auto& a = sup.non_free[i];
            const auto& b = sup.non_free[j];
            if (stitched.count({a, b}) > 0) continue;
            const Eigen::RowVector3d diff = tag_of(a) - tag_of(b);
            const double hinge = margin - diff.squaredNorm();
            if (hinge <= 0.0) continue;
            sum += hinge;
            if (grads != nullptr) {
                add_grad(a, (-2.0 * d_scale) * diff);
                add_grad(b, (2.0 * d_scale) * diff);
            }
        }
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Combined objective
// ---------------------------------------------------------------------------

struct LossInputs {
    const PatternTensor* target = nullptr;  // standardized
    TensorMask mask;
    StitchSupervision supervision;
};

/// Weighted total per training mode. The stitch terms (class + tags) are
/// zero until the epoch counter moves past weights.stitch_epoch.
inline LossBreakdown total_loss(const nn::ShapeOutput& pred, const LossInputs& gt, LossMode mode,
                                int epoch, const LossWeights& weights,
                                nn::ShapeGradients* grads = nullptr) {
    LossBreakdown b;
    b.edge = weights.edge *
             edge_loss(pred.edge_rows, gt.target->edge_block, grads, weights.edge);
    b.loop = weights.loop * loop_loss(pred.edge_rows, gt.mask.slot_present, grads, weights.loop);
    b.placement = weights.placement * placement_loss(pred.placements, gt.target->placement_block,
                                                     gt.mask.slot_present, grads, weights.placement);
    if (mode == LossMode::with_tags && epoch > weights.stitch_epoch) {
        b.cls = weights.stitch *
                class_loss(pred.edge_rows, gt.target->edge_block, gt.mask, grads, weights.stitch);
        b.tags = weights.stitch *
                 tag_loss(pred.edge_rows, gt.supervision, weights.tag_margin, grads, weights.stitch);
    }
    b.total = b.edge + b.loop + b.placement + b.cls + b.tags;
    return b;
}

/// Reorder a target tensor (and its mask/supervision) under an orderless
/// assignment so slot g of the result lines up with predicted slot perm[g].
inline void apply_assignment(const std::vector<int>& perm, PatternTensor& target, TensorMask& mask,
                             StitchSupervision& supervision) {
    const int C = static_cast<int>(perm.size());
    PatternTensor reordered = target;
    TensorMask mask2 = mask;
    std::vector<int> slot_of_gt(static_cast<std::size_t>(C));
    for (int g = 0; g < C; ++g) slot_of_gt[static_cast<std::size_t>(g)] = perm[static_cast<std::size_t>(g)];
    for (int g = 0; g < C; ++g) {
        const int s = slot_of_gt[static_cast<std::size_t>(g)];
        reordered.edge_block[static_cast<std::size_t>(s)] =
            target.edge_block[static_cast<std::size_t>(g)];
        reordered.placement_block.row(s) = target.placement_block.row(g);
        mask2.slot_present[static_cast<std::size_t>(s)] = mask.slot_present[static_cast<std::size_t>(g)];
        mask2.edge_count[static_cast<std::size_t>(s)] = mask.edge_count[static_cast<std::size_t>(g)];
    }
    for (auto& [a, b] : supervision.stitches) {
        a.first = slot_of_gt[static_cast<std::size_t>(a.first)];
        b.first = slot_of_gt[static_cast<std::size_t>(b.first)];
    }
    for (auto& r : supervision.non_free) {
        r.first = slot_of_gt[static_cast<std::size_t>(r.first)];
    }
    target = std::move(reordered);
    mask = std::move(mask2);
}

}  // namespace sewnet
