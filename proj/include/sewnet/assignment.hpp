#pragma once

#include <limits>
#include <vector>

#include "sewnet/codec.hpp"
#include "sewnet/nn/model.hpp"

namespace sewnet {

// ---------------------------------------------------------------------------
// Minimum-cost assignment (Kuhn-Munkres with potentials, O(n^3)).
// Returns row_to_col.
// ---------------------------------------------------------------------------

inline std::vector<int> hungarian_assignment(const nn::Mat& cost) {
    if (cost.rows() != cost.cols()) throw Error("hungarian_assignment: square matrix required");
    const int n = static_cast<int>(cost.rows());
    if (n == 0) return {};
    constexpr double kInf = std::numeric_limits<double>::infinity();

    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur =
                    cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        if (p[static_cast<std::size_t>(j)] > 0) {
            row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
        }
    }
    return row_to_col;
}

// ---------------------------------------------------------------------------
// Orderless panel matching: assign ground-truth slots to predicted slots by
// minimum total Euclidean distance between panel vectors (all edge features
// concatenated with the 7-value placement).
// ---------------------------------------------------------------------------

inline Eigen::VectorXd panel_vector(const nn::Mat& edge_rows, const nn::Mat& placements, int slot) {
    const auto features = edge_rows.size();
    Eigen::VectorXd v(features + 7);
    Eigen::Index at = 0;
    for (Eigen::Index r = 0; r < edge_rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < edge_rows.cols(); ++c) v(at++) = edge_rows(r, c);
    }
    v.tail(7) = placements.row(slot).transpose();
    return v;
}

/// result[g] = predicted slot assigned to ground-truth slot g.
inline std::vector<int> orderless_match(const nn::ShapeOutput& pred, const PatternTensor& target) {
    const int C = static_cast<int>(pred.edge_rows.size());
    if (target.class_count != C) throw Error("orderless_match: slot count mismatch");
    nn::Mat cost(C, C);
    for (int g = 0; g < C; ++g) {
        const Eigen::VectorXd gv =
            panel_vector(target.edge_block[static_cast<std::size_t>(g)], target.placement_block, g);
        for (int s = 0; s < C; ++s) {
            const Eigen::VectorXd pv =
                panel_vector(pred.edge_rows[static_cast<std::size_t>(s)], pred.placements, s);
            cost(g, s) = (gv - pv).norm();
        }
    }
    return hungarian_assignment(cost);
}

}  // namespace sewnet
