#pragma once

#include <algorithm>
#include <numeric>

#include "sewnet/nn/core.hpp"

namespace sewnet::nn {

// ---------------------------------------------------------------------------
// kNN graph over feature rows (rebuilt per layer, Euclidean metric).
// Ties break toward the lower row index so the graph is reproducible.
// ---------------------------------------------------------------------------

inline Eigen::MatrixXi knn_graph(const Mat& features, int k) {
    const auto n = features.rows();
    if (n <= k) throw NetworkError("knn_graph: need more points than neighbors");
    if (k < 1) throw NetworkError("knn_graph: k must be positive");

    const Eigen::VectorXd sq = features.rowwise().squaredNorm();
    const Mat gram = features * features.transpose();

    Eigen::MatrixXi nbr(n, k);
    std::vector<std::pair<double, int>> order(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = sq(i) + sq(j) - 2.0 * gram(i, j);
            order[m++] = {d, static_cast<int>(j)};
        }
        std::partial_sort(order.begin(), order.begin() + k, order.end());
        for (int c = 0; c < k; ++c) nbr(i, c) = order[static_cast<std::size_t>(c)].second;
    }
    return nbr;
}

// ---------------------------------------------------------------------------
// EdgeConv: per directed edge (i, j) the MLP sees [x_i ; x_j - x_i]; point
// features are the max over the k neighbor edges. The rectifier is applied on
// every MLP layer including the last, before max aggregation.
// ---------------------------------------------------------------------------

struct EdgeConvCache {
    Eigen::MatrixXi nbr;   // n x k
    Mat input;             // n x d_in
    Mat edge_in;           // (n*k) x 2 d_in
    MlpCache mlp;
    Mat edge_out;          // (n*k) x d_out
    Eigen::MatrixXi argmax;  // n x d_out, row index into edge_out

    /// Smallest winner margin of the max aggregation (top1 - top2). Groups
    /// whose winner is rectified to zero sit in a flat region (every branch
    /// has zero derivative), so they cannot create a kink and are skipped.
    double min_max_gap() const {
        const auto n = nbr.rows();
        const int k = static_cast<int>(nbr.cols());
        if (k < 2) return std::numeric_limits<double>::infinity();
        double gap = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index c = 0; c < edge_out.cols(); ++c) {
                double best = -std::numeric_limits<double>::infinity();
                double second = best;
                for (int j = 0; j < k; ++j) {
                    const double v = edge_out(i * k + j, c);
                    if (v > best) {
                        second = best;
                        best = v;
                    } else if (v > second) {
                        second = v;
                    }
                }
                if (best <= 0.0) continue;
                gap = std::min(gap, best - second);
            }
        }
        return gap;
    }
};

inline Mat edgeconv_forward(const Mlp& mlp, const Mat& input, int k, EdgeConvCache& cache) {
    const auto n = input.rows();
    const auto d = input.cols();
    if (mlp.in_width() != 2 * d) throw NetworkError("edgeconv_forward: MLP width mismatch");

    cache.input = input;
    cache.nbr = knn_graph(input, k);
    cache.edge_in.resize(n * k, 2 * d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) {
            const Eigen::Index row = i * k + j;
            cache.edge_in.row(row).head(d) = input.row(i);
            cache.edge_in.row(row).tail(d) = input.row(cache.nbr(i, j)) - input.row(i);
        }
    }
    cache.edge_out = mlp_forward(mlp, cache.edge_in, cache.mlp);

    const auto d_out = cache.edge_out.cols();
    Mat out(n, d_out);
    cache.argmax.resize(n, d_out);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < d_out; ++c) {
            double best = cache.edge_out(i * k, c);
            int best_j = 0;
            for (int j = 1; j < k; ++j) {
                const double v = cache.edge_out(i * k + j, c);
                if (v > best) {
                    best = v;
                    best_j = j;
                }
            }
            out(i, c) = best;
            cache.argmax(i, c) = static_cast<int>(i * k + best_j);
        }
    }
    return out;
}

inline Mat edgeconv_backward(const Mlp& mlp, const EdgeConvCache& cache, const Mat& d_out,
                             Mlp& grads) {
    const auto n = cache.input.rows();
    const auto d = cache.input.cols();
    const int k = static_cast<int>(cache.nbr.cols());

    Mat d_edge_out = Mat::Zero(cache.edge_out.rows(), cache.edge_out.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < d_out.cols(); ++c) {
            d_edge_out(cache.argmax(i, c), c) += d_out(i, c);
        }
    }
    const Mat d_edge_in = mlp_backward(mlp, cache.mlp, d_edge_out, grads);

    Mat d_input = Mat::Zero(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) {
            const Eigen::Index row = i * k + j;
            d_input.row(i) += d_edge_in.row(row).head(d) - d_edge_in.row(row).tail(d);
            d_input.row(cache.nbr(i, j)) += d_edge_in.row(row).tail(d);
        }
    }
    return d_input;
}

}  // namespace sewnet::nn
