#pragma once

#include <algorithm>
#include <vector>

#include "sewnet/nn/core.hpp"

namespace sewnet::nn {

// ---------------------------------------------------------------------------
// SparseMax: Euclidean projection of each row onto the probability simplex
// via the sorted-threshold rule. Produces exact zeros outside the support.
// ---------------------------------------------------------------------------

struct SparsemaxCache {
    Mat output;      // same shape as input
    Mat support;     // 1.0 where output > 0
    Eigen::VectorXd tau;  // per-row threshold

    /// Distance of the nearest coordinate to its row's support boundary
    /// (z_i == tau). Finite-difference probes need to stay inside one
    /// support pattern.
    double min_boundary_margin(const Mat& input) const {
        double margin = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < input.rows(); ++r) {
            for (Eigen::Index c = 0; c < input.cols(); ++c) {
                margin = std::min(margin, std::abs(input(r, c) - tau(r)));
            }
        }
        return margin;
    }
};

inline Mat sparsemax_rows(const Mat& scores, SparsemaxCache& cache) {
    const auto n = scores.rows();
    const auto d = scores.cols();
    cache.output.resize(n, d);
    cache.support.resize(n, d);
    cache.tau.resize(n);

    std::vector<double> sorted(static_cast<std::size_t>(d));
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) sorted[static_cast<std::size_t>(c)] = scores(r, c);
        std::sort(sorted.begin(), sorted.end(), std::greater<double>());
        // k(z) = max{k : 1 + k z_(k) > sum_{j<=k} z_(j)}; the predicate holds
        // for a prefix of k values, so the last passing tau wins.
        double cumulative = 0.0;
        double tau = sorted[0] - 1.0;
        for (Eigen::Index c = 0; c < d; ++c) {
            cumulative += sorted[static_cast<std::size_t>(c)];
            const double k = static_cast<double>(c + 1);
            if (1.0 + k * sorted[static_cast<std::size_t>(c)] > cumulative) {
                tau = (cumulative - 1.0) / k;
            }
        }
        cache.tau(r) = tau;
        for (Eigen::Index c = 0; c < d; ++c) {
            const double v = scores(r, c) - tau;
            cache.output(r, c) = v > 0.0 ? v : 0.0;
            cache.support(r, c) = v > 0.0 ? 1.0 : 0.0;
        }
    }
    return cache.output;
}

/// Jacobian-vector product of the simplex projection: within each row's
/// support, subtract the support mean; zero elsewhere.
inline Mat sparsemax_backward(const SparsemaxCache& cache, const Mat& d_output) {
    Mat dz = Mat::Zero(d_output.rows(), d_output.cols());
    for (Eigen::Index r = 0; r < d_output.rows(); ++r) {
        double sum = 0.0;
        double count = 0.0;
        for (Eigen::Index c = 0; c < d_output.cols(); ++c) {
            if (cache.support(r, c) > 0.0) {
                sum += d_output(r, c);
                count += 1.0;
            }
        }
        if (count == 0.0) continue;
        const double mean = sum / count;
        for (Eigen::Index c = 0; c < d_output.cols(); ++c) {
            if (cache.support(r, c) > 0.0) dz(r, c) = d_output(r, c) - mean;
        }
    }
    return dz;
}

/// Convenience single-vector wrapper.
inline Eigen::VectorXd sparsemax(const Eigen::VectorXd& scores) {
    SparsemaxCache cache;
    const Mat out = sparsemax_rows(scores.transpose(), cache);
    return out.row(0).transpose();
}

}  // namespace sewnet::nn
