#pragma once

// Shared oracles and finite-difference machinery for the network tests.
// The FD probes use h = 1e-6 and reject instances whose kinked units
// (rectifiers, max pools, sparsemax support boundaries, hinge margins) sit
// closer than `kKinkMargin` to their switch point, where central differences
// stop measuring the analytic derivative.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "sewnet/nn/model.hpp"

namespace nn_test {

using sewnet::Rng;
using sewnet::nn::Mat;

constexpr double kFdStep = 1e-6;
constexpr double kKinkMargin = 1e-4;
constexpr double kRelTol = 1e-4;
constexpr double kAbsTol = 1e-8;

inline bool grad_close(double analytic, double numeric) {
    const double err = std::abs(analytic - numeric);
    return err <= kAbsTol + kRelTol * std::max(std::abs(analytic), std::abs(numeric));
}

/// Central finite differences of a scalar function wrt every element of `x`,
/// compared against `analytic`. Returns the number of mismatches.
inline int fd_compare(Mat& x, const Mat& analytic, const std::function<double()>& eval,
                      int* checked = nullptr) {
    int bad = 0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const double orig = x(r, c);
            x(r, c) = orig + kFdStep;
            const double fp = eval();
            x(r, c) = orig - kFdStep;
            const double fm = eval();
            x(r, c) = orig;
            const double numeric = (fp - fm) / (2.0 * kFdStep);
            if (checked != nullptr) ++*checked;
            if (!grad_close(analytic(r, c), numeric)) ++bad;
        }
    }
    return bad;
}

/// Deterministic random projection used to reduce a block output to a scalar.
inline Mat random_projection(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Mat r(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) r(i, j) = rng.uniform(-1.0, 1.0);
    }
    return r;
}

inline Mat random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, scale);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Brute-force kNN by direct pairwise distances and a full sort.
inline Eigen::MatrixXi knn_oracle(const Mat& x, int k) {
    const auto n = x.rows();
    Eigen::MatrixXi nbr(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> d;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            d.push_back({(x.row(i) - x.row(j)).squaredNorm(), static_cast<int>(j)});
        }
        std::sort(d.begin(), d.end());
        for (int c = 0; c < k; ++c) nbr(i, c) = d[static_cast<std::size_t>(c)].second;
    }
    return nbr;
}

/// Simplex projection by bisection on the dual threshold: solves
/// sum_i max(z_i - tau, 0) = 1 without sorting.
inline Eigen::VectorXd simplex_projection_bisection(const Eigen::VectorXd& z) {
    double lo = z.minCoeff() - 1.0;
    double hi = z.maxCoeff();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double mass = (z.array() - mid).cwiseMax(0.0).sum();
        if (mass > 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double tau = 0.5 * (lo + hi);
    return (z.array() - tau).cwiseMax(0.0).matrix();
}

/// Simplex projection by exhaustive support enumeration (KKT check); exact
/// for small dimensions.
inline Eigen::VectorXd simplex_projection_support_enum(const Eigen::VectorXd& z) {
    const int d = static_cast<int>(z.size());
    for (unsigned mask = 1; mask < (1u << d); ++mask) {
        double sum = 0.0;
        int size = 0;
        for (int i = 0; i < d; ++i) {
            if (mask & (1u << i)) {
                sum += z(i);
                ++size;
            }
        }
        const double tau = (sum - 1.0) / size;
        bool ok = true;
        for (int i = 0; i < d; ++i) {
            const bool in = (mask & (1u << i)) != 0;
            if (in && z(i) - tau <= 0.0) ok = false;
            if (!in && z(i) - tau > 0.0) ok = false;
        }
        if (ok) {
            Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
            for (int i = 0; i < d; ++i) {
                if (mask & (1u << i)) p(i) = z(i) - tau;
            }
            return p;
        }
    }
    throw std::logic_error("support enumeration found no KKT point");
}

/// Exhaustive minimum-cost assignment for small n.
inline std::pair<std::vector<int>, double> assignment_oracle(const Mat& cost) {
    const int n = static_cast<int>(cost.rows());
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (int i = 0; i < n; ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {best, best_cost};
}

// ---------------------------------------------------------------------------
// Tiny configurations for gradient checks
// ---------------------------------------------------------------------------

inline sewnet::nn::ModelConfig tiny_config(const std::string& arch, bool with_tags) {
    sewnet::nn::ModelConfig c;
    c.arch = arch;
    c.with_tags = with_tags;
    c.class_count = 4;
    c.k_neighbors = 3;
    c.conv_hidden = {8, 8};
    c.conv_out = 6;
    c.pattern_hidden = 10;
    c.pattern_layers = 2;
    c.panel_hidden = 10;
    c.panel_layers = 3;
    c.att_layers = 2;
    c.att_hidden = 9;
    c.max_edges = 5;
    return c;
}

}  // namespace nn_test
