#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "sewnet/common.hpp"

namespace sewnet::nn {

using Mat = Eigen::MatrixXd;

/// Uniform fan-in initialization: U(-1/sqrt(fan_in), +1/sqrt(fan_in)).
inline void init_uniform(Mat& m, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, fan_in)));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = rng.uniform(-bound, bound);
        }
    }
}

// ---------------------------------------------------------------------------
// Linear layer: y = x W + b, x is (items x in), W (in x out), b (1 x out).
// ---------------------------------------------------------------------------

struct LinearLayer {
    Mat W;
    Mat b;

    void init(int in, int out, Rng& rng) {
        W.resize(in, out);
        b.resize(1, out);
        init_uniform(W, in, rng);
        init_uniform(b, in, rng);
    }

    LinearLayer zeros_like() const {
        LinearLayer g;
        g.W = Mat::Zero(W.rows(), W.cols());
        g.b = Mat::Zero(b.rows(), b.cols());
        return g;
    }

    int in_width() const { return static_cast<int>(W.rows()); }
    int out_width() const { return static_cast<int>(W.cols()); }
};

struct LinearCache {
    Mat x;
};

inline Mat linear_forward(const LinearLayer& layer, const Mat& x, LinearCache& cache) {
    if (x.cols() != layer.W.rows()) throw NetworkError("linear_forward: input width mismatch");
    cache.x = x;
    Mat y = x * layer.W;
    y.rowwise() += layer.b.row(0);
    return y;
}

inline Mat linear_backward(const LinearLayer& layer, const LinearCache& cache, const Mat& dy,
                           LinearLayer& grads) {
    grads.W.noalias() += cache.x.transpose() * dy;
    grads.b.row(0) += dy.colwise().sum();
    return dy * layer.W.transpose();
}

// ---------------------------------------------------------------------------
// MLP: linear layers with ReLU between them; the output layer is linear
// unless relu_output is set (EdgeConv applies the rectifier to every layer).
// ---------------------------------------------------------------------------

struct Mlp {
    std::vector<LinearLayer> layers;
    bool relu_output = false;

    void init(int in, const std::vector<int>& widths, Rng& rng) {
        layers.clear();
        int prev = in;
        for (const int w : widths) {
            LinearLayer l;
            l.init(prev, w, rng);
            layers.push_back(std::move(l));
            prev = w;
        }
    }

    Mlp zeros_like() const {
        Mlp g;
        g.relu_output = relu_output;
        for (const auto& l : layers) g.layers.push_back(l.zeros_like());
        return g;
    }

    bool empty() const { return layers.empty(); }
    int in_width() const { return layers.empty() ? 0 : layers.front().in_width(); }
    int out_width() const { return layers.empty() ? 0 : layers.back().out_width(); }
};

struct MlpCache {
    std::vector<LinearCache> linear;
    std::vector<Mat> preact;  // pre-activation of every layer

    /// Smallest |pre-activation| over rectified layers; finite-difference
    /// probes are only trustworthy away from the kinks.
    double min_relu_margin(const Mlp& mlp) const {
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < preact.size(); ++l) {
            const bool rectified = mlp.relu_output || l + 1 < preact.size();
            if (!rectified || preact[l].size() == 0) continue;
            margin = std::min(margin, preact[l].cwiseAbs().minCoeff());
        }
        return margin;
    }
};

inline Mat mlp_forward(const Mlp& mlp, const Mat& x, MlpCache& cache) {
    cache.linear.resize(mlp.layers.size());
    cache.preact.resize(mlp.layers.size());
    Mat cur = x;
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        cur = linear_forward(mlp.layers[l], cur, cache.linear[l]);
        cache.preact[l] = cur;
        if (mlp.relu_output || l + 1 < mlp.layers.size()) {
            cur = cur.cwiseMax(0.0);
        }
    }
    return cur;
}

inline Mat mlp_backward(const Mlp& mlp, const MlpCache& cache, const Mat& dy, Mlp& grads) {
    Mat cur = dy;
    for (std::size_t l = mlp.layers.size(); l-- > 0;) {
        if (mlp.relu_output || l + 1 < mlp.layers.size()) {
            cur = cur.cwiseProduct((cache.preact[l].array() > 0.0).cast<double>().matrix());
        }
        cur = linear_backward(mlp.layers[l], cache.linear[l], cur, grads.layers[l]);
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Parameter visiting (optimizer + serialization walk the same order)
// ---------------------------------------------------------------------------

template <typename Fn>
void visit_params(LinearLayer& l, const std::string& prefix, Fn&& fn) {
    fn(prefix + ".W", l.W);
    fn(prefix + ".b", l.b);
}

template <typename Fn>
void visit_params(Mlp& m, const std::string& prefix, Fn&& fn) {
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        visit_params(m.layers[i], prefix + ".l" + std::to_string(i), fn);
    }
}

}  // namespace sewnet::nn
