#pragma once

#include "sewnet/nn/core.hpp"

namespace sewnet::nn {

// ---------------------------------------------------------------------------
// Multi-layer LSTM used in one-to-many mode: the input encoding is duplicated
// for every step of the output sequence. Recurrent state starts at zero.
// Gate order in the packed weight matrices is (input, forget, cell, output).
// ---------------------------------------------------------------------------

struct LstmLayerParams {
    Mat Wx;  // in x 4h
    Mat Wh;  // h x 4h
    Mat b;   // 1 x 4h

    void init(int in, int hidden, Rng& rng) {
        Wx.resize(in, 4 * hidden);
        Wh.resize(hidden, 4 * hidden);
        b.resize(1, 4 * hidden);
        init_uniform(Wx, in, rng);
        init_uniform(Wh, hidden, rng);
        init_uniform(b, hidden, rng);
    }

    LstmLayerParams zeros_like() const {
        LstmLayerParams g;
        g.Wx = Mat::Zero(Wx.rows(), Wx.cols());
        g.Wh = Mat::Zero(Wh.rows(), Wh.cols());
        g.b = Mat::Zero(b.rows(), b.cols());
        return g;
    }
};

struct LstmStack {
    std::vector<LstmLayerParams> layers;
    int hidden = 0;

    void init(int in, int hidden_width, int n_layers, Rng& rng) {
        hidden = hidden_width;
        layers.clear();
        int prev = in;
        for (int l = 0; l < n_layers; ++l) {
            LstmLayerParams p;
            p.init(prev, hidden_width, rng);
            layers.push_back(std::move(p));
            prev = hidden_width;
        }
    }

    LstmStack zeros_like() const {
        LstmStack g;
        g.hidden = hidden;
        for (const auto& l : layers) g.layers.push_back(l.zeros_like());
        return g;
    }

    bool empty() const { return layers.empty(); }
    int in_width() const { return layers.empty() ? 0 : static_cast<int>(layers.front().Wx.rows()); }
};

struct LstmStepCache {
    Mat x;       // layer input at this step (S x in)
    Mat h_prev;  // S x h
    Mat c_prev;  // S x h
    Mat i, f, g, o;  // activated gates (S x h)
    Mat c;           // new cell state
    Mat tanh_c;
};

struct LstmCache {
    std::vector<std::vector<LstmStepCache>> steps;  // [T][layer]
};

namespace detail {

inline Mat sigmoid(const Mat& x) {
    return ((-x.array()).exp() + 1.0).inverse().matrix();
}

}  // namespace detail

/// Run the stack for `steps` steps feeding the same input rows every step.
/// Returns the top-layer hidden state per step, each (S x hidden).
inline std::vector<Mat> lstm_forward_repeat(const LstmStack& stack, const Mat& input, int steps,
                                            LstmCache& cache) {
    if (stack.empty()) throw NetworkError("lstm_forward_repeat: empty stack");
    if (input.cols() != stack.in_width()) throw NetworkError("lstm_forward_repeat: input width mismatch");
    const auto S = input.rows();
    const int h = stack.hidden;
    const std::size_t L = stack.layers.size();

    std::vector<Mat> hs(L, Mat::Zero(S, h));
    std::vector<Mat> cs(L, Mat::Zero(S, h));
    cache.steps.assign(static_cast<std::size_t>(steps), std::vector<LstmStepCache>(L));

    std::vector<Mat> outputs;
    outputs.reserve(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
        Mat x = input;
        for (std::size_t l = 0; l < L; ++l) {
            const LstmLayerParams& p = stack.layers[l];
            LstmStepCache& sc = cache.steps[static_cast<std::size_t>(t)][l];
            sc.x = x;
            sc.h_prev = hs[l];
            sc.c_prev = cs[l];
            Mat gates = x * p.Wx + hs[l] * p.Wh;
            gates.rowwise() += p.b.row(0);
            sc.i = detail::sigmoid(gates.leftCols(h));
            sc.f = detail::sigmoid(gates.middleCols(h, h));
            sc.g = gates.middleCols(2 * h, h).array().tanh().matrix();
            sc.o = detail::sigmoid(gates.rightCols(h));
            sc.c = sc.f.cwiseProduct(sc.c_prev) + sc.i.cwiseProduct(sc.g);
            sc.tanh_c = sc.c.array().tanh().matrix();
            hs[l] = sc.o.cwiseProduct(sc.tanh_c);
            cs[l] = sc.c;
            x = hs[l];
        }
        outputs.push_back(hs[L - 1]);
    }
    return outputs;
}

/// Backpropagate through time given the gradient of every step's top-layer
/// output. Returns the gradient wrt the (shared) input rows.
inline Mat lstm_backward_repeat(const LstmStack& stack, const LstmCache& cache,
                                const std::vector<Mat>& d_outputs, LstmStack& grads) {
    const std::size_t L = stack.layers.size();
    const int T = static_cast<int>(cache.steps.size());
    if (static_cast<int>(d_outputs.size()) != T) {
        throw NetworkError("lstm_backward_repeat: gradient count mismatch");
    }
    const auto S = d_outputs.empty() ? 0 : d_outputs.front().rows();
    const int h = stack.hidden;

    Mat d_input = Mat::Zero(S, stack.in_width());
    std::vector<Mat> dh(L, Mat::Zero(S, h));
    std::vector<Mat> dc(L, Mat::Zero(S, h));

    for (int t = T - 1; t >= 0; --t) {
        // gradient flowing into the top layer's hidden state at step t
        dh[L - 1] += d_outputs[static_cast<std::size_t>(t)];
        for (std::size_t l = L; l-- > 0;) {
            const LstmStepCache& sc = cache.steps[static_cast<std::size_t>(t)][l];
            const LstmLayerParams& p = stack.layers[l];

            const Mat d_o = dh[l].cwiseProduct(sc.tanh_c);
            Mat d_c = dc[l] +
                      dh[l].cwiseProduct(sc.o).cwiseProduct(
                          (1.0 - sc.tanh_c.array().square()).matrix());
            const Mat d_f = d_c.cwiseProduct(sc.c_prev);
            const Mat d_i = d_c.cwiseProduct(sc.g);
            const Mat d_g = d_c.cwiseProduct(sc.i);
            dc[l] = d_c.cwiseProduct(sc.f);  // to step t-1

            Mat d_gates(S, 4 * h);
            d_gates.leftCols(h) =
                d_i.cwiseProduct(sc.i).cwiseProduct((1.0 - sc.i.array()).matrix());
            d_gates.middleCols(h, h) =
                d_f.cwiseProduct(sc.f).cwiseProduct((1.0 - sc.f.array()).matrix());
            d_gates.middleCols(2 * h, h) =
                d_g.cwiseProduct((1.0 - sc.g.array().square()).matrix());
            d_gates.rightCols(h) =
                d_o.cwiseProduct(sc.o).cwiseProduct((1.0 - sc.o.array()).matrix());

            grads.layers[l].Wx.noalias() += sc.x.transpose() * d_gates;
            grads.layers[l].Wh.noalias() += sc.h_prev.transpose() * d_gates;
            grads.layers[l].b.row(0) += d_gates.colwise().sum();

            dh[l] = d_gates * p.Wh.transpose();  // to step t-1
            const Mat dx = d_gates * p.Wx.transpose();
            if (l == 0) {
                d_input += dx;
            } else {
                dh[l - 1] += dx;  // same-step gradient into the layer below
            }
        }
    }
    return d_input;
}

template <typename Fn>
void visit_params(LstmLayerParams& p, const std::string& prefix, Fn&& fn) {
    fn(prefix + ".Wx", p.Wx);
    fn(prefix + ".Wh", p.Wh);
    fn(prefix + ".b", p.b);
}

template <typename Fn>
void visit_params(LstmStack& s, const std::string& prefix, Fn&& fn) {
    for (std::size_t i = 0; i < s.layers.size(); ++i) {
        visit_params(s.layers[i], prefix + ".l" + std::to_string(i), fn);
    }
}

}  // namespace sewnet::nn
