#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sewnet/pattern.hpp"
#include "sewnet/nn/graph.hpp"
#include "sewnet/nn/lstm.hpp"
#include "sewnet/nn/sparsemax.hpp"

namespace sewnet::nn {

// ---------------------------------------------------------------------------
// Architecture configuration. Reference widths follow the full-scale setup;
// `scaled` divides the learnable widths for desk-size runs.
// ---------------------------------------------------------------------------

struct ModelConfig {
    std::string arch = "attention";  // "baseline" | "attention"
    bool with_tags = false;
    int class_count = 31;
    int k_neighbors = 5;
    std::vector<int> conv_hidden = {200, 200};
    int conv_out = 150;
    int pattern_hidden = 250;
    int pattern_layers = 2;
    int panel_hidden = 250;
    int panel_layers = 3;
    int att_layers = 3;
    int att_hidden = 0;  // 0: use the per-point feature width
    int max_edges = kMaxEdges;

    int point_feature_width() const { return conv_out + 3; }
    int edge_features() const { return with_tags ? 8 : 4; }
    int attention_hidden() const { return att_hidden > 0 ? att_hidden : point_feature_width(); }
    /// Width of the per-panel code entering the shared panel decoder: the
    /// pattern LSTM's hidden size for the baseline, the pooled point-feature
    /// width for the attention variant.
    int panel_code_width() const {
        return arch == "baseline" ? pattern_hidden : point_feature_width();
    }

    bool is_baseline() const { return arch == "baseline"; }

    ModelConfig scaled(int divisor) const {
        if (divisor <= 1) return *this;
        auto div = [divisor](int w) { return std::max(1, (w + divisor - 1) / divisor); };
        ModelConfig c = *this;
        for (int& w : c.conv_hidden) w = div(w);
        c.conv_out = div(conv_out);
        c.pattern_hidden = div(pattern_hidden);
        c.panel_hidden = div(panel_hidden);
        if (att_hidden > 0) c.att_hidden = div(att_hidden);
        return c;
    }
};

inline nlohmann::json model_config_to_json(const ModelConfig& c) {
    return nlohmann::json{{"arch", c.arch},
                          {"with_tags", c.with_tags},
                          {"class_count", c.class_count},
                          {"k_neighbors", c.k_neighbors},
                          {"conv_hidden", c.conv_hidden},
                          {"conv_out", c.conv_out},
                          {"pattern_hidden", c.pattern_hidden},
                          {"pattern_layers", c.pattern_layers},
                          {"panel_hidden", c.panel_hidden},
                          {"panel_layers", c.panel_layers},
                          {"att_layers", c.att_layers},
                          {"att_hidden", c.att_hidden},
                          {"max_edges", c.max_edges}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.arch = j.value("arch", c.arch);
    if (c.arch != "baseline" && c.arch != "attention") {
        throw ConfigError("model config: arch must be 'baseline' or 'attention'");
    }
    c.with_tags = j.value("with_tags", c.with_tags);
    c.class_count = j.value("class_count", c.class_count);
    c.k_neighbors = j.value("k_neighbors", c.k_neighbors);
    if (j.contains("conv_hidden")) c.conv_hidden = j.at("conv_hidden").get<std::vector<int>>();
    c.conv_out = j.value("conv_out", c.conv_out);
    c.pattern_hidden = j.value("pattern_hidden", c.pattern_hidden);
    c.pattern_layers = j.value("pattern_layers", c.pattern_layers);
    c.panel_hidden = j.value("panel_hidden", c.panel_hidden);
    c.panel_layers = j.value("panel_layers", c.panel_layers);
    c.att_layers = j.value("att_layers", c.att_layers);
    c.att_hidden = j.value("att_hidden", c.att_hidden);
    c.max_edges = j.value("max_edges", c.max_edges);
    return c;
}

// ---------------------------------------------------------------------------
// Parameters. Only the blocks the architecture uses are allocated; the panel
// decoder (LSTM + edge head + placement head) is shared across all slots.
// ---------------------------------------------------------------------------

struct ShapeModelParams {
    ModelConfig config;
    Mlp conv1;
    Mlp conv2;
    LstmStack pattern_lstm;  // baseline
    Mlp attention;           // attention
    LstmStack panel_lstm;
    LinearLayer edge_head;
    LinearLayer placement_head;

    static ShapeModelParams init(const ModelConfig& config, Rng& rng) {
        ShapeModelParams p;
        p.config = config;
        std::vector<int> conv_widths = config.conv_hidden;
        conv_widths.push_back(config.conv_out);
        p.conv1.init(2 * 3, conv_widths, rng);
        p.conv1.relu_output = true;
        p.conv2.init(2 * config.conv_out, conv_widths, rng);
        p.conv2.relu_output = true;

        if (config.is_baseline()) {
            p.pattern_lstm.init(config.point_feature_width(), config.pattern_hidden,
                                config.pattern_layers, rng);
        } else {
            std::vector<int> att_widths(static_cast<std::size_t>(config.att_layers),
                                        config.attention_hidden());
            att_widths.push_back(config.class_count);
            p.attention.init(config.point_feature_width(), att_widths, rng);
        }
        p.panel_lstm.init(config.panel_code_width(), config.panel_hidden, config.panel_layers, rng);
        p.edge_head.init(config.panel_hidden, config.edge_features(), rng);
        p.placement_head.init(config.panel_code_width(), 7, rng);
        return p;
    }

    ShapeModelParams zeros_like() const {
        ShapeModelParams g;
        g.config = config;
        g.conv1 = conv1.zeros_like();
        g.conv2 = conv2.zeros_like();
        g.pattern_lstm = pattern_lstm.zeros_like();
        g.attention = attention.zeros_like();
        g.panel_lstm = panel_lstm.zeros_like();
        g.edge_head = edge_head.zeros_like();
        g.placement_head = placement_head.zeros_like();
        return g;
    }
};

template <typename Fn>
void visit_params(ShapeModelParams& p, Fn&& fn) {
    visit_params(p.conv1, "conv1", fn);
    visit_params(p.conv2, "conv2", fn);
    visit_params(p.pattern_lstm, "pattern_lstm", fn);
    visit_params(p.attention, "attention", fn);
    visit_params(p.panel_lstm, "panel_lstm", fn);
    visit_params(p.edge_head, "edge_head", fn);
    visit_params(p.placement_head, "placement_head", fn);
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

struct ShapeOutput {
    std::vector<Mat> edge_rows;  // class_count matrices, max_edges x F
    Mat placements;              // class_count x 7
    Mat attention_scores;        // N x class_count (attention arch only)
};

struct ShapeGradients {
    std::vector<Mat> d_edge_rows;
    Mat d_placements;
};

struct ShapeCache {
    EdgeConvCache conv1;
    EdgeConvCache conv2;
    Mat point_features;  // N x (conv_out + 3)
    // baseline
    Mat garment_code;  // 1 x feature width
    LstmCache pattern_cache;
    // attention
    MlpCache att_cache;
    Mat att_raw;  // N x C
    SparsemaxCache att_sparsemax;
    Mat pool_weight;  // 1 x C, column sums + eps
    // shared decoder
    Mat panel_codes;  // C x code width
    LstmCache panel_cache;
    std::vector<LinearCache> edge_head_cache;       // per step
    LinearCache placement_cache;
};

constexpr double kPoolEps = 1e-8;

/// Per-point features: two EdgeConv layers plus the raw-coordinate skip.
inline Mat encode_points(const ShapeModelParams& params, const Mat& points_std, ShapeCache& cache) {
    const int k = params.config.k_neighbors;
    const Mat f1 = edgeconv_forward(params.conv1, points_std, k, cache.conv1);
    const Mat f2 = edgeconv_forward(params.conv2, f1, k, cache.conv2);
    Mat out(points_std.rows(), f2.cols() + 3);
    out.leftCols(f2.cols()) = f2;
    out.rightCols(3) = points_std;
    cache.point_features = out;
    return out;
}

namespace detail {

/// Decode per-class panel codes into edge rows and placements with the shared
/// panel decoder (identical weights for every slot).
inline void decode_panels(const ShapeModelParams& params, const Mat& panel_codes,
                          ShapeOutput& out, ShapeCache& cache) {
    const ModelConfig& cfg = params.config;
    const int C = static_cast<int>(panel_codes.rows());
    cache.panel_codes = panel_codes;
    const std::vector<Mat> hs =
        lstm_forward_repeat(params.panel_lstm, panel_codes, cfg.max_edges, cache.panel_cache);
    cache.edge_head_cache.resize(static_cast<std::size_t>(cfg.max_edges));

    out.edge_rows.assign(static_cast<std::size_t>(C),
                         Mat::Zero(cfg.max_edges, cfg.edge_features()));
    for (int t = 0; t < cfg.max_edges; ++t) {
        const Mat rows_t = linear_forward(params.edge_head, hs[static_cast<std::size_t>(t)],
                                          cache.edge_head_cache[static_cast<std::size_t>(t)]);
        for (int c = 0; c < C; ++c) {
            out.edge_rows[static_cast<std::size_t>(c)].row(t) = rows_t.row(c);
        }
    }
    out.placements = linear_forward(params.placement_head, panel_codes, cache.placement_cache);
}

/// Gradient of decode_panels; returns d panel_codes.
inline Mat decode_panels_backward(const ShapeModelParams& params, const ShapeCache& cache,
                                  const ShapeGradients& d_out, ShapeModelParams& grads) {
    const ModelConfig& cfg = params.config;
    const int C = static_cast<int>(cache.panel_codes.rows());

    std::vector<Mat> d_hs(static_cast<std::size_t>(cfg.max_edges));
    for (int t = 0; t < cfg.max_edges; ++t) {
        Mat d_rows_t(C, cfg.edge_features());
        for (int c = 0; c < C; ++c) {
            d_rows_t.row(c) = d_out.d_edge_rows[static_cast<std::size_t>(c)].row(t);
        }
        d_hs[static_cast<std::size_t>(t)] =
            linear_backward(params.edge_head, cache.edge_head_cache[static_cast<std::size_t>(t)],
                            d_rows_t, grads.edge_head);
    }
    Mat d_codes = lstm_backward_repeat(params.panel_lstm, cache.panel_cache, d_hs, grads.panel_lstm);
    d_codes += linear_backward(params.placement_head, cache.placement_cache, d_out.d_placements,
                               grads.placement_head);
    return d_codes;
}

}  // namespace detail

/// Baseline: average-pool the point features into a garment code, unroll the
/// pattern LSTM over the class slots, decode each slot.
inline ShapeOutput forward_baseline(const ShapeModelParams& params, const Mat& points_std,
                                    ShapeCache& cache) {
    const ModelConfig& cfg = params.config;
    const Mat features = encode_points(params, points_std, cache);
    cache.garment_code = features.colwise().mean();
    const std::vector<Mat> codes = lstm_forward_repeat(params.pattern_lstm, cache.garment_code,
                                                       cfg.class_count, cache.pattern_cache);
    Mat panel_codes(cfg.class_count, cfg.pattern_hidden);
    for (int c = 0; c < cfg.class_count; ++c) {
        panel_codes.row(c) = codes[static_cast<std::size_t>(c)].row(0);
    }
    ShapeOutput out;
    detail::decode_panels(params, panel_codes, out, cache);
    return out;
}

/// Attention variant: per-point class scores through SparseMax, panel codes
/// by score-weighted mean pooling of point features.
inline ShapeOutput forward_attention(const ShapeModelParams& params, const Mat& points_std,
                                     ShapeCache& cache) {
    const ModelConfig& cfg = params.config;
    const Mat features = encode_points(params, points_std, cache);
    cache.att_raw = mlp_forward(params.attention, features, cache.att_cache);
    const Mat scores = sparsemax_rows(cache.att_raw, cache.att_sparsemax);

    cache.pool_weight = scores.colwise().sum();
    cache.pool_weight.array() += kPoolEps;
    Mat panel_codes = scores.transpose() * features;  // C x feat
    for (int c = 0; c < cfg.class_count; ++c) {
        panel_codes.row(c) /= cache.pool_weight(0, c);
    }
    ShapeOutput out;
    detail::decode_panels(params, panel_codes, out, cache);
    out.attention_scores = scores;
    return out;
}

inline ShapeOutput shape_forward(const ShapeModelParams& params, const Mat& points_std,
                                 ShapeCache& cache) {
    return params.config.is_baseline() ? forward_baseline(params, points_std, cache)
                                       : forward_attention(params, points_std, cache);
}

/// Full backward pass; accumulates into `grads` and returns the gradient wrt
/// the standardized input points.
inline Mat shape_backward(const ShapeModelParams& params, const ShapeCache& cache,
                          const ShapeGradients& d_out, ShapeModelParams& grads) {
    const ModelConfig& cfg = params.config;
    const Mat d_codes = detail::decode_panels_backward(params, cache, d_out, grads);
    const auto n = cache.point_features.rows();
    const auto feat = cache.point_features.cols();

    Mat d_features = Mat::Zero(n, feat);
    if (cfg.is_baseline()) {
        std::vector<Mat> d_outputs(static_cast<std::size_t>(cfg.class_count));
        for (int c = 0; c < cfg.class_count; ++c) {
            d_outputs[static_cast<std::size_t>(c)] = d_codes.row(c);
        }
        const Mat d_garment = lstm_backward_repeat(params.pattern_lstm, cache.pattern_cache,
                                                   d_outputs, grads.pattern_lstm);
        d_features.rowwise() += d_garment.row(0) / static_cast<double>(n);
    } else {
        const Mat& scores = cache.att_sparsemax.output;
        // codes_c = sum_i s_ic f_i / w_c
        Mat d_codes_scaled = d_codes;
        for (int c = 0; c < cfg.class_count; ++c) {
            d_codes_scaled.row(c) /= cache.pool_weight(0, c);
        }
        d_features.noalias() += scores * d_codes_scaled;
        // d s_ic = (f_i - code_c) . d_code_c / w_c
        const Mat dot_fi = cache.point_features * d_codes_scaled.transpose();  // N x C
        Eigen::VectorXd code_dot(cfg.class_count);
        for (int c = 0; c < cfg.class_count; ++c) {
            code_dot(c) = cache.panel_codes.row(c).dot(d_codes_scaled.row(c));
        }
        Mat d_scores = dot_fi;
        d_scores.rowwise() -= code_dot.transpose();
        const Mat d_raw = sparsemax_backward(cache.att_sparsemax, d_scores);
        d_features += mlp_backward(params.attention, cache.att_cache, d_raw, grads.attention);
    }

    // split the skip-concatenation [conv2_out | xyz]
    Mat d_points = d_features.rightCols(3);
    const Mat d_f2 = d_features.leftCols(feat - 3);
    const Mat d_f1 = edgeconv_backward(params.conv2, cache.conv2, d_f2, grads.conv2);
    d_points += edgeconv_backward(params.conv1, cache.conv1, d_f1, grads.conv1);
    return d_points;
}

}  // namespace sewnet::nn
