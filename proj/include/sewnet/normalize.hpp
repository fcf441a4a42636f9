#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "sewnet/cloud.hpp"
#include "sewnet/codec.hpp"

namespace sewnet {

// ---------------------------------------------------------------------------
// Feature normalization
//
// Point coordinates, edge vectors and curvature coordinates are standardized
// (zero mean, unit deviation); rotations and translations are min-max
// normalized into [0, 1]. Statistics are fitted on the training split only
// and versioned by a content hash so checkpoints can refuse foreign data.
// ---------------------------------------------------------------------------

struct ChannelStats {
    double mean = 0.0;
    double std = 1.0;
};

struct RangeStats {
    double min = 0.0;
    double max = 1.0;

    double span() const { return max - min; }
};

struct NormalizationStats {
    std::array<ChannelStats, 3> point;
    std::array<ChannelStats, 2> edge;
    std::array<ChannelStats, 2> curvature;
    std::array<RangeStats, 4> rotation;
    std::array<RangeStats, 3> translation;
    std::string version;

    void refresh_version() {
        std::string payload;
        char buf[64];
        auto put = [&](double v) {
            std::snprintf(buf, sizeof buf, "%.17g;", v);
            payload += buf;
        };
        for (const auto& c : point) {
            put(c.mean);
            put(c.std);
        }
        for (const auto& c : edge) {
            put(c.mean);
            put(c.std);
        }
        for (const auto& c : curvature) {
            put(c.mean);
            put(c.std);
        }
        for (const auto& r : rotation) {
            put(r.min);
            put(r.max);
        }
        for (const auto& r : translation) {
            put(r.min);
            put(r.max);
        }
        version = to_hex(fnv1a64(payload));
    }
};

namespace detail {

class RunningMoments {
public:
    void add(double v) {
        ++n_;
        sum_ += v;
        sum_sq_ += v * v;
    }
    ChannelStats finish(const std::string& what) const {
        if (n_ == 0) throw Error("fit_normalization: no data for channel " + what);
        const double mean = sum_ / static_cast<double>(n_);
        const double var = std::max(0.0, sum_sq_ / static_cast<double>(n_) - mean * mean);
        const double std = std::sqrt(var);
        if (std < 1e-12) throw Error("fit_normalization: zero-variance channel " + what);
        return {mean, std};
    }

private:
    std::size_t n_ = 0;
    double sum_ = 0.0;
    double sum_sq_ = 0.0;
};

class RunningRange {
public:
    void add(double v) {
        min_ = std::min(min_, v);
        max_ = std::max(max_, v);
        seen_ = true;
    }
    RangeStats finish(const std::string& what) const {
        if (!seen_) throw Error("fit_normalization: no data for channel " + what);
        if (max_ - min_ < 1e-12) throw Error("fit_normalization: degenerate range channel " + what);
        return {min_, max_};
    }

private:
    double min_ = std::numeric_limits<double>::infinity();
    double max_ = -std::numeric_limits<double>::infinity();
    bool seen_ = false;
};

}  // namespace detail

/// Fit statistics over the training split. Edge and curvature moments use
/// only non-padding rows; rotation/translation ranges use occupied slots.
inline NormalizationStats fit_normalization(const std::vector<PointCloudSample>& clouds,
                                            const std::vector<PatternTensor>& tensors) {
    if (clouds.empty() || tensors.empty()) {
        throw Error("fit_normalization: empty training split");
    }

    NormalizationStats stats;
    std::array<detail::RunningMoments, 3> point;
    std::array<detail::RunningMoments, 2> edge;
    std::array<detail::RunningMoments, 2> curvature;
    std::array<detail::RunningRange, 4> rotation;
    std::array<detail::RunningRange, 3> translation;

    for (const auto& cloud : clouds) {
        for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
            for (int c = 0; c < 3; ++c) point[static_cast<std::size_t>(c)].add(cloud.points(i, c));
        }
    }
    for (const auto& t : tensors) {
        for (int slot = 0; slot < t.class_count; ++slot) {
            const Eigen::MatrixXd& rows = t.edge_block[static_cast<std::size_t>(slot)];
            bool occupied = false;
            for (int i = 0; i < t.max_edges; ++i) {
                if (rows(i, 0) == 0.0 && rows(i, 1) == 0.0) continue;  // padding row
                occupied = true;
                edge[0].add(rows(i, 0));
                edge[1].add(rows(i, 1));
                curvature[0].add(rows(i, 2));
                curvature[1].add(rows(i, 3));
            }
            if (occupied) {
                for (int c = 0; c < 4; ++c) {
                    rotation[static_cast<std::size_t>(c)].add(t.placement_block(slot, c));
                }
                for (int c = 0; c < 3; ++c) {
                    translation[static_cast<std::size_t>(c)].add(t.placement_block(slot, 4 + c));
                }
            }
        }
    }

    const char* pt_names[3] = {"point.x", "point.y", "point.z"};
    const char* e_names[2] = {"edge.x", "edge.y"};
    const char* c_names[2] = {"curvature.x", "curvature.y"};
    const char* r_names[4] = {"rotation.x", "rotation.y", "rotation.z", "rotation.w"};
    const char* t_names[3] = {"translation.x", "translation.y", "translation.z"};
    for (int c = 0; c < 3; ++c) stats.point[static_cast<std::size_t>(c)] = point[static_cast<std::size_t>(c)].finish(pt_names[c]);
    for (int c = 0; c < 2; ++c) stats.edge[static_cast<std::size_t>(c)] = edge[static_cast<std::size_t>(c)].finish(e_names[c]);
    for (int c = 0; c < 2; ++c) stats.curvature[static_cast<std::size_t>(c)] = curvature[static_cast<std::size_t>(c)].finish(c_names[c]);
    for (int c = 0; c < 4; ++c) stats.rotation[static_cast<std::size_t>(c)] = rotation[static_cast<std::size_t>(c)].finish(r_names[c]);
    for (int c = 0; c < 3; ++c) stats.translation[static_cast<std::size_t>(c)] = translation[static_cast<std::size_t>(c)].finish(t_names[c]);
    stats.refresh_version();
    return stats;
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd standardize_points(const Eigen::MatrixXd& points, const NormalizationStats& s) {
    Eigen::MatrixXd out = points;
    for (int c = 0; c < 3; ++c) {
        out.col(c) = (out.col(c).array() - s.point[static_cast<std::size_t>(c)].mean) /
                     s.point[static_cast<std::size_t>(c)].std;
    }
    return out;
}

inline Eigen::MatrixXd destandardize_points(const Eigen::MatrixXd& points, const NormalizationStats& s) {
    Eigen::MatrixXd out = points;
    for (int c = 0; c < 3; ++c) {
        out.col(c) = out.col(c).array() * s.point[static_cast<std::size_t>(c)].std +
                     s.point[static_cast<std::size_t>(c)].mean;
    }
    return out;
}

/// Standardize a ground-truth tensor in place. Padding rows and absent slots
/// stay exactly zero, preserving the zero-placeholder convention; only
/// occupied slots get their placement normalized.
inline void standardize_tensor(PatternTensor& t, const NormalizationStats& s) {
    for (int slot = 0; slot < t.class_count; ++slot) {
        Eigen::MatrixXd& rows = t.edge_block[static_cast<std::size_t>(slot)];
        bool occupied = false;
        for (int i = 0; i < t.max_edges; ++i) {
            if (rows(i, 0) == 0.0 && rows(i, 1) == 0.0) continue;  // padding row
            occupied = true;
            rows(i, 0) = (rows(i, 0) - s.edge[0].mean) / s.edge[0].std;
            rows(i, 1) = (rows(i, 1) - s.edge[1].mean) / s.edge[1].std;
            rows(i, 2) = (rows(i, 2) - s.curvature[0].mean) / s.curvature[0].std;
            rows(i, 3) = (rows(i, 3) - s.curvature[1].mean) / s.curvature[1].std;
        }
        if (occupied) {
            for (int c = 0; c < 4; ++c) {
                const RangeStats& r = s.rotation[static_cast<std::size_t>(c)];
                t.placement_block(slot, c) = (t.placement_block(slot, c) - r.min) / r.span();
            }
            for (int c = 0; c < 3; ++c) {
                const RangeStats& r = s.translation[static_cast<std::size_t>(c)];
                t.placement_block(slot, 4 + c) = (t.placement_block(slot, 4 + c) - r.min) / r.span();
            }
        }
    }
    t.stats_version = s.version;
}

/// Invert standardization on a network-produced tensor. Every row is mapped
/// back; rows the network predicted as (near-)zero land near the fitted edge
/// means, which vanish for closed training loops, so the decode threshold on
/// the edge-vector norm stays meaningful.
inline void destandardize_tensor(PatternTensor& t, const NormalizationStats& s) {
    for (int slot = 0; slot < t.class_count; ++slot) {
        Eigen::MatrixXd& rows = t.edge_block[static_cast<std::size_t>(slot)];
        for (int i = 0; i < t.max_edges; ++i) {
            rows(i, 0) = rows(i, 0) * s.edge[0].std + s.edge[0].mean;
            rows(i, 1) = rows(i, 1) * s.edge[1].std + s.edge[1].mean;
            rows(i, 2) = rows(i, 2) * s.curvature[0].std + s.curvature[0].mean;
            rows(i, 3) = rows(i, 3) * s.curvature[1].std + s.curvature[1].mean;
        }
        for (int c = 0; c < 4; ++c) {
            const RangeStats& r = s.rotation[static_cast<std::size_t>(c)];
            t.placement_block(slot, c) = t.placement_block(slot, c) * r.span() + r.min;
        }
        for (int c = 0; c < 3; ++c) {
            const RangeStats& r = s.translation[static_cast<std::size_t>(c)];
            t.placement_block(slot, 4 + c) = t.placement_block(slot, 4 + c) * r.span() + r.min;
        }
    }
    t.stats_version.clear();
}

// ---------------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------------

inline nlohmann::json normalization_to_json(const NormalizationStats& s) {
    nlohmann::json j;
    auto put_channels = [](const auto& arr) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& c : arr) out.push_back({{"mean", c.mean}, {"std", c.std}});
        return out;
    };
    auto put_ranges = [](const auto& arr) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& r : arr) out.push_back({{"min", r.min}, {"max", r.max}});
        return out;
    };
    j["point"] = put_channels(s.point);
    j["edge"] = put_channels(s.edge);
    j["curvature"] = put_channels(s.curvature);
    j["rotation"] = put_ranges(s.rotation);
    j["translation"] = put_ranges(s.translation);
    j["version"] = s.version;
    return j;
}

inline NormalizationStats normalization_from_json(const nlohmann::json& j) {
    NormalizationStats s;
    auto get_channels = [&](const char* key, auto& arr) {
        const auto& src = j.at(key);
        if (!src.is_array() || src.size() != arr.size()) {
            throw ParseError(std::string("normalization stats: bad channel block ") + key);
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            arr[i].mean = src.at(i).at("mean").get<double>();
            arr[i].std = src.at(i).at("std").get<double>();
        }
    };
    auto get_ranges = [&](const char* key, auto& arr) {
        const auto& src = j.at(key);
        if (!src.is_array() || src.size() != arr.size()) {
            throw ParseError(std::string("normalization stats: bad range block ") + key);
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            arr[i].min = src.at(i).at("min").get<double>();
            arr[i].max = src.at(i).at("max").get<double>();
        }
    };
    get_channels("point", s.point);
    get_channels("edge", s.edge);
    get_channels("curvature", s.curvature);
    get_ranges("rotation", s.rotation);
    get_ranges("translation", s.translation);
    s.version = j.value("version", std::string{});
    if (s.version.empty()) s.refresh_version();
    return s;
}

}  // namespace sewnet
