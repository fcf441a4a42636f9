#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "sewnet/mesh.hpp"

namespace sewnet {

// ---------------------------------------------------------------------------
// Point clouds
// ---------------------------------------------------------------------------

enum class Corruption { clean, scan, gauss };

inline std::string corruption_tag(Corruption kind, double sigma = 0.0) {
    switch (kind) {
        case Corruption::clean: return "clean";
        case Corruption::scan: return "scan";
        case Corruption::gauss: return "gauss(" + std::to_string(sigma) + ")";
    }
    return "clean";
}

struct PointCloudSample {
    Eigen::MatrixXd points;  // N x 3, body-frame cm
    std::string source_id;
    Corruption corruption = Corruption::clean;
    double noise_sigma = 0.0;

    int size() const { return static_cast<int>(points.rows()); }
};

/// Draw n points area-uniformly from a triangle mesh (triangle picked by
/// area-weighted inversion, position by the sqrt barycentric trick).
inline PointCloudSample sample_point_cloud(const TriMesh& mesh, int n, Rng& rng) {
    if (mesh.empty()) throw Error("sample_point_cloud: empty mesh");
    if (n < 1) throw Error("sample_point_cloud: n must be >= 1");

    std::vector<double> cumulative(mesh.faces.size());
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        total += mesh.face_area(f);
        cumulative[f] = total;
    }
    if (total <= 0.0) throw Error("sample_point_cloud: mesh has zero area");

    PointCloudSample out;
    out.points.resize(n, 3);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01() * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t f = std::min(static_cast<std::size_t>(it - cumulative.begin()),
                                       mesh.faces.size() - 1);
        const auto& tri = mesh.faces[f];
        const Vec3 a = mesh.vertices[static_cast<std::size_t>(tri[0])];
        const Vec3 b = mesh.vertices[static_cast<std::size_t>(tri[1])];
        const Vec3 c = mesh.vertices[static_cast<std::size_t>(tri[2])];
        const double r1 = std::sqrt(rng.uniform01());
        const double r2 = rng.uniform01();
        const Vec3 p = a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2);
        out.points(i, 0) = p.x;
        out.points(i, 1) = p.y;
        out.points(i, 2) = p.z;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Corruption
// ---------------------------------------------------------------------------

struct ScanImitationParams {
    int occluders = 3;
    double radius_min_cm = 4.0;
    double radius_max_cm = 8.0;
    double max_removed_fraction = 0.4;
    int max_attempts = 20;
};

struct ScanImitationResult {
    PointCloudSample cloud;
    std::vector<Vec3> occluder_centers;
    std::vector<double> occluder_radii;
};

/// Remove all points inside k spheres centered on randomly chosen existing
/// points, imitating scanner shadows. Occluder draws that would delete more
/// than the allowed fraction are resampled; if that keeps failing the
/// occluder count is reduced, so the contract never removes more than the cap.
inline ScanImitationResult corrupt_scan_imitation(const PointCloudSample& cloud,
                                                  const ScanImitationParams& params, Rng& rng) {
    const int n = cloud.size();
    ScanImitationResult result;
    result.cloud.source_id = cloud.source_id;
    result.cloud.corruption = Corruption::scan;

    if (params.occluders <= 0 || n == 0) {
        result.cloud.points = cloud.points;
        return result;
    }

    const int max_removed = static_cast<int>(params.max_removed_fraction * n);
    for (int k = params.occluders; k >= 0; --k) {
        if (k == 0) {
            result.cloud.points = cloud.points;
            return result;
        }
        for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
            std::vector<Vec3> centers;
            std::vector<double> radii;
            for (int o = 0; o < k; ++o) {
                const auto row = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n)));
                centers.push_back({cloud.points(row, 0), cloud.points(row, 1), cloud.points(row, 2)});
                radii.push_back(rng.uniform(params.radius_min_cm, params.radius_max_cm));
            }
            std::vector<int> kept;
            kept.reserve(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                const Vec3 p{cloud.points(i, 0), cloud.points(i, 1), cloud.points(i, 2)};
                bool inside = false;
                for (std::size_t o = 0; o < centers.size(); ++o) {
                    if ((p - centers[o]).norm() <= radii[o]) {
                        inside = true;
                        break;
                    }
                }
                if (!inside) kept.push_back(i);
            }
            if (n - static_cast<int>(kept.size()) > max_removed) continue;
            result.cloud.points.resize(static_cast<Eigen::Index>(kept.size()), 3);
            for (std::size_t i = 0; i < kept.size(); ++i) {
                result.cloud.points.row(static_cast<Eigen::Index>(i)) = cloud.points.row(kept[i]);
            }
            result.occluder_centers = std::move(centers);
            result.occluder_radii = std::move(radii);
            return result;
        }
    }
    result.cloud.points = cloud.points;
    return result;
}

/// I.i.d. per-coordinate Gaussian perturbation with standard deviation sigma.
inline PointCloudSample add_gaussian_noise(const PointCloudSample& cloud, double sigma, Rng& rng) {
    if (sigma < 0.0) throw Error("add_gaussian_noise: sigma must be >= 0");
    PointCloudSample out;
    out.source_id = cloud.source_id;
    out.corruption = Corruption::gauss;
    out.noise_sigma = sigma;
    out.points = cloud.points;
    if (sigma == 0.0) return out;
    for (Eigen::Index i = 0; i < out.points.rows(); ++i) {
        for (Eigen::Index c = 0; c < 3; ++c) {
            out.points(i, c) += rng.normal(0.0, sigma);
        }
    }
    return out;
}

}  // namespace sewnet
