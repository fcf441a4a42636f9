#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <set>

#include "sewnet/cloud.hpp"
#include "sewnet/dataset.hpp"
#include "sewnet/synthetic.hpp"

using namespace sewnet;

namespace {

TriMesh unit_square_mesh() {
    TriMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}, {0, 2, 3}};
    return m;
}

}  // namespace

TEST_CASE("sample_point_cloud stays on the surface and is seed-deterministic") {
    const TriMesh mesh = unit_square_mesh();
    Rng rng(5);
    const PointCloudSample cloud = sample_point_cloud(mesh, 4, rng);
    REQUIRE(cloud.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(cloud.points(i, 0) >= 0.0);
        CHECK(cloud.points(i, 0) <= 1.0);
        CHECK(cloud.points(i, 1) >= 0.0);
        CHECK(cloud.points(i, 1) <= 1.0);
        CHECK(cloud.points(i, 2) == 0.0);
    }

    Rng rng_a(77), rng_b(77);
    const PointCloudSample a = sample_point_cloud(mesh, 100, rng_a);
    const PointCloudSample b = sample_point_cloud(mesh, 100, rng_b);
    CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(sample_point_cloud(TriMesh{}, 4, rng), Error);
    CHECK_THROWS_AS(sample_point_cloud(mesh, 0, rng), Error);
}

TEST_CASE("per-triangle sample counts are proportional to area") {
    // two triangles with area ratio 3:1
    TriMesh m;
    m.vertices = {{0, 0, 0}, {3, 0, 0}, {0, 2, 0}, {4, 0, 0}, {5, 0, 0}, {4, 2, 0}};
    m.faces = {{0, 1, 2}, {3, 4, 5}};
    const double a0 = m.face_area(0);
    const double a1 = m.face_area(1);
    const double p = a0 / (a0 + a1);

    Rng rng(2025);
    const int n = 100000;
    const PointCloudSample cloud = sample_point_cloud(m, n, rng);
    int in_first = 0;
    for (int i = 0; i < n; ++i) {
        if (cloud.points(i, 0) < 3.5) ++in_first;
    }
    const double mean = n * p;
    const double sigma = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(in_first - mean) < 3.0 * sigma);
}

TEST_CASE("scan imitation obeys its contracts") {
    const TriMesh mesh = unit_square_mesh();
    Rng rng(9);
    PointCloudSample cloud = sample_point_cloud(mesh, 2000, rng);
    cloud.points *= 50.0;  // cm scale

    SECTION("zero occluders is identity") {
        ScanImitationParams params;
        params.occluders = 0;
        const auto result = corrupt_scan_imitation(cloud, params, rng);
        CHECK((result.cloud.points - cloud.points).cwiseAbs().maxCoeff() == 0.0);
    }

    SECTION("at most 40 percent of points removed, holes are contiguous") {
        ScanImitationParams params;
        params.occluders = 4;
        params.radius_min_cm = 5.0;
        params.radius_max_cm = 10.0;
        const auto result = corrupt_scan_imitation(cloud, params, rng);
        CHECK(result.cloud.size() >= static_cast<int>(0.6 * cloud.size()));
        CHECK(result.cloud.corruption == Corruption::scan);

        // every removed point lies within some occluder sphere
        std::set<std::pair<double, double>> kept;
        for (int i = 0; i < result.cloud.size(); ++i) {
            kept.emplace(result.cloud.points(i, 0), result.cloud.points(i, 1));
        }
        for (int i = 0; i < cloud.size(); ++i) {
            if (kept.count({cloud.points(i, 0), cloud.points(i, 1)}) > 0) continue;
            const Vec3 p{cloud.points(i, 0), cloud.points(i, 1), cloud.points(i, 2)};
            bool covered = false;
            for (std::size_t o = 0; o < result.occluder_centers.size(); ++o) {
                if ((p - result.occluder_centers[o]).norm() <= result.occluder_radii[o]) {
                    covered = true;
                    break;
                }
            }
            CHECK(covered);
        }
    }
}

TEST_CASE("gaussian noise statistics and determinism") {
    const TriMesh mesh = unit_square_mesh();
    Rng rng(11);
    PointCloudSample cloud = sample_point_cloud(mesh, 2000, rng);
    cloud.points *= 100.0;

    SECTION("sigma zero is identity") {
        Rng r(1);
        const auto noisy = add_gaussian_noise(cloud, 0.0, r);
        CHECK((noisy.points - cloud.points).cwiseAbs().maxCoeff() == 0.0);
    }

    SECTION("empirical std within 5 percent of sigma") {
        Rng r(2);
        const auto noisy = add_gaussian_noise(cloud, 1.0, r);
        const Eigen::MatrixXd d = noisy.points - cloud.points;
        const double std_hat = std::sqrt(d.squaredNorm() / static_cast<double>(d.size()));
        CHECK(std::abs(std_hat - 1.0) < 0.05);
    }

    SECTION("fixed seed reproduces") {
        Rng r1(3), r2(3);
        const auto n1 = add_gaussian_noise(cloud, 0.5, r1);
        const auto n2 = add_gaussian_noise(cloud, 0.5, r2);
        CHECK((n1.points - n2.points).cwiseAbs().maxCoeff() == 0.0);
        CHECK_THROWS_AS(add_gaussian_noise(cloud, -0.1, r1), Error);
    }
}

TEST_CASE("synthetic generator invariants") {
    SyntheticSpec spec;
    spec.samples_per_family = 6;
    spec.val_per_type = 1;
    spec.test_per_type = 1;
    Rng rng(31);
    const SyntheticResult result = generate_synthetic_dataset(spec, rng);
    const Dataset& ds = result.dataset;

    SECTION("skirt family template: 2 panels stitched along both sides, 4 stitches") {
        const DatasetSample& s = ds.sample("skirt_0000");
        CHECK(s.pattern.panels.size() == 2);
        CHECK(s.pattern.stitches.size() == 4);
        CHECK(s.pattern.panels.count("skirt_front") == 1);
        CHECK(s.pattern.panels.count("skirt_back") == 1);
    }

    SECTION("every generated pattern validates") {
        for (const auto& s : ds.samples) {
            const auto violations = validate_pattern(s.pattern, ds.class_map);
            for (const auto& v : violations) {
                INFO(s.id << ": " << v.code << ": " << v.message);
                CHECK(false);
            }
            CHECK(!s.mesh.empty());
        }
    }

    SECTION("held-out family never appears outside test_unseen; splits disjoint and cover") {
        std::set<std::string> seen_ids;
        auto check_unseen_free = [&](const std::vector<std::string>& ids) {
            for (const auto& id : ids) {
                CHECK(id.find("tee_dress") == std::string::npos);
                CHECK(seen_ids.insert(id).second);
            }
        };
        check_unseen_free(ds.split.train);
        check_unseen_free(ds.split.validation);
        check_unseen_free(ds.split.test_seen);
        for (const auto& id : ds.split.test_unseen) {
            CHECK(id.rfind("tee_dress_", 0) == 0);
            CHECK(seen_ids.insert(id).second);
        }
        CHECK(seen_ids.size() == ds.samples.size());
    }

    SECTION("unknown family rejected") {
        SyntheticSpec bad = spec;
        bad.families.push_back("tuxedo");
        Rng r(1);
        CHECK_THROWS_AS(generate_synthetic_dataset(bad, r), Error);
    }

    SECTION("dataset directory roundtrip") {
        const std::string dir = (std::filesystem::temp_directory_path() / "sewnet_ds_test").string();
        std::filesystem::remove_all(dir);
        save_dataset(ds, dir);
        const Dataset back = load_dataset(dir);
        CHECK(back.samples.size() == ds.samples.size());
        CHECK(back.split.train == ds.split.train);
        CHECK(back.split.test_unseen == ds.split.test_unseen);
        CHECK(back.class_map.class_order == ds.class_map.class_order);
        CHECK_FALSE(back.content_hash.empty());
        const DatasetSample& orig = ds.sample("tee_0001");
        const DatasetSample& copy = back.sample("tee_0001");
        CHECK(copy.mesh.vertices.size() == orig.mesh.vertices.size());
        CHECK(copy.pattern.stitches.size() == orig.pattern.stitches.size());
        std::filesystem::remove_all(dir);
    }

    SECTION("generation is deterministic in the seed") {
        Rng r1(31), r2(31);
        SyntheticSpec small = spec;
        small.samples_per_family = 2;
        const auto a = generate_synthetic_dataset(small, r1);
        const auto b = generate_synthetic_dataset(small, r2);
        REQUIRE(a.dataset.samples.size() == b.dataset.samples.size());
        for (std::size_t i = 0; i < a.dataset.samples.size(); ++i) {
            CHECK(serialize_pattern(a.dataset.samples[i].pattern) ==
                  serialize_pattern(b.dataset.samples[i].pattern));
        }
    }
}
