#include <catch2/catch_amalgamated.hpp>

#include "nn_test_utils.hpp"
#include "sewnet/losses.hpp"
#include "sewnet/synthetic.hpp"

using namespace sewnet;
using namespace sewnet::nn;
using namespace nn_test;

namespace {

ShapeGradients zero_gradients(int classes, int max_edges, int features) {
    ShapeGradients g;
    g.d_edge_rows.assign(static_cast<std::size_t>(classes), Mat::Zero(max_edges, features));
    g.d_placements = Mat::Zero(classes, 7);
    return g;
}

/// Random standardized-looking prediction/target pair for loss FD checks.
struct LossFixture {
    std::vector<Mat> pred_rows;
    Mat pred_placements;
    PatternTensor target;
    TensorMask mask;
    StitchSupervision supervision;
    int classes = 3;
    int max_edges = 5;
    int features = 8;

    explicit LossFixture(Rng& rng) {
        target = PatternTensor::zeros(classes, features, max_edges);
        mask.slot_present = {true, true, false};
        mask.edge_count = {4, 3, 0};
        for (int c = 0; c < classes; ++c) {
            pred_rows.push_back(random_matrix(max_edges, features, rng, 0.8));
            for (int i = 0; i < mask.edge_count[static_cast<std::size_t>(c)]; ++i) {
                target.edge_block[static_cast<std::size_t>(c)].row(i) =
                    random_matrix(1, features, rng, 0.8);
                target.edge_block[static_cast<std::size_t>(c)](i, 4) = rng.uniform01() < 0.5 ? 0.0 : 1.0;
                for (int f = 5; f < 8; ++f) target.edge_block[static_cast<std::size_t>(c)](i, f) = 0.0;
            }
        }
        pred_placements = random_matrix(classes, 7, rng, 0.6);
        target.placement_block = random_matrix(classes, 7, rng, 0.6);
        // supervision: one stitch between (0,0) and (1,1); non-free adds (0,2)
        supervision.stitches = {{{0, 0}, {1, 1}}};
        supervision.non_free = {{0, 0}, {0, 2}, {1, 1}};
    }

    ShapeOutput output() const {
        ShapeOutput o;
        o.edge_rows = pred_rows;
        o.placements = pred_placements;
        return o;
    }
};

}  // namespace

TEST_CASE("edge_loss values") {
    SECTION("perfect prediction is zero") {
        std::vector<Mat> rows = {Mat::Constant(2, 4, 0.7)};
        CHECK(edge_loss(rows, rows) == 0.0);
    }
    SECTION("single row against zeros averages over the four features") {
        std::vector<Mat> pred = {(Mat(1, 4) << 1, 0, 0, 0).finished()};
        std::vector<Mat> target = {Mat::Zero(1, 4)};
        CHECK(edge_loss(pred, target) == Catch::Approx(0.25));
    }
    SECTION("gradient matches finite differences") {
        Rng rng(1);
        LossFixture fx(rng);
        auto grads = zero_gradients(fx.classes, fx.max_edges, fx.features);
        edge_loss(fx.pred_rows, fx.target.edge_block, &grads);
        const auto eval = [&]() { return edge_loss(fx.pred_rows, fx.target.edge_block); };
        for (int c = 0; c < fx.classes; ++c) {
            CHECK(fd_compare(fx.pred_rows[static_cast<std::size_t>(c)],
                             grads.d_edge_rows[static_cast<std::size_t>(c)], eval) == 0);
        }
    }
}

TEST_CASE("loop_loss values") {
    SECTION("closed loop scores zero") {
        Mat rows = Mat::Zero(5, 4);
        rows.row(0) << 1, 0, 0, 0;
        rows.row(1) << 0, 1, 0, 0;
        rows.row(2) << -1, 0, 0, 0;
        rows.row(3) << 0, -1, 0, 0;
        std::vector<Mat> pred = {rows};
        CHECK(loop_loss(pred, {true}) == 0.0);
    }
    SECTION("open two-edge chain scores sqrt(2)") {
        Mat rows = Mat::Zero(3, 4);
        rows.row(0) << 1, 0, 0, 0;
        rows.row(1) << 0, 1, 0, 0;
        std::vector<Mat> pred = {rows};
        CHECK(loop_loss(pred, {true}) == Catch::Approx(std::sqrt(2.0)));
    }
    SECTION("invariant under common rotation of all edge vectors") {
        Rng rng(7);
        for (int trial = 0; trial < 30; ++trial) {
            Mat rows = random_matrix(6, 4, rng, 1.0);
            std::vector<Mat> pred = {rows};
            const double base = loop_loss(pred, {true});
            const double angle = rng.uniform(0, 2 * kPi);
            Mat rotated = rows;
            for (int i = 0; i < 6; ++i) {
                const double x = rows(i, 0), y = rows(i, 1);
                rotated(i, 0) = std::cos(angle) * x - std::sin(angle) * y;
                rotated(i, 1) = std::sin(angle) * x + std::cos(angle) * y;
            }
            std::vector<Mat> pred_rot = {rotated};
            CHECK(loop_loss(pred_rot, {true}) == Catch::Approx(base).margin(1e-9));
        }
    }
    SECTION("gradient matches finite differences away from closure") {
        Rng rng(2);
        LossFixture fx(rng);
        auto grads = zero_gradients(fx.classes, fx.max_edges, fx.features);
        loop_loss(fx.pred_rows, fx.mask.slot_present, &grads);
        const auto eval = [&]() { return loop_loss(fx.pred_rows, fx.mask.slot_present); };
        for (int c = 0; c < fx.classes; ++c) {
            CHECK(fd_compare(fx.pred_rows[static_cast<std::size_t>(c)],
                             grads.d_edge_rows[static_cast<std::size_t>(c)], eval) == 0);
        }
    }
}

TEST_CASE("placement_loss values") {
    SECTION("identical placements score zero") {
        const Mat p = Mat::Constant(2, 7, 0.4);
        CHECK(placement_loss(p, p, {true, true}) == 0.0);
    }
    SECTION("full-range offset in one channel gives 1/7") {
        Mat pred = Mat::Zero(1, 7);
        Mat target = Mat::Zero(1, 7);
        pred(0, 4) = 1.0;
        CHECK(placement_loss(pred, target, {true}) == Catch::Approx(1.0 / 7.0));
    }
    SECTION("gradient check") {
        Rng rng(3);
        LossFixture fx(rng);
        auto grads = zero_gradients(fx.classes, fx.max_edges, fx.features);
        placement_loss(fx.pred_placements, fx.target.placement_block, fx.mask.slot_present, &grads);
        const auto eval = [&]() {
            return placement_loss(fx.pred_placements, fx.target.placement_block,
                                  fx.mask.slot_present);
        };
        CHECK(fd_compare(fx.pred_placements, grads.d_placements, eval) == 0);
    }
}

TEST_CASE("class_loss values") {
    Rng rng(4);
    LossFixture fx(rng);
    SECTION("confident correct logits give near-zero loss") {
        for (int c = 0; c < fx.classes; ++c) {
            for (int i = 0; i < fx.mask.edge_count[static_cast<std::size_t>(c)]; ++i) {
                const double y = fx.target.edge_block[static_cast<std::size_t>(c)](i, 4);
                fx.pred_rows[static_cast<std::size_t>(c)](i, 4) = y > 0.5 ? 30.0 : -30.0;
            }
        }
        CHECK(class_loss(fx.pred_rows, fx.target.edge_block, fx.mask) < 1e-9);
    }
    SECTION("zero logits score ln 2 per edge") {
        for (auto& rows : fx.pred_rows) rows.col(4).setZero();
        CHECK(class_loss(fx.pred_rows, fx.target.edge_block, fx.mask) ==
              Catch::Approx(std::log(2.0)));
    }
    SECTION("gradient check") {
        auto grads = zero_gradients(fx.classes, fx.max_edges, fx.features);
        class_loss(fx.pred_rows, fx.target.edge_block, fx.mask, &grads);
        const auto eval = [&]() { return class_loss(fx.pred_rows, fx.target.edge_block, fx.mask); };
        for (int c = 0; c < fx.classes; ++c) {
            CHECK(fd_compare(fx.pred_rows[static_cast<std::size_t>(c)],
                             grads.d_edge_rows[static_cast<std::size_t>(c)], eval) == 0);
        }
    }
}

TEST_CASE("tag_loss values") {
    SECTION("stitched pair with equal tags and nothing else scores zero") {
        std::vector<Mat> pred = {Mat::Zero(2, 8)};
        pred[0].row(0).tail(3) << 1.0, 2.0, 3.0;
        pred[0].row(1).tail(3) << 1.0, 2.0, 3.0;
        StitchSupervision sup;
        sup.stitches = {{{0, 0}, {0, 1}}};
        sup.non_free = {{0, 0}, {0, 1}};
        CHECK(tag_loss(pred, sup, 2.0) == 0.0);
    }
    SECTION("two unstitched non-free edges with identical tags: separation = margin") {
        std::vector<Mat> pred = {Mat::Zero(2, 8)};
        pred[0].row(0).tail(3) << 0.5, 0.5, 0.5;
        pred[0].row(1).tail(3) << 0.5, 0.5, 0.5;
        StitchSupervision sup;
        sup.non_free = {{0, 0}, {0, 1}};
        CHECK(tag_loss(pred, sup, 2.0) == Catch::Approx(2.0));
    }
    SECTION("free edges contribute to neither term") {
        Rng rng(5);
        std::vector<Mat> pred = {random_matrix(4, 8, rng, 1.0)};
        StitchSupervision sup;
        sup.stitches = {{{0, 0}, {0, 1}}};
        sup.non_free = {{0, 0}, {0, 1}};
        const double base = tag_loss(pred, sup, 2.0);
        pred[0].row(3).tail(3) << 9.0, 9.0, 9.0;  // free edge tags must not matter
        CHECK(tag_loss(pred, sup, 2.0) == base);
    }
    SECTION("gradient check away from the hinge boundary") {
        Rng rng(6);
        int done = 0;
        for (std::uint64_t attempt = 0; done < 20 && attempt < 100; ++attempt) {
            Rng r = rng.derive(attempt);
            LossFixture fx(r);
            // hinge margin guard
            bool near_boundary = false;
            for (std::size_t i = 0; i < fx.supervision.non_free.size(); ++i) {
                for (std::size_t j = i + 1; j < fx.supervision.non_free.size(); ++j) {
                    const auto a = fx.supervision.non_free[i];
                    const auto b = fx.supervision.non_free[j];
                    const auto ta =
                        fx.pred_rows[static_cast<std::size_t>(a.first)].row(a.second).tail(3);
                    const auto tb =
                        fx.pred_rows[static_cast<std::size_t>(b.first)].row(b.second).tail(3);
                    if (std::abs(2.0 - (ta - tb).squaredNorm()) < kKinkMargin) near_boundary = true;
                }
            }
            if (near_boundary) continue;
            auto grads = zero_gradients(fx.classes, fx.max_edges, fx.features);
            tag_loss(fx.pred_rows, fx.supervision, 2.0, &grads);
            const auto eval = [&]() { return tag_loss(fx.pred_rows, fx.supervision, 2.0); };
            for (int c = 0; c < fx.classes; ++c) {
                CHECK(fd_compare(fx.pred_rows[static_cast<std::size_t>(c)],
                                 grads.d_edge_rows[static_cast<std::size_t>(c)], eval) == 0);
            }
            ++done;
        }
        CHECK(done == 20);
    }
}

TEST_CASE("total_loss schedule and composition") {
    Rng rng(8);
    LossFixture fx(rng);
    LossInputs inputs;
    inputs.target = &fx.target;
    inputs.mask = fx.mask;
    inputs.supervision = fx.supervision;
    LossWeights weights;

    SECTION("stitch terms are inactive before the activation epoch") {
        const auto b = total_loss(fx.output(), inputs, LossMode::with_tags, 10, weights);
        CHECK(b.cls == 0.0);
        CHECK(b.tags == 0.0);
        CHECK(b.total == b.edge + b.loop + b.placement);
    }
    SECTION("stitch terms join at epoch 41") {
        const auto b = total_loss(fx.output(), inputs, LossMode::with_tags, 41, weights);
        CHECK(b.cls > 0.0);
        CHECK(b.total == b.edge + b.loop + b.placement + b.cls + b.tags);
    }
    SECTION("shape-only total equals the sum of its three terms") {
        const auto b = total_loss(fx.output(), inputs, LossMode::shape_only, 100, weights);
        const double e = edge_loss(fx.pred_rows, fx.target.edge_block);
        const double l = loop_loss(fx.pred_rows, fx.mask.slot_present);
        const double p =
            placement_loss(fx.pred_placements, fx.target.placement_block, fx.mask.slot_present);
        CHECK(b.total == Catch::Approx(e + l + p).epsilon(1e-12));
        CHECK(b.cls == 0.0);
    }
    SECTION("weighted breakdown still sums exactly to the total") {
        weights.edge = 0.5;
        weights.loop = 2.0;
        weights.placement = 1.5;
        weights.stitch = 0.25;
        const auto b = total_loss(fx.output(), inputs, LossMode::with_tags, 50, weights);
        CHECK(b.total == b.edge + b.loop + b.placement + b.cls + b.tags);
    }
    SECTION("combined gradient matches finite differences") {
        auto grads = zero_gradients(fx.classes, fx.max_edges, fx.features);
        total_loss(fx.output(), inputs, LossMode::with_tags, 50, weights, &grads);
        const auto eval = [&]() {
            return total_loss(fx.output(), inputs, LossMode::with_tags, 50, weights).total;
        };
        for (int c = 0; c < fx.classes; ++c) {
            CHECK(fd_compare(fx.pred_rows[static_cast<std::size_t>(c)],
                             grads.d_edge_rows[static_cast<std::size_t>(c)], eval) == 0);
        }
        CHECK(fd_compare(fx.pred_placements, grads.d_placements, eval) == 0);
    }
}

TEST_CASE("hungarian assignment agrees with exhaustive search") {
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(5));  // up to 6
        const Mat cost = random_matrix(n, n, rng, 1.0).cwiseAbs();
        const auto rows = hungarian_assignment(cost);
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += cost(i, rows[static_cast<std::size_t>(i)]);
        const auto [best, best_cost] = assignment_oracle(cost);
        CHECK(total == Catch::Approx(best_cost).epsilon(1e-12));
    }
}

TEST_CASE("orderless matching") {
    Rng rng(13);
    const PanelClassMap cmap = synthetic_class_map();

    SECTION("recovers a slot permutation exactly, with zero loss") {
        SyntheticSpec spec;
        Rng sample_rng(555);
        const SewingPattern p =
            sewnet::detail::build_family_sample("dress", sample_rng, spec).pattern;
        PatternTensor target = encode_pattern(p, cmap, false);

        // prediction = target with slots cyclically shifted
        ShapeOutput pred;
        const int C = target.class_count;
        pred.placements = Mat::Zero(C, 7);
        pred.edge_rows.assign(static_cast<std::size_t>(C), Mat::Zero(target.max_edges, 4));
        for (int g = 0; g < C; ++g) {
            const int s = (g + 2) % C;
            pred.edge_rows[static_cast<std::size_t>(s)] = target.edge_block[static_cast<std::size_t>(g)];
            pred.placements.row(s) = target.placement_block.row(g);
        }
        const auto perm = orderless_match(pred, target);
        for (int g = 0; g < C; ++g) {
            CHECK(perm[static_cast<std::size_t>(g)] == (g + 2) % C);
        }

        TensorMask mask = TensorMask::of(target);
        StitchSupervision sup = StitchSupervision::of(p, cmap);
        apply_assignment(perm, target, mask, sup);
        LossInputs inputs;
        inputs.target = &target;
        inputs.mask = mask;
        inputs.supervision = sup;
        const auto b = total_loss(pred, inputs, LossMode::shape_only, 1, LossWeights{});
        CHECK(b.total < 1e-12);
    }

    SECTION("matches exhaustive search over random instances up to 6 panels") {
        for (int trial = 0; trial < 200; ++trial) {
            const int C = 2 + static_cast<int>(rng.uniform_index(5));
            PatternTensor target = PatternTensor::zeros(C, 4, 4);
            ShapeOutput pred;
            pred.placements = random_matrix(C, 7, rng, 1.0);
            for (int c = 0; c < C; ++c) {
                target.edge_block[static_cast<std::size_t>(c)] = random_matrix(4, 4, rng, 1.0);
                pred.edge_rows.push_back(random_matrix(4, 4, rng, 1.0));
            }
            target.placement_block = random_matrix(C, 7, rng, 1.0);

            Mat cost(C, C);
            for (int g = 0; g < C; ++g) {
                for (int s = 0; s < C; ++s) {
                    const auto gv = panel_vector(target.edge_block[static_cast<std::size_t>(g)],
                                                 target.placement_block, g);
                    const auto pv = panel_vector(pred.edge_rows[static_cast<std::size_t>(s)],
                                                 pred.placements, s);
                    cost(g, s) = (gv - pv).norm();
                }
            }
            const auto perm = orderless_match(pred, target);
            double total = 0.0;
            for (int g = 0; g < C; ++g) total += cost(g, perm[static_cast<std::size_t>(g)]);
            const auto [best, best_cost] = assignment_oracle(cost);
            CHECK(total == Catch::Approx(best_cost).epsilon(1e-12));

            // never worse than the identity assignment
            double identity = 0.0;
            for (int g = 0; g < C; ++g) identity += cost(g, g);
            CHECK(total <= identity + 1e-12);
        }
    }
}
