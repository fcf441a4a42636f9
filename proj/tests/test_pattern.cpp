#include <catch2/catch_amalgamated.hpp>

#include "sewnet/codec.hpp"
#include "sewnet/pattern_io.hpp"
#include "sewnet/synthetic.hpp"

using namespace sewnet;

namespace {

const char* kSquareDoc = R"({
  "type": "demo",
  "panels": {
    "body": {
      "vertices": [[0,0],[10,0],[10,20],[0,20]],
      "edges": [{"endpoints":[0,1]},{"endpoints":[1,2]},
                {"endpoints":[2,3]},{"endpoints":[3,0]}],
      "rotation": [0,0,0,1],
      "translation": [0,0,0]
    }
  },
  "stitches": []
})";

PanelClassMap single_class_map() {
    PanelClassMap map;
    map.class_order = {"body"};
    map.assignment["demo"]["body"] = 0;
    return map;
}

SewingPattern random_pattern(Rng& rng) {
    SyntheticSpec spec;
    spec.samples_per_family = 1;
    const std::vector<std::string> families = {"tee", "skirt", "dress", "tee_dress"};
    const std::string family = families[rng.uniform_index(families.size())];
    Rng sample_rng(rng.next_u64());
    SewingPattern p =
        detail::build_family_sample(family, sample_rng, spec).pattern;
    return p;
}

bool patterns_close(const SewingPattern& a, const SewingPattern& b, double tol) {
    if (a.panels.size() != b.panels.size()) return false;
    if (a.stitches.size() != b.stitches.size()) return false;
    auto ia = a.panels.begin();
    auto ib = b.panels.begin();
    for (; ia != a.panels.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return false;
        const Panel& pa = ia->second;
        const Panel& pb = ib->second;
        if (pa.vertices.size() != pb.vertices.size() || pa.edges.size() != pb.edges.size()) {
            return false;
        }
        for (std::size_t i = 0; i < pa.vertices.size(); ++i) {
            if ((pa.vertices[i] - pb.vertices[i]).norm() > tol) return false;
        }
        for (std::size_t i = 0; i < pa.edges.size(); ++i) {
            if (pa.edges[i].start_vertex != pb.edges[i].start_vertex) return false;
            if (pa.edges[i].end_vertex != pb.edges[i].end_vertex) return false;
            if ((pa.edges[i].curvature - pb.edges[i].curvature).norm() > tol) return false;
        }
        const auto qa = pa.placement.rotation.wxyz();
        const auto qb = pb.placement.rotation.wxyz();
        for (int i = 0; i < 4; ++i) {
            if (std::abs(qa[static_cast<std::size_t>(i)] - qb[static_cast<std::size_t>(i)]) > tol) {
                return false;
            }
        }
        if ((pa.placement.translation - pb.placement.translation).norm() > tol) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("parse_pattern ingests a single square panel") {
    const SewingPattern p = parse_pattern(kSquareDoc);
    REQUIRE(p.panels.size() == 1);
    const Panel& body = p.panels.at("body");
    CHECK(body.edge_count() == 4);
    CHECK(p.stitches.empty());
    CHECK(p.garment_type == "demo");
    CHECK(validate_pattern(p, single_class_map()).empty());
}

TEST_CASE("parse_pattern reports the offending path on schema violations") {
    try {
        parse_pattern(R"({"panels": {"a": {"vertices": [[0,0],[1,"x"]]}}})");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("panels.a.vertices[1]") != std::string::npos);
    }
}

TEST_CASE("stitch referencing a missing edge is a validation error") {
    std::string doc = kSquareDoc;
    doc.replace(doc.find("\"stitches\": []"), std::string("\"stitches\": []").size(),
                R"("stitches": [[{"panel":"body","edge":9},{"panel":"body","edge":0}]])");
    CHECK_THROWS_AS(parse_pattern(doc), ValidationError);
}

TEST_CASE("serialize_pattern emits empty stitch lists and roundtrips curvature text") {
    SewingPattern p = parse_pattern(kSquareDoc);
    p.panels.at("body").edges[1].curvature = {0.5, 0.2};
    const std::string text = serialize_pattern(p);
    CHECK(text.find("\"stitches\": []") != std::string::npos);
    CHECK(text.find("0.5") != std::string::npos);
    CHECK(text.find("0.2") != std::string::npos);
    const SewingPattern back = parse_pattern(text);
    CHECK(back.panels.at("body").edges[1].curvature.x == 0.5);
    CHECK(back.panels.at("body").edges[1].curvature.y == 0.2);
}

TEST_CASE("parse(serialize(p)) == p on random synthetic patterns") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const SewingPattern p = random_pattern(rng);
        const SewingPattern back = parse_pattern(serialize_pattern(p));
        CHECK(patterns_close(p, back, 1e-12));
        CHECK(back.stitches.size() == p.stitches.size());
    }
}

TEST_CASE("validate_pattern catches broken loops and duplicate classes") {
    SewingPattern p = parse_pattern(kSquareDoc);
    PanelClassMap cmap = single_class_map();

    SECTION("valid square has no violations") {
        CHECK(validate_pattern(p, cmap).empty());
    }

    SECTION("edge list skipping a vertex breaks the loop") {
        Panel& body = p.panels.at("body");
        body.edges.erase(body.edges.begin() + 2);  // chain jumps from vertex 2 to 3
        bool found = false;
        for (const auto& v : validate_pattern(p, cmap)) {
            if (v.code == "loop_not_closed") found = true;
        }
        CHECK(found);
    }

    SECTION("two panels in the same class") {
        Panel other = p.panels.at("body");
        other.name = "body2";
        p.panels.emplace("body2", other);
        cmap.assignment["demo"]["body2"] = 0;
        bool found = false;
        for (const auto& v : validate_pattern(p, cmap)) {
            if (v.code == "duplicate_class") found = true;
        }
        CHECK(found);
    }

    SECTION("panel exceeding the edge cap") {
        Panel big;
        big.name = "big";
        const int n = kMaxEdges + 2;
        for (int i = 0; i < n; ++i) {
            const double a = 2 * kPi * i / n;
            big.vertices.push_back({10 * std::cos(a) - 10, 10 * std::sin(a)});
        }
        const Vec2 origin = big.vertices.front();
        for (Vec2& v : big.vertices) v = v - origin;
        for (int i = 0; i < n; ++i) big.edges.push_back({i, (i + 1) % n, {0, 0}});
        SewingPattern q;
        q.garment_type = "demo";
        q.panels.emplace("big", big);
        PanelClassMap cm;
        cm.class_order = {"big"};
        cm.assignment["demo"]["big"] = 0;
        bool found = false;
        for (const auto& v : validate_pattern(q, cm)) {
            if (v.code == "edge_count_exceeds_max") found = true;
        }
        CHECK(found);
    }

    SECTION("duplicate stitch edge") {
        p.stitches.push_back({{"body", 0}, {"body", 1}});
        p.stitches.push_back({{"body", 0}, {"body", 2}});
        int dup = 0;
        for (const auto& v : validate_pattern(p, cmap)) {
            if (v.code == "stitch_duplicate_edge") ++dup;
        }
        CHECK(dup == 1);
    }
}

TEST_CASE("class map json roundtrip") {
    const PanelClassMap map = synthetic_class_map();
    const PanelClassMap back = class_map_from_json(class_map_to_json(map));
    CHECK(back.class_order == map.class_order);
    CHECK(back.assignment == map.assignment);
    CHECK(back.class_of("tee", "sleeve_left") == 2);
    // decoded patterns resolve by class name fallback
    CHECK(back.class_of("", "skirt_back") == 5);
    CHECK_FALSE(back.class_of("tee", "unknown_panel").has_value());
}
