#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "sewnet/dataset.hpp"
#include "sewnet/geometry.hpp"

namespace sewnet {

// ---------------------------------------------------------------------------
// Procedural garment generator
//
// Four parametric families built from shared panel templates:
//   tee       : top_front, top_back, sleeve_left, sleeve_right
//   skirt     : skirt_front, skirt_back
//   dress     : top_front, top_back, skirt_front, skirt_back (waist stitches)
//   tee_dress : all six panels (tee + skirt + waist stitches)
//
// Every class keeps a fixed edge-count template across families; families
// differ in which classes appear, how they are stitched, proportions, and
// placement. Panels are placed flat around a body proxy; the drape stand-in
// (cylinder wrap plus a mild sinusoid) is applied to the mesh only, so the
// pattern stays the exact flat ground truth for its cloud.
// ---------------------------------------------------------------------------

struct SyntheticSpec {
    std::vector<std::string> families = {"tee", "skirt", "dress", "tee_dress"};
    std::string unseen_family = "tee_dress";
    int samples_per_family = 200;
    int val_per_type = 25;
    int test_per_type = 25;
    double boundary_step_cm = 2.5;  // outline tessellation step
    int subdivision_rounds = 1;
};

struct SyntheticResult {
    Dataset dataset;
    std::vector<std::string> families_of_samples;
};

inline PanelClassMap synthetic_class_map() {
    PanelClassMap map;
    map.class_order = {"top_front", "top_back", "sleeve_left", "sleeve_right",
                       "skirt_front", "skirt_back"};
    const std::map<std::string, std::vector<std::string>> per_family = {
        {"tee", {"top_front", "top_back", "sleeve_left", "sleeve_right"}},
        {"skirt", {"skirt_front", "skirt_back"}},
        {"dress", {"top_front", "top_back", "skirt_front", "skirt_back"}},
        {"tee_dress",
         {"top_front", "top_back", "sleeve_left", "sleeve_right", "skirt_front", "skirt_back"}},
    };
    for (const auto& [family, panels] : per_family) {
        for (const std::string& p : panels) {
            const auto it = std::find(map.class_order.begin(), map.class_order.end(), p);
            map.assignment[family][p] = static_cast<int>(it - map.class_order.begin());
        }
    }
    return map;
}

namespace detail {

// ---- labeled panel construction -------------------------------------------

struct PanelOutline {
    std::vector<Vec2> vertices;        // polyline corners, CCW
    std::vector<Vec2> curvatures;      // curvature of edge i: v[i] -> v[i+1]
    std::vector<std::string> labels;   // edge labels for stitch templates
};

struct LabeledPanel {
    Panel panel;
    std::map<std::string, int> edge_of;  // label -> edge index after normalization
};

inline double signed_area(const std::vector<Vec2>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

/// Rotate the loop so the lexicographically smallest vertex comes first,
/// translate that vertex to the origin, and record label -> index.
inline LabeledPanel finish_panel(const std::string& name, const PanelOutline& outline,
                                 const Placement& placement) {
    const std::size_t n = outline.vertices.size();
    if (n < 3 || outline.curvatures.size() != n || outline.labels.size() != n) {
        throw GeometryError("synthetic panel '" + name + "': malformed outline");
    }
    if (signed_area(outline.vertices) <= 0.0) {
        throw GeometryError("synthetic panel '" + name + "': outline must be CCW");
    }
    std::size_t first = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const Vec2& a = outline.vertices[i];
        const Vec2& b = outline.vertices[first];
        if (a.x < b.x || (a.x == b.x && a.y < b.y)) first = i;
    }

    LabeledPanel out;
    out.panel.name = name;
    out.panel.placement = placement;
    const Vec2 origin = outline.vertices[first];
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = (first + k) % n;
        out.panel.vertices.push_back(outline.vertices[src] - origin);
        Edge e;
        e.start_vertex = static_cast<int>(k);
        e.end_vertex = static_cast<int>((k + 1) % n);
        e.curvature = outline.curvatures[src];
        out.panel.edges.push_back(e);
        out.edge_of[outline.labels[src]] = static_cast<int>(k);
    }
    return out;
}

// ---- panel templates -------------------------------------------------------

struct TopParams {
    double waist_w;     // hem width
    double underarm_w;  // width at armhole base (> shoulder_w)
    double shoulder_w;  // width across shoulder points
    double neck_w;
    double length;
    double armhole_d;
    double neck_cy;     // neck dip, edge-local units
    double armhole_cy;  // armhole scoop
};

inline PanelOutline top_outline(const TopParams& p) {
    PanelOutline o;
    o.vertices = {{-p.waist_w / 2, 0},
                  {p.waist_w / 2, 0},
                  {p.underarm_w / 2, p.length - p.armhole_d},
                  {p.shoulder_w / 2, p.length},
                  {p.neck_w / 2, p.length},
                  {-p.neck_w / 2, p.length},
                  {-p.shoulder_w / 2, p.length},
                  {-p.underarm_w / 2, p.length - p.armhole_d}};
    o.curvatures = {{0, 0}, {0, 0}, {0.5, p.armhole_cy}, {0, 0},
                    {0.5, p.neck_cy}, {0, 0}, {0.5, p.armhole_cy}, {0, 0}};
    o.labels = {"hem", "side_right", "armhole_right", "shoulder_right",
                "neck", "shoulder_left", "armhole_left", "side_left"};
    return o;
}

struct SleeveParams {
    double wrist_w;
    double cap_w;
    double length;
    double cap_h;
    double cap_cy;  // negative: convex cap
};

inline PanelOutline sleeve_outline(const SleeveParams& p) {
    PanelOutline o;
    o.vertices = {{-p.wrist_w / 2, 0},
                  {p.wrist_w / 2, 0},
                  {p.cap_w / 2, p.length},
                  {0, p.length + p.cap_h},
                  {-p.cap_w / 2, p.length}};
    o.curvatures = {{0, 0}, {0, 0}, {0.5, p.cap_cy}, {0.5, p.cap_cy}, {0, 0}};
    o.labels = {"wrist", "underarm_right", "cap_right", "cap_left", "underarm_left"};
    return o;
}

struct SkirtParams {
    double waist_w;
    double hem_w;  // > waist_w
    double length;
    double waist_cy;
};

inline PanelOutline skirt_outline(const SkirtParams& p) {
    const double mid_w = (p.waist_w + p.hem_w) / 2;
    PanelOutline o;
    o.vertices = {{-p.hem_w / 2, 0},
                  {p.hem_w / 2, 0},
                  {mid_w / 2, p.length / 2},
                  {p.waist_w / 2, p.length},
                  {-p.waist_w / 2, p.length},
                  {-mid_w / 2, p.length / 2}};
    o.curvatures = {{0, 0}, {0, 0}, {0, 0}, {0.5, p.waist_cy}, {0, 0}, {0, 0}};
    o.labels = {"hem",         "side_right_lower", "side_right_upper",
                "waist",       "side_left_upper",  "side_left_lower"};
    return o;
}

// ---- placement helpers -----------------------------------------------------

inline Quat front_rotation(Rng& rng) {
    const Quat tilt = Quat::from_axis_angle({1, 0, 0}, deg_to_rad(rng.uniform(-5, 5)));
    const Quat yaw = Quat::from_axis_angle({0, 1, 0}, deg_to_rad(rng.uniform(-6, 6)));
    return (yaw * tilt).normalized().canonical();
}

/// Back rotation keeps a strictly positive yaw offset past 180 degrees so the
/// canonical-sign representative varies smoothly across samples.
inline Quat back_rotation(Rng& rng) {
    const Quat yaw = Quat::from_axis_angle({0, 1, 0}, deg_to_rad(180.0 + rng.uniform(6, 12)));
    const Quat tilt = Quat::from_axis_angle({1, 0, 0}, deg_to_rad(rng.uniform(-4, 4)));
    return (yaw * tilt).normalized().canonical();
}

inline Quat sleeve_rotation(Rng& rng, bool left) {
    const double roll = left ? rng.uniform(-22, -12) : rng.uniform(12, 22);
    const Quat q = Quat::from_axis_angle({0, 0, 1}, deg_to_rad(roll));
    const Quat swing = Quat::from_axis_angle({0, 1, 0}, deg_to_rad(rng.uniform(-8, 8)));
    return (swing * q).normalized().canonical();
}

// ---- drape stand-in --------------------------------------------------------

struct DrapeParams {
    double wrap_radius;
    double sin_amp;
    double sin_wavelength;
    double sin_phase;
};

inline DrapeParams sample_drape(Rng& rng, bool sleeve) {
    DrapeParams d;
    d.wrap_radius = sleeve ? rng.uniform(9, 14) : rng.uniform(38, 55);
    d.sin_amp = rng.uniform(0.4, 1.2);
    d.sin_wavelength = rng.uniform(16, 28);
    d.sin_phase = rng.uniform(0, 2 * kPi);
    return d;
}

/// Tessellate a panel outline, lift it with the panel placement, and push
/// vertices off-plane by the drape stand-in.
inline TriMesh panel_mesh(const Panel& panel, const DrapeParams& drape, double boundary_step,
                          int subdivision_rounds) {
    std::vector<Vec2> boundary;
    for (const Edge& e : panel.edges) {
        const Vec2 a = panel.vertices[static_cast<std::size_t>(e.start_vertex)];
        const Vec2 b = panel.vertices[static_cast<std::size_t>(e.end_vertex)];
        const int segs = std::max(2, static_cast<int>(std::ceil((b - a).norm() / boundary_step)));
        for (int s = 0; s < segs; ++s) {
            boundary.push_back(bezier_point(a, b, e.curvature, static_cast<double>(s) / segs));
        }
    }
    std::vector<std::array<int, 3>> faces = triangulate_polygon(boundary);
    for (int r = 0; r < subdivision_rounds; ++r) subdivide_once(boundary, faces);

    const Vec2 ref = placement_reference(panel);
    TriMesh mesh;
    mesh.vertices.reserve(boundary.size());
    for (const Vec2& v : boundary) {
        const double xc = v.x - ref.x;
        const double dz = -xc * xc / (2.0 * drape.wrap_radius) +
                          drape.sin_amp *
                              std::sin(2 * kPi * v.y / drape.sin_wavelength + drape.sin_phase);
        mesh.vertices.push_back(place_local_point(panel, v, dz));
    }
    mesh.faces = faces;
    return mesh;
}

// ---- family assembly -------------------------------------------------------

struct GarmentBuild {
    SewingPattern pattern;
    TriMesh mesh;
    std::map<std::string, std::map<std::string, int>> edge_of;  // panel -> label -> idx
};

inline void add_panel(GarmentBuild& g, const LabeledPanel& lp, Rng& rng, bool sleeve,
                      const SyntheticSpec& spec) {
    g.pattern.panels.emplace(lp.panel.name, lp.panel);
    g.edge_of[lp.panel.name] = lp.edge_of;
    g.mesh.append(panel_mesh(lp.panel, sample_drape(rng, sleeve), spec.boundary_step_cm,
                             spec.subdivision_rounds));
}

inline void add_stitch(GarmentBuild& g, const std::string& pa, const std::string& la,
                       const std::string& pb, const std::string& lb) {
    g.pattern.stitches.push_back(
        {{pa, g.edge_of.at(pa).at(la)}, {pb, g.edge_of.at(pb).at(lb)}});
}

struct TopBlock {
    TopParams front;
    double shoulder_y;
    double z_front;
};

inline TopBlock sample_top_block(Rng& rng) {
    TopBlock b;
    b.front.waist_w = rng.uniform(32, 44);
    b.front.underarm_w = b.front.waist_w * rng.uniform(1.02, 1.15);
    b.front.shoulder_w = b.front.waist_w * rng.uniform(0.82, 0.95);
    b.front.neck_w = b.front.waist_w * rng.uniform(0.28, 0.38);
    b.front.length = rng.uniform(32, 48);
    b.front.armhole_d = rng.uniform(13, 18);
    b.front.neck_cy = rng.uniform(0.25, 0.45);
    b.front.armhole_cy = rng.uniform(0.12, 0.30);
    b.shoulder_y = 138 + rng.uniform(-3, 3);
    b.z_front = 11 + rng.uniform(-1.5, 1.5);
    return b;
}

inline void build_tops(GarmentBuild& g, const TopBlock& b, Rng& rng, const SyntheticSpec& spec) {
    TopParams back = b.front;
    back.neck_cy = rng.uniform(0.08, 0.18);

    Placement pf{front_rotation(rng), {rng.uniform(-1.5, 1.5), b.shoulder_y, b.z_front}};
    Placement pb{back_rotation(rng),
                 {rng.uniform(-1.5, 1.5), b.shoulder_y + rng.uniform(-0.5, 0.5),
                  -(11 + rng.uniform(-1.5, 1.5))}};
    add_panel(g, finish_panel("top_front", top_outline(b.front), pf), rng, false, spec);
    add_panel(g, finish_panel("top_back", top_outline(back), pb), rng, false, spec);

    add_stitch(g, "top_front", "side_right", "top_back", "side_left");
    add_stitch(g, "top_front", "side_left", "top_back", "side_right");
    add_stitch(g, "top_front", "shoulder_right", "top_back", "shoulder_left");
    add_stitch(g, "top_front", "shoulder_left", "top_back", "shoulder_right");
}

inline void build_sleeves(GarmentBuild& g, const TopBlock& b, Rng& rng, const SyntheticSpec& spec) {
    SleeveParams s;
    s.cap_w = b.front.armhole_d * rng.uniform(1.8, 2.2);
    s.wrist_w = s.cap_w * rng.uniform(0.7, 0.9);
    s.length = rng.uniform(12, 30);
    s.cap_h = rng.uniform(3.5, 6.0);
    s.cap_cy = rng.uniform(-0.30, -0.12);

    const double shoulder_x = b.front.shoulder_w / 2 + 2.0;
    Placement pl{sleeve_rotation(rng, true),
                 {-(shoulder_x + rng.uniform(0, 1.5)), b.shoulder_y - 2 + rng.uniform(-1, 1),
                  rng.uniform(-2, 2)}};
    Placement pr{sleeve_rotation(rng, false),
                 {shoulder_x + rng.uniform(0, 1.5), b.shoulder_y - 2 + rng.uniform(-1, 1),
                  rng.uniform(-2, 2)}};
    add_panel(g, finish_panel("sleeve_left", sleeve_outline(s), pl), rng, true, spec);
    add_panel(g, finish_panel("sleeve_right", sleeve_outline(s), pr), rng, true, spec);

    add_stitch(g, "sleeve_left", "cap_right", "top_front", "armhole_left");
    add_stitch(g, "sleeve_left", "cap_left", "top_back", "armhole_right");
    add_stitch(g, "sleeve_right", "cap_left", "top_front", "armhole_right");
    add_stitch(g, "sleeve_right", "cap_right", "top_back", "armhole_left");
    add_stitch(g, "sleeve_left", "underarm_right", "sleeve_left", "underarm_left");
    add_stitch(g, "sleeve_right", "underarm_right", "sleeve_right", "underarm_left");
}

inline void build_skirts(GarmentBuild& g, const SkirtParams& s, double waist_y, Rng& rng,
                         const SyntheticSpec& spec) {
    Placement pf{front_rotation(rng),
                 {rng.uniform(-1.5, 1.5), waist_y, 10 + rng.uniform(-1.5, 1.5)}};
    Placement pb{back_rotation(rng),
                 {rng.uniform(-1.5, 1.5), waist_y + rng.uniform(-0.5, 0.5),
                  -(10 + rng.uniform(-1.5, 1.5))}};
    add_panel(g, finish_panel("skirt_front", skirt_outline(s), pf), rng, false, spec);
    add_panel(g, finish_panel("skirt_back", skirt_outline(s), pb), rng, false, spec);

    add_stitch(g, "skirt_front", "side_right_lower", "skirt_back", "side_left_lower");
    add_stitch(g, "skirt_front", "side_right_upper", "skirt_back", "side_left_upper");
    add_stitch(g, "skirt_front", "side_left_lower", "skirt_back", "side_right_lower");
    add_stitch(g, "skirt_front", "side_left_upper", "skirt_back", "side_right_upper");
}

inline SkirtParams sample_skirt_params(Rng& rng, double waist_from_top = 0.0) {
    SkirtParams s;
    s.waist_w = waist_from_top > 0.0 ? waist_from_top * rng.uniform(0.97, 1.05)
                                     : rng.uniform(30, 42);
    s.hem_w = s.waist_w * rng.uniform(1.08, 1.5);
    s.length = rng.uniform(35, 65);
    s.waist_cy = rng.uniform(0.04, 0.12);
    return s;
}

inline GarmentBuild build_family_sample(const std::string& family, Rng& rng,
                                        const SyntheticSpec& spec) {
    GarmentBuild g;
    g.pattern.garment_type = family;
    if (family == "tee") {
        const TopBlock b = sample_top_block(rng);
        build_tops(g, b, rng, spec);
        build_sleeves(g, b, rng, spec);
    } else if (family == "skirt") {
        build_skirts(g, sample_skirt_params(rng), 102 + rng.uniform(-4, 4), rng, spec);
    } else if (family == "dress") {
        const TopBlock b = sample_top_block(rng);
        build_tops(g, b, rng, spec);
        const SkirtParams s = sample_skirt_params(rng, b.front.waist_w);
        build_skirts(g, s, b.shoulder_y - b.front.length + 0.5, rng, spec);
        add_stitch(g, "top_front", "hem", "skirt_front", "waist");
        add_stitch(g, "top_back", "hem", "skirt_back", "waist");
    } else if (family == "tee_dress") {
        const TopBlock b = sample_top_block(rng);
        build_tops(g, b, rng, spec);
        build_sleeves(g, b, rng, spec);
        const SkirtParams s = sample_skirt_params(rng, b.front.waist_w);
        build_skirts(g, s, b.shoulder_y - b.front.length + 0.5, rng, spec);
        add_stitch(g, "top_front", "hem", "skirt_front", "waist");
        add_stitch(g, "top_back", "hem", "skirt_back", "waist");
    } else {
        throw Error("generate_synthetic_dataset: unknown family '" + family + "'");
    }
    return g;
}

}  // namespace detail

/// Generate the full synthetic dataset with its class map and split. The
/// family named by spec.unseen_family contributes test samples only.
inline SyntheticResult generate_synthetic_dataset(const SyntheticSpec& spec, Rng& rng) {
    for (const std::string& family : spec.families) {
        if (family != "tee" && family != "skirt" && family != "dress" && family != "tee_dress") {
            throw Error("generate_synthetic_dataset: unknown family '" + family + "'");
        }
    }
    SyntheticResult result;
    result.dataset.class_map = synthetic_class_map();

    for (std::size_t f = 0; f < spec.families.size(); ++f) {
        const std::string& family = spec.families[f];
        std::vector<std::string> ids;
        for (int i = 0; i < spec.samples_per_family; ++i) {
            Rng sample_rng = rng.derive(mix_seed(fnv1a64(family), static_cast<std::uint64_t>(i)));
            detail::GarmentBuild g = detail::build_family_sample(family, sample_rng, spec);
            char suffix[16];
            std::snprintf(suffix, sizeof suffix, "%04d", i);
            DatasetSample sample;
            sample.id = family + "_" + suffix;
            sample.pattern = std::move(g.pattern);
            sample.mesh = std::move(g.mesh);
            ids.push_back(sample.id);
            result.dataset.by_id.emplace(sample.id, result.dataset.samples.size());
            result.dataset.samples.push_back(std::move(sample));
            result.families_of_samples.push_back(family);
        }

        DatasetSplit& split = result.dataset.split;
        if (family == spec.unseen_family) {
            split.test_unseen.insert(split.test_unseen.end(), ids.begin(), ids.end());
            continue;
        }
        Rng split_rng = rng.derive(mix_seed(fnv1a64(family), 0xabcdefULL));
        split_rng.shuffle(ids);
        const int n = static_cast<int>(ids.size());
        const int n_val = std::min(spec.val_per_type, n);
        const int n_test = std::min(spec.test_per_type, std::max(0, n - n_val));
        for (int i = 0; i < n; ++i) {
            if (i < n_val) {
                split.validation.push_back(ids[static_cast<std::size_t>(i)]);
            } else if (i < n_val + n_test) {
                split.test_seen.push_back(ids[static_cast<std::size_t>(i)]);
            } else {
                split.train.push_back(ids[static_cast<std::size_t>(i)]);
            }
        }
    }
    std::sort(result.dataset.split.train.begin(), result.dataset.split.train.end());
    std::sort(result.dataset.split.validation.begin(), result.dataset.split.validation.end());
    std::sort(result.dataset.split.test_seen.begin(), result.dataset.split.test_seen.end());
    std::sort(result.dataset.split.test_unseen.begin(), result.dataset.split.test_unseen.end());
    return result;
}

}  // namespace sewnet
