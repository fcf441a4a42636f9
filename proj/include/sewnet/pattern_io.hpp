#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sewnet/pattern.hpp"

namespace sewnet {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Pattern document format
//
// {
//   "type": "<garment type>",
//   "panels": {
//     "<name>": {
//       "vertices": [[x, y], ...],                      // cm, panel-local
//       "edges": [{"endpoints": [i, j],
//                  "curvature": [cx, cy]}, ...],        // curvature optional
//       "rotation": [qx, qy, qz, qw],                   // unit quaternion
//       "translation": [tx, ty, tz]                     // cm, body frame
//     }, ...
//   },
//   "stitches": [[{"panel": "<name>", "edge": i},
//                 {"panel": "<name>", "edge": j}], ...]
// }
// ---------------------------------------------------------------------------

namespace detail {

inline ParseError parse_error_at(const std::string& path, const std::string& what) {
    return ParseError("pattern document: " + path + ": " + what);
}

inline double expect_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw parse_error_at(path, "expected a number");
    return j.get<double>();
}

inline const json& expect_array(const json& j, const std::string& path, std::size_t size = 0) {
    if (!j.is_array()) throw parse_error_at(path, "expected an array");
    if (size != 0 && j.size() != size) {
        throw parse_error_at(path, "expected an array of size " + std::to_string(size));
    }
    return j;
}

inline Panel parse_panel(const std::string& name, const json& j, const std::string& path) {
    if (!j.is_object()) throw parse_error_at(path, "expected an object");
    Panel panel;
    panel.name = name;

    if (!j.contains("vertices")) throw parse_error_at(path + ".vertices", "missing");
    const json& vertices = expect_array(j.at("vertices"), path + ".vertices");
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const std::string vp = path + ".vertices[" + std::to_string(i) + "]";
        const json& v = expect_array(vertices.at(i), vp, 2);
        panel.vertices.push_back({expect_number(v.at(0), vp), expect_number(v.at(1), vp)});
    }

    if (!j.contains("edges")) throw parse_error_at(path + ".edges", "missing");
    const json& edges = expect_array(j.at("edges"), path + ".edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string ep = path + ".edges[" + std::to_string(i) + "]";
        const json& e = edges.at(i);
        if (!e.is_object()) throw parse_error_at(ep, "expected an object");
        if (!e.contains("endpoints")) throw parse_error_at(ep + ".endpoints", "missing");
        const json& endpoints = expect_array(e.at("endpoints"), ep + ".endpoints", 2);
        if (!endpoints.at(0).is_number_integer() || !endpoints.at(1).is_number_integer()) {
            throw parse_error_at(ep + ".endpoints", "expected integer vertex ids");
        }
        Edge edge;
        edge.start_vertex = endpoints.at(0).get<int>();
        edge.end_vertex = endpoints.at(1).get<int>();
        if (e.contains("curvature")) {
            const json& c = expect_array(e.at("curvature"), ep + ".curvature", 2);
            edge.curvature = {expect_number(c.at(0), ep + ".curvature"),
                              expect_number(c.at(1), ep + ".curvature")};
        }
        const int n_vertices = static_cast<int>(panel.vertices.size());
        if (edge.start_vertex < 0 || edge.start_vertex >= n_vertices || edge.end_vertex < 0 ||
            edge.end_vertex >= n_vertices) {
            throw ValidationError("pattern document: " + ep + ".endpoints: vertex id out of range");
        }
        panel.edges.push_back(edge);
    }

    if (!j.contains("rotation")) throw parse_error_at(path + ".rotation", "missing");
    const json& rot = expect_array(j.at("rotation"), path + ".rotation", 4);
    panel.placement.rotation = Quat{expect_number(rot.at(3), path + ".rotation"),
                                    expect_number(rot.at(0), path + ".rotation"),
                                    expect_number(rot.at(1), path + ".rotation"),
                                    expect_number(rot.at(2), path + ".rotation")};

    if (!j.contains("translation")) throw parse_error_at(path + ".translation", "missing");
    const json& tr = expect_array(j.at("translation"), path + ".translation", 3);
    panel.placement.translation = Vec3{expect_number(tr.at(0), path + ".translation"),
                                       expect_number(tr.at(1), path + ".translation"),
                                       expect_number(tr.at(2), path + ".translation")};
    return panel;
}

}  // namespace detail

/// Parse and structurally validate a pattern document. Quaternions are
/// normalized to unit length and canonical sign; vertices are translated so
/// the first loop vertex sits at the panel origin.
inline SewingPattern parse_pattern(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("pattern document: not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw detail::parse_error_at("$", "expected a JSON object");

    SewingPattern pattern;
    if (doc.contains("type")) {
        if (!doc.at("type").is_string()) throw detail::parse_error_at("type", "expected a string");
        pattern.garment_type = doc.at("type").get<std::string>();
    }

    if (!doc.contains("panels") || !doc.at("panels").is_object()) {
        throw detail::parse_error_at("panels", "expected an object");
    }
    for (const auto& [name, body] : doc.at("panels").items()) {
        Panel panel = detail::parse_panel(name, body, "panels." + name);

        // Normalize conventions at ingestion.
        if (!panel.edges.empty()) {
            const Vec2 origin =
                panel.vertices[static_cast<std::size_t>(panel.edges.front().start_vertex)];
            for (Vec2& v : panel.vertices) v = v - origin;
        }
        const double qn = panel.placement.rotation.norm();
        if (qn < 1e-6) {
            throw ValidationError("pattern document: panels." + name +
                                  ".rotation: quaternion has near-zero norm");
        }
        panel.placement.rotation = panel.placement.rotation.normalized().canonical();

        pattern.panels.emplace(name, std::move(panel));
    }

    if (doc.contains("stitches")) {
        const json& stitches = detail::expect_array(doc.at("stitches"), "stitches");
        for (std::size_t i = 0; i < stitches.size(); ++i) {
            const std::string sp = "stitches[" + std::to_string(i) + "]";
            const json& s = detail::expect_array(stitches.at(i), sp, 2);
            Stitch stitch;
            EdgeRef* refs[2] = {&stitch.first, &stitch.second};
            for (int side = 0; side < 2; ++side) {
                const json& half = s.at(static_cast<std::size_t>(side));
                const std::string hp = sp + "[" + std::to_string(side) + "]";
                if (!half.is_object() || !half.contains("panel") || !half.contains("edge")) {
                    throw detail::parse_error_at(hp, "expected {panel, edge}");
                }
                if (!half.at("panel").is_string() || !half.at("edge").is_number_integer()) {
                    throw detail::parse_error_at(hp, "expected string panel and integer edge");
                }
                refs[side]->panel = half.at("panel").get<std::string>();
                refs[side]->edge = half.at("edge").get<int>();
                auto it = pattern.panels.find(refs[side]->panel);
                if (it == pattern.panels.end()) {
                    throw ValidationError("pattern document: " + hp + ": unknown panel '" +
                                          refs[side]->panel + "'");
                }
                if (refs[side]->edge < 0 || refs[side]->edge >= it->second.edge_count()) {
                    throw ValidationError("pattern document: " + hp + ": edge index " +
                                          std::to_string(refs[side]->edge) + " out of range for panel '" +
                                          refs[side]->panel + "'");
                }
            }
            pattern.stitches.push_back(stitch);
        }
    }

    return pattern;
}

/// Emit a schema-conformant document. Keys are sorted (nlohmann object
/// ordering), numbers use shortest-roundtrip formatting, so output is
/// deterministic and reparses bit-identically.
inline std::string serialize_pattern(const SewingPattern& pattern) {
    json doc;
    doc["type"] = pattern.garment_type;
    json panels = json::object();
    for (const auto& [name, panel] : pattern.panels) {
        json p;
        json vertices = json::array();
        for (const Vec2& v : panel.vertices) vertices.push_back({v.x, v.y});
        p["vertices"] = std::move(vertices);
        json edges = json::array();
        for (const Edge& e : panel.edges) {
            json edge;
            edge["endpoints"] = {e.start_vertex, e.end_vertex};
            if (!e.is_straight()) edge["curvature"] = {e.curvature.x, e.curvature.y};
            edges.push_back(std::move(edge));
        }
        p["edges"] = std::move(edges);
        const Quat& q = panel.placement.rotation;
        p["rotation"] = {q.x, q.y, q.z, q.w};
        const Vec3& t = panel.placement.translation;
        p["translation"] = {t.x, t.y, t.z};
        panels[name] = std::move(p);
    }
    doc["panels"] = std::move(panels);
    json stitches = json::array();
    for (const Stitch& s : pattern.stitches) {
        stitches.push_back({{{"panel", s.first.panel}, {"edge", s.first.edge}},
                            {{"panel", s.second.panel}, {"edge", s.second.edge}}});
    }
    doc["stitches"] = std::move(stitches);
    return doc.dump(2) + "\n";
}

inline SewingPattern load_pattern_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pattern file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_pattern(buf.str());
}

inline void save_pattern_file(const SewingPattern& pattern, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write pattern file: " + path);
    out << serialize_pattern(pattern);
}

// ---------------------------------------------------------------------------
// Class map I/O: {"class_order": [...], "assignment": {type: {panel: idx}}}
// ---------------------------------------------------------------------------

inline PanelClassMap class_map_from_json(const json& j) {
    if (!j.is_object() || !j.contains("class_order") || !j.at("class_order").is_array()) {
        throw ParseError("class map: expected object with class_order array");
    }
    PanelClassMap map;
    for (const auto& c : j.at("class_order")) {
        if (!c.is_string()) throw ParseError("class map: class_order entries must be strings");
        map.class_order.push_back(c.get<std::string>());
    }
    if (j.contains("assignment")) {
        if (!j.at("assignment").is_object()) throw ParseError("class map: assignment must be an object");
        for (const auto& [type, panels] : j.at("assignment").items()) {
            if (!panels.is_object()) throw ParseError("class map: assignment." + type + " must be an object");
            for (const auto& [panel, idx] : panels.items()) {
                if (!idx.is_number_integer()) {
                    throw ParseError("class map: assignment." + type + "." + panel + " must be an integer");
                }
                map.assignment[type][panel] = idx.get<int>();
            }
        }
    }
    return map;
}

inline json class_map_to_json(const PanelClassMap& map) {
    json j;
    j["class_order"] = map.class_order;
    json assignment = json::object();
    for (const auto& [type, panels] : map.assignment) {
        json p = json::object();
        for (const auto& [panel, idx] : panels) p[panel] = idx;
        assignment[type] = std::move(p);
    }
    j["assignment"] = std::move(assignment);
    return j;
}

inline PanelClassMap load_class_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open class map: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("class map: not valid JSON: ") + e.what());
    }
    return class_map_from_json(j);
}

inline void save_class_map_file(const PanelClassMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write class map: " + path);
    out << class_map_to_json(map).dump(2) << "\n";
}

}  // namespace sewnet
