#pragma once

#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sewnet/vec.hpp"

namespace sewnet {

// ---------------------------------------------------------------------------
// Indexed triangle mesh, OBJ-backed (v / f records only).
// ---------------------------------------------------------------------------

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    bool empty() const { return faces.empty(); }

    double face_area(std::size_t f) const {
        const auto& t = faces[f];
        const Vec3 a = vertices[static_cast<std::size_t>(t[0])];
        const Vec3 b = vertices[static_cast<std::size_t>(t[1])];
        const Vec3 c = vertices[static_cast<std::size_t>(t[2])];
        return 0.5 * (b - a).cross(c - a).norm();
    }

    double total_area() const {
        double area = 0.0;
        for (std::size_t f = 0; f < faces.size(); ++f) area += face_area(f);
        return area;
    }

    /// Append another mesh (index-shifted).
    void append(const TriMesh& other) {
        const int offset = static_cast<int>(vertices.size());
        vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
        for (const auto& f : other.faces) {
            faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
        }
    }
};

inline void save_obj(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write mesh file: " + path);
    out.precision(9);
    for (const Vec3& v : mesh.vertices) {
        out << "v " << v.x << " " << v.y << " " << v.z << "\n";
    }
    for (const auto& f : mesh.faces) {
        out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
    }
}

inline TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh file: " + path);
    TriMesh mesh;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream str(line);
        std::string cmd;
        if (!(str >> cmd) || cmd[0] == '#') continue;
        if (cmd == "v") {
            Vec3 v;
            if (!(str >> v.x >> v.y >> v.z)) {
                throw ParseError(path + ":" + std::to_string(line_no) + ": malformed vertex");
            }
            mesh.vertices.push_back(v);
        } else if (cmd == "f") {
            std::array<int, 3> face{};
            for (int i = 0; i < 3; ++i) {
                std::string token;
                if (!(str >> token)) {
                    throw ParseError(path + ":" + std::to_string(line_no) + ": face needs 3 indices");
                }
                // tolerate v/vt/vn syntax; only the vertex index is used
                face[static_cast<std::size_t>(i)] = std::stoi(token) - 1;
                if (face[static_cast<std::size_t>(i)] < 0 ||
                    face[static_cast<std::size_t>(i)] >= static_cast<int>(mesh.vertices.size())) {
                    throw ParseError(path + ":" + std::to_string(line_no) + ": face index out of range");
                }
            }
            mesh.faces.push_back(face);
        }
    }
    return mesh;
}

// ---------------------------------------------------------------------------
// 2D polygon triangulation (ear clipping) and refinement, used to turn panel
// outlines into sampleable surfaces.
// ---------------------------------------------------------------------------

namespace detail {

inline double tri_cross(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    const double d1 = tri_cross(p, a, b);
    const double d2 = tri_cross(p, b, c);
    const double d3 = tri_cross(p, c, a);
    const bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    const bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    return !(has_neg && has_pos);
}

}  // namespace detail

/// Ear-clipping triangulation of a simple CCW polygon. Tolerates exactly
/// collinear boundary chains (degenerate tips are dropped without emitting a
/// sliver) and points that touch a candidate ear's boundary without entering
/// its interior. Returns index triples into the input vertex list.
inline std::vector<std::array<int, 3>> triangulate_polygon(const std::vector<Vec2>& polygon) {
    const int n = static_cast<int>(polygon.size());
    if (n < 3) throw GeometryError("triangulate_polygon: need at least 3 vertices");

    double extent = 0.0;
    for (const Vec2& v : polygon) extent = std::max({extent, std::abs(v.x), std::abs(v.y)});
    const double eps = 1e-10 * std::max(1.0, extent * extent);

    std::vector<int> remaining(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) remaining[static_cast<std::size_t>(i)] = i;

    // strictly inside: all orientation tests positive by a margin
    const auto strictly_inside = [&](const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
        return detail::tri_cross(a, b, p) > eps && detail::tri_cross(b, c, p) > eps &&
               detail::tri_cross(c, a, p) > eps;
    };

    std::vector<std::array<int, 3>> out;
    while (remaining.size() > 3) {
        bool progressed = false;
        const std::size_t m = remaining.size();
        // first pass: drop a degenerate (collinear) tip if one exists
        for (std::size_t i = 0; i < m && !progressed; ++i) {
            const Vec2& a = polygon[static_cast<std::size_t>(remaining[(i + m - 1) % m])];
            const Vec2& b = polygon[static_cast<std::size_t>(remaining[i])];
            const Vec2& c = polygon[static_cast<std::size_t>(remaining[(i + 1) % m])];
            const double cr = detail::tri_cross(a, b, c);
            if (std::abs(cr) <= eps && (c - a).dot(b - a) > 0.0 && (a - c).dot(b - c) > 0.0) {
                remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(i));
                progressed = true;
            }
        }
        // second pass: clip a convex ear whose interior is empty
        for (std::size_t i = 0; i < m && !progressed; ++i) {
            const int ia = remaining[(i + m - 1) % m];
            const int ib = remaining[i];
            const int ic = remaining[(i + 1) % m];
            const Vec2& a = polygon[static_cast<std::size_t>(ia)];
            const Vec2& b = polygon[static_cast<std::size_t>(ib)];
            const Vec2& c = polygon[static_cast<std::size_t>(ic)];
            if (detail::tri_cross(a, b, c) <= eps) continue;  // reflex or degenerate
            bool blocked = false;
            for (const int other : remaining) {
                if (other == ia || other == ib || other == ic) continue;
                if (strictly_inside(polygon[static_cast<std::size_t>(other)], a, b, c)) {
                    blocked = true;
                    break;
                }
            }
            if (blocked) continue;
            out.push_back({ia, ib, ic});
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(i));
            progressed = true;
        }
        if (!progressed) throw GeometryError("triangulate_polygon: polygon is not simple CCW");
    }
    const Vec2& a = polygon[static_cast<std::size_t>(remaining[0])];
    const Vec2& b = polygon[static_cast<std::size_t>(remaining[1])];
    const Vec2& c = polygon[static_cast<std::size_t>(remaining[2])];
    if (detail::tri_cross(a, b, c) > eps) out.push_back({remaining[0], remaining[1], remaining[2]});
    return out;
}

/// One round of 4-to-1 midpoint subdivision on a 2D triangulation.
inline void subdivide_once(std::vector<Vec2>& vertices, std::vector<std::array<int, 3>>& faces) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        const auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const Vec2 m = (vertices[static_cast<std::size_t>(a)] + vertices[static_cast<std::size_t>(b)]) * 0.5;
        vertices.push_back(m);
        const int idx = static_cast<int>(vertices.size()) - 1;
        midpoint.emplace(key, idx);
        return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
        const int ab = mid(f[0], f[1]);
        const int bc = mid(f[1], f[2]);
        const int ca = mid(f[2], f[0]);
        next.push_back({f[0], ab, ca});
        next.push_back({ab, f[1], bc});
        next.push_back({ca, bc, f[2]});
        next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
}

}  // namespace sewnet
