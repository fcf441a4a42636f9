#pragma once

#include <array>
#include <cmath>

#include "sewnet/common.hpp"

namespace sewnet {

// ---------------------------------------------------------------------------
// Small fixed-size vectors and quaternion. Domain code uses these rather than
// Eigen so the pattern model stays lightweight; the network layer has its own
// matrix types.
// ---------------------------------------------------------------------------

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
    double squared_norm() const { return x * x + y * y; }
};

/// 90-degree counter-clockwise rotation ("left of travel").
inline Vec2 perp_ccw(const Vec2& v) { return {-v.y, v.x}; }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// ---------------------------------------------------------------------------
// Quaternion (w, x, y, z), w is the scalar part.
// ---------------------------------------------------------------------------

struct Quat {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Quat normalized() const {
        const double n = norm();
        if (n < 1e-12) throw GeometryError("cannot normalize near-zero quaternion");
        return {w / n, x / n, y / n, z / n};
    }

    /// Canonical sign: scalar part >= 0; when the scalar part is zero the
    /// first nonzero vector component is made positive so q and -q always
    /// collapse to the same representative.
    Quat canonical() const {
        const double* comps[4] = {&w, &x, &y, &z};
        for (const double* c : comps) {
            if (*c > 0.0) return *this;
            if (*c < 0.0) return {-w, -x, -y, -z};
        }
        return *this;  // all-zero (invalid, but sign is moot)
    }

    Quat operator*(const Quat& o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }

    /// Rotate a vector. Requires unit norm.
    Vec3 rotate(const Vec3& v) const {
        // v' = v + 2 u x (u x v + w v), u = (x, y, z)
        const Vec3 u{x, y, z};
        const Vec3 t = u.cross(v) * 2.0;
        return v + t * w + u.cross(t);
    }

    static Quat from_axis_angle(const Vec3& axis, double angle_rad) {
        const double n = axis.norm();
        if (n < 1e-12) throw GeometryError("axis-angle with zero axis");
        const double s = std::sin(angle_rad / 2.0) / n;
        return {std::cos(angle_rad / 2.0), axis.x * s, axis.y * s, axis.z * s};
    }

    std::array<double, 4> wxyz() const { return {w, x, y, z}; }
};

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace sewnet
