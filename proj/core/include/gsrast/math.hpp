#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace gsrast {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const { return *this / norm(); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Quaternion in (w, x, y, z) order, matching the 3DGS PLY convention.
struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
    Quat normalized() const {
        const double n = norm();
        return {w / n, x / n, y / n, z / n};
    }
};

/// Row-major 3x3 matrix.
struct Mat3 {
    std::array<std::array<double, 3>, 3> m{};

    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }
    static Mat3 diagonal(const Vec3& d) {
        Mat3 r;
        r.m[0][0] = d.x; r.m[1][1] = d.y; r.m[2][2] = d.z;
        return r;
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }
    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }
};

/// Row-major 4x4 matrix; used for the world-to-view transform.
struct Mat4 {
    std::array<std::array<double, 4>, 4> m{};

    static Mat4 identity() {
        Mat4 r;
        for (int i = 0; i < 4; ++i) r.m[i][i] = 1.0;
        return r;
    }

    /// Transform a point (w = 1), dropping the homogeneous row.
    Vec3 transform_point(const Vec3& p) const {
        return {m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z + m[0][3],
                m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z + m[1][3],
                m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z + m[2][3]};
    }
    Mat3 rotation_part() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j];
        return r;
    }
    Vec3 translation_part() const { return {m[0][3], m[1][3], m[2][3]}; }
};

/// Symmetric 2x2 matrix stored as its three unique entries.
struct Sym2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;

    double det() const { return xx * yy - xy * xy; }
    double trace() const { return xx + yy; }
    Vec2 operator*(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    Sym2 operator+(const Sym2& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
    Sym2 operator-(const Sym2& o) const { return {xx - o.xx, xy - o.xy, yy - o.yy}; }
    Sym2 operator*(double s) const { return {xx * s, xy * s, yy * s}; }
    /// Quadratic form v^T M v.
    double quad(const Vec2& v) const { return xx * v.x * v.x + 2.0 * xy * v.x * v.y + yy * v.y * v.y; }
};

/// 2x3 matrix; the projection Jacobian and its products live here.
struct Mat23 {
    std::array<std::array<double, 3>, 2> m{};

    Vec2 operator*(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z};
    }
    Mat23 operator*(const Mat3& o) const {
        Mat23 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }
};

/// M * S * M^T for symmetric 3x3 S given as Mat3.
inline Sym2 congruence_2x3(const Mat23& M, const Mat3& S) {
    // tmp = M * S  (2x3)
    Mat23 tmp;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += M.m[i][k] * S.m[k][j];
            tmp.m[i][j] = s;
        }
    Sym2 r;
    r.xx = tmp.m[0][0] * M.m[0][0] + tmp.m[0][1] * M.m[0][1] + tmp.m[0][2] * M.m[0][2];
    r.xy = tmp.m[0][0] * M.m[1][0] + tmp.m[0][1] * M.m[1][1] + tmp.m[0][2] * M.m[1][2];
    r.yy = tmp.m[1][0] * M.m[1][0] + tmp.m[1][1] * M.m[1][1] + tmp.m[1][2] * M.m[1][2];
    return r;
}

/// Rotation matrix of a unit quaternion (w, x, y, z).
inline Mat3 rotation_matrix(const Quat& q) {
    const double w = q.w, x = q.x, y = q.y, z = q.z;
    Mat3 r;
    r.m[0] = {1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)};
    r.m[1] = {2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)};
    r.m[2] = {2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)};
    return r;
}

struct Eigen2 {
    double lambda_major = 0.0;  // larger eigenvalue
    double lambda_minor = 0.0;
    Vec2 axis_major;            // unit eigenvector of lambda_major
    Vec2 axis_minor;
};

/// Closed-form eigendecomposition of a symmetric 2x2 matrix.
inline Eigen2 eigen_sym2(const Sym2& s) {
    Eigen2 e;
    const double mid = 0.5 * (s.xx + s.yy);
    const double half_diff = 0.5 * (s.xx - s.yy);
    const double disc = std::sqrt(half_diff * half_diff + s.xy * s.xy);
    e.lambda_major = mid + disc;
    e.lambda_minor = mid - disc;
    if (std::abs(s.xy) > 1e-300) {
        Vec2 v{e.lambda_major - s.yy, s.xy};
        const double n = v.norm();
        e.axis_major = {v.x / n, v.y / n};
    } else {
        e.axis_major = (s.xx >= s.yy) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
    }
    e.axis_minor = {-e.axis_major.y, e.axis_major.x};
    return e;
}

}  // namespace gsrast
