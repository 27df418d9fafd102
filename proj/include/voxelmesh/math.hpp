// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace voxelmesh {

/// Error type thrown by all library operations.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values or failed numeric procedures (distinct CLI exit code).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

template <typename T>
struct Vec3 {
    T x{}, y{}, z{};

    Vec3() = default;
    Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

    T& operator[](int i) { return (&x)[i]; }
    const T& operator[](int i) const { return (&x)[i]; }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(T s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(T s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(T s) { x *= s; y *= s; z *= s; return *this; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    template <typename U>
    Vec3<U> cast() const { return {static_cast<U>(x), static_cast<U>(y), static_cast<U>(z)}; }
};

template <typename T>
inline Vec3<T> operator*(T s, const Vec3<T>& v) { return v * s; }

template <typename T>
inline T dot(const Vec3<T>& a, const Vec3<T>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

template <typename T>
inline Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <typename T>
inline T norm(const Vec3<T>& v) {
    using std::sqrt;
    return sqrt(dot(v, v));
}

template <typename T>
inline T norm2(const Vec3<T>& v) { return dot(v, v); }

template <typename T>
inline Vec3<T> normalized(const Vec3<T>& v) {
    T n = norm(v);
    if (n <= T(0)) return {T(0), T(0), T(0)};
    return v / n;
}

using Vec3f = Vec3<float>;
using Vec3d = Vec3<double>;
using Vec3i = Vec3<int>;

/// 3x3 matrix, row-major.
template <typename T>
struct Mat3 {
    std::array<T, 9> m{};

    T& operator()(int r, int c) { return m[r * 3 + c]; }
    const T& operator()(int r, int c) const { return m[r * 3 + c]; }

    static Mat3 identity() {
        Mat3 a;
        a.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return a;
    }

    Vec3<T> operator*(const Vec3<T>& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                T s = 0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    T det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }

    static Mat3 rotation_x(T angle) {
        T c = std::cos(angle), s = std::sin(angle);
        Mat3 r = identity();
        r(1, 1) = c; r(1, 2) = -s; r(2, 1) = s; r(2, 2) = c;
        return r;
    }
    static Mat3 rotation_y(T angle) {
        T c = std::cos(angle), s = std::sin(angle);
        Mat3 r = identity();
        r(0, 0) = c; r(0, 2) = s; r(2, 0) = -s; r(2, 2) = c;
        return r;
    }
    static Mat3 rotation_z(T angle) {
        T c = std::cos(angle), s = std::sin(angle);
        Mat3 r = identity();
        r(0, 0) = c; r(0, 1) = -s; r(1, 0) = s; r(1, 1) = c;
        return r;
    }
};

using Mat3f = Mat3<float>;
using Mat3d = Mat3<double>;

/// Rigid transform: p' = R p + t.
template <typename T>
struct Rigid {
    Mat3<T> rotation = Mat3<T>::identity();
    Vec3<T> translation{};

    Vec3<T> operator*(const Vec3<T>& p) const { return rotation * p + translation; }

    Rigid operator*(const Rigid& o) const {
        return {rotation * o.rotation, rotation * o.translation + translation};
    }

    Rigid inverse() const {
        Mat3<T> rt = rotation.transposed();
        return {rt, -(rt * translation)};
    }
};

using Rigidf = Rigid<float>;
using Rigidd = Rigid<double>;

///// Similarity transform: p' = s R p + t.
template <typename T>
struct Similarity {
    Mat3<T> rotation = Mat3<T>::identity();
    Vec3<T> translation{};
    T scale = T(1);

    Vec3<T> operator*(const Vec3<T>& p) const { return rotation * p * scale + translation; }

    Similarity inverse() const {
        Mat3<T> rt = rotation.transposed();
        T is = T(1) / scale;
        return {rt, -(rt * translation) * is, is};
    }
};

using Similarityf = Similarity<float>;
using Similarityd = Similarity<double>;

template <typename T>
struct Aabb {
    Vec3<T> min{std::numeric_limits<T>::max(), std::numeric_limits<T>::max(),
                std::numeric_limits<T>::max()};
    Vec3<T> max{std::numeric_limits<T>::lowest(), std::numeric_limits<T>::lowest(),
                std::numeric_limits<T>::lowest()};

    void expand(const Vec3<T>& p) {
        min.x = std::min(min.x, p.x); min.y = std::min(min.y, p.y); min.z = std::min(min.z, p.z);
        max.x = std::max(max.x, p.x); max.y = std::max(max.y, p.y); max.z = std::max(max.z, p.z);
    }

    Vec3<T> extent() const { return max - min; }
    Vec3<T> center() const { return (min + max) * T(0.5); }
    bool valid() const { return min.x <= max.x && min.y <= max.y && min.z <= max.z; }

    bool contains(const Vec3<T>& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
               p.z <= max.z;
    }
};

using Aabbf = Aabb<float>;
using Aabbd = Aabb<double>;

/// Forward-mode dual number carrying one derivative direction.
template <typename T>
struct Dual {
    T v{};  // value
    T d{};  // derivative

    Dual() = default;
    Dual(T v_) : v(v_), d(0) {}
    Dual(T v_, T d_) : v(v_), d(d_) {}

    Dual operator+(const Dual& o) const { return {v + o.v, d + o.d}; }
    Dual operator-(const Dual& o) const { return {v - o.v, d - o.d}; }
    Dual operator*(const Dual& o) const { return {v * o.v, d * o.v + v * o.d}; }
    Dual operator/(const Dual& o) const { return {v / o.v, (d * o.v - v * o.d) / (o.v * o.v)}; }
    Dual operator-() const { return {-v, -d}; }
    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { *this = *this - o; return *this; }
    Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
    bool operator<(const Dual& o) const { return v < o.v; }
    bool operator>(const Dual& o) const { return v > o.v; }
    bool operator<=(const Dual& o) const { return v <= o.v; }
    bool operator>=(const Dual& o) const { return v >= o.v; }
};

template <typename T> inline Dual<T> sqrt(const Dual<T>& a) {
    T s = std::sqrt(a.v);
    return {s, a.d / (T(2) * s)};
}

using Duald = Dual<double>;

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace voxelmesh
